from src.models.config import (
    DiscriminatorConfig,
    GeneratorConfig,
    LossWeights,
    SegmenterConfig,
    StrictModel,
    SyntheticSceneConfig,
    TrainConfig,
    UNetConfig,
)
from src.models.reports import (
    CheckResult,
    ClassMetrics,
    DiversityReport,
    EvalReport,
    LossReport,
    SegMetrics,
    VerifyReport,
)

__all__ = [
    "StrictModel",
    "GeneratorConfig",
    "DiscriminatorConfig",
    "UNetConfig",
    "LossWeights",
    "SyntheticSceneConfig",
    "TrainConfig",
    "SegmenterConfig",
    "LossReport",
    "SegMetrics",
    "ClassMetrics",
    "DiversityReport",
    "EvalReport",
    "CheckResult",
    "VerifyReport",
]
