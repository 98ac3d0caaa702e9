from typing import Dict, List, Optional

from pydantic import BaseModel, Field

LOSS_TERMS = (
    "adv_X",
    "adv_Y",
    "recycle_X",
    "recycle_Y",
    "recurrent_X",
    "recurrent_Y",
    "cycle_X",
    "cycle_Y",
)


class LossReport(BaseModel):
    """Generator-side terms of one objective evaluation and their weighted total."""

    adv_X: float = 0.0
    adv_Y: float = 0.0
    recycle_X: float = 0.0
    recycle_Y: float = 0.0
    recurrent_X: float = 0.0
    recurrent_Y: float = 0.0
    cycle_X: Optional[float] = None
    cycle_Y: Optional[float] = None
    disc_X: Optional[float] = None
    disc_Y: Optional[float] = None
    total: float = 0.0

    @staticmethod
    def csv_header() -> List[str]:
        return ["step", *LOSS_TERMS, "disc_X", "disc_Y", "total"]

    def csv_row(self, step: int) -> List[str]:
        values = [getattr(self, name) for name in LOSS_TERMS] + [self.disc_X, self.disc_Y, self.total]
        return [str(step)] + ["" if v is None else repr(float(v)) for v in values]


class ClassMetrics(BaseModel):
    class_id: int
    pixels: int
    accuracy: Optional[float] = None
    iou: Optional[float] = None


class SegMetrics(BaseModel):
    mean_pixel_accuracy: float = Field(ge=0.0, le=1.0)
    average_class_accuracy: float = Field(ge=0.0, le=1.0)
    mean_iou: float = Field(ge=0.0, le=1.0)
    per_class: List[ClassMetrics] = Field(default_factory=list)


class DiversityReport(BaseModel):
    input_dispersion: float = Field(ge=0.0)
    output_dispersion: float = Field(ge=0.0)
    ratio: float = Field(ge=0.0)


class EvalReport(BaseModel):
    """Everything ``eval`` measures for one checkpoint."""

    checkpoint: str
    task: str
    seg_metrics: Dict[str, SegMetrics] = Field(default_factory=dict)
    oracle_score: Optional[float] = None
    translation_mse: Optional[float] = None
    diversity: Optional[DiversityReport] = None

    def csv_row(self) -> Dict[str, str]:
        row = {"checkpoint": self.checkpoint, "task": self.task}
        pooled = self.seg_metrics.get("all")
        if pooled is not None:
            row.update(
                MP=f"{pooled.mean_pixel_accuracy:.6f}",
                AC=f"{pooled.average_class_accuracy:.6f}",
                IoU=f"{pooled.mean_iou:.6f}",
            )
        if self.oracle_score is not None:
            row["oracle_score"] = f"{self.oracle_score:.6f}"
        if self.translation_mse is not None:
            row["translation_mse"] = f"{self.translation_mse:.6f}"
        if self.diversity is not None:
            row["diversity_ratio"] = f"{self.diversity.ratio:.6f}"
        return row


class CheckResult(BaseModel):
    """One case of one verification check."""

    check: str
    case: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    message: str = ""
    seconds: float = 0.0

    @property
    def label(self) -> str:
        return self.check if self.case == self.check else f"{self.check}/{self.case}"


class VerifyReport(BaseModel):
    results: List[CheckResult] = Field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]
