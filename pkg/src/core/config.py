"""
Run configuration: one validated ``RunConfig`` per process, loaded from a TOML
file of ``key = value`` lines and overridden by command-line flags.

Nested settings use dotted keys (``train.steps = 200``) or ``[train]`` tables.
Top-level ``image_size`` and ``frames`` are shared by the scene and training
sections.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Union

import toml
from pydantic import Field, ValidationError, field_validator, model_validator

from src.core.constants import Constants
from src.core.errors import ConfigError
from src.models.config import SegmenterConfig, StrictModel, SyntheticSceneConfig, TrainConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CONDITIONS = Constants.CONDITIONS
CONFIG_NAME = "config.toml"


class RunConfig(StrictModel):
    command: Optional[Literal["gen-data", "train", "infer", "eval", "verify"]] = None
    log_level: str = "INFO"

    # paths
    data_dir: Path = Path("data")
    run_dir: Path = Path("runs/run0")
    checkpoint: Optional[Path] = None
    compare_checkpoint: Optional[Path] = None
    resume: Optional[Path] = None
    input_dir: Optional[Path] = None
    output_dir: Optional[Path] = None
    segmenter_path: Optional[Path] = None
    force: bool = False

    # data
    image_size: int = Field(32, ge=8)
    frames: int = Field(500, ge=3)
    seed_x: int = 1
    seed_y: int = 2
    conditions: List[str] = Field(default_factory=lambda: ["day"])

    # inference / evaluation / verification
    domain: Literal["X", "Y"] = "X"
    smooth: bool = False
    eval_frames: int = Field(100, ge=3)
    eval_seed: int = 1000
    diversity_sample: int = Field(16, ge=2)
    checks: List[str] = Field(default_factory=list)
    verify_seed: int = 0

    scene: SyntheticSceneConfig = Field(default_factory=SyntheticSceneConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    segmenter: SegmenterConfig = Field(default_factory=SegmenterConfig)

    @field_validator("conditions")
    @classmethod
    def _known_conditions(cls, value: List[str]) -> List[str]:
        unknown = [c for c in value if c not in CONDITIONS]
        if unknown or not value:
            raise ValueError(f"conditions must be a non-empty subset of {list(CONDITIONS)}, got {value}")
        if len(set(value)) != len(value):
            raise ValueError(f"conditions repeat: {value}")
        return value

    @model_validator(mode="before")
    @classmethod
    def _share_sizes(cls, data: Any) -> Any:
        """Copy top-level image_size and frames into the sections that did not set them."""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        shared = {
            "image_size": data.get("image_size", cls.model_fields["image_size"].default),
            "frames": data.get("frames", cls.model_fields["frames"].default),
        }
        scene = data.get("scene")
        scene = dict(scene) if isinstance(scene, Mapping) else {}
        scene.setdefault("image_size", shared["image_size"])
        scene.setdefault("frames", shared["frames"])
        data["scene"] = scene
        train = data.get("train")
        train = dict(train) if isinstance(train, Mapping) else {}
        train.setdefault("image_size", shared["image_size"])
        data["train"] = train
        return data

    @model_validator(mode="after")
    def _sizes_agree(self) -> "RunConfig":
        sizes = {"image_size": self.image_size, "scene.image_size": self.scene.image_size, "train.image_size": self.train.image_size}
        if len(set(sizes.values())) != 1:
            raise ValueError(f"image sizes disagree: {sizes}")
        if self.scene.frames != self.frames:
            raise ValueError(f"frames ({self.frames}) and scene.frames ({self.scene.frames}) disagree")
        return self

    def scene_for(self, condition: str) -> SyntheticSceneConfig:
        return self.scene.model_copy(update={"condition": condition})

    def to_file(self, path: PathLike) -> Path:
        """Write the resolved config as TOML; reloading it gives an equal config."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = self.model_dump(mode="json", exclude_none=True, exclude={"command", "force"})
        with path.open("w") as f:
            toml.dump(data, f)
        return path


def set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    """data["a"]["b"] = value for key "a.b", creating tables on the way."""
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[parts[-1]] = value


def parse_value(text: str) -> Any:
    """TOML literal when the text is one (``10``, ``true``, ``[1, 2]``), else the raw string."""
    try:
        return toml.loads(f"value = {text}")["value"]
    except toml.TomlDecodeError:
        return text


def parse_assignments(assignments: Optional[List[str]]) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for item in assignments or []:
        key, sep, text = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override '{item}' is not of the form key=value")
        overrides[key.strip()] = parse_value(text.strip())
    return overrides


def load_config_file(config_file: PathLike) -> Dict[str, Any]:
    path = Path(config_file)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        return toml.load(path)
    except toml.TomlDecodeError as e:
        raise ConfigError(f"cannot parse config file {path}: {e}") from e


def build_config(
    file_data: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """Defaults, then file values, then overrides (dotted keys); validated as a whole."""
    data: Dict[str, Any] = {}
    for key, value in (file_data or {}).items():
        if isinstance(value, Mapping):
            for inner_key, inner_value in _flatten(value, key).items():
                set_dotted(data, inner_key, inner_value)
        else:
            data[key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            set_dotted(data, key, value)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e


def _flatten(table: Mapping[str, Any], prefix: str) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in table.items():
        name = f"{prefix}.{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, name))
        else:
            flat[name] = value
    return flat


# Global config instance - will be initialized from main.py
config: Optional[RunConfig] = None


def init_config(config_file: Optional[PathLike] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Initialize the global config from an optional TOML file plus overrides."""
    global config
    file_data = {}
    if config_file:
        logger.info(f"Loading config from {config_file}")
        file_data = load_config_file(config_file)
    config = build_config(file_data, overrides)
    return config
