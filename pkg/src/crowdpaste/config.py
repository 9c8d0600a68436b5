"""Pipeline configuration: one YAML file drives every subcommand.

Unknown keys are rejected so typos fail fast; every engine hyperparameter is
surfaced with its default. Flag overrides (seed, engine, workers, output)
are applied after loading.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .compositor import ColorJitter
from .sampling import DengParams, PsadaParams

__all__ = ["ConfigError", "PipelineConfig", "load_config"]

ENGINES = ("psada", "deng")


class ConfigError(ValueError):
    """Raised for unreadable, malformed, or invalid configuration."""


@dataclass
class PipelineConfig:
    dataset_root: Path = Path(".")
    output_root: Path = Path("out")
    masks_subdir: str = "masks"
    images_subdir: str = "images"
    labels_dir: Path | None = None   # defaults to <output_root>/labels
    bank_dir: Path | None = None     # defaults to <output_root>/bank
    engine: str = "psada"
    psada: PsadaParams = field(default_factory=PsadaParams)
    deng: DengParams = field(default_factory=DengParams)
    jitter: ColorJitter = field(default_factory=ColorJitter)
    master_seed: int = 0
    samples_per_base_image: int = 1
    worker_count: int = 1
    min_area: int = 9
    connectivity: int = 8
    visibility_threshold: float = 0.25
    iou_threshold: float = 0.5
    histogram_bin_width: float = 0.05

    @property
    def masks_path(self) -> Path:
        return self.dataset_root / self.masks_subdir

    @property
    def images_path(self) -> Path:
        return self.dataset_root / self.images_subdir

    @property
    def labels_path(self) -> Path:
        return self.labels_dir if self.labels_dir is not None else self.output_root / "labels"

    @property
    def bank_path(self) -> Path:
        return self.bank_dir if self.bank_dir is not None else self.output_root / "bank"

    def validate(self) -> None:
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if not self.dataset_root.is_dir():
            raise ConfigError(f"dataset_root does not exist: {self.dataset_root}")
        if self.samples_per_base_image < 1:
            raise ConfigError("samples_per_base_image must be >= 1")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be >= 1")
        if self.connectivity not in (4, 8):
            raise ConfigError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.min_area < 1:
            raise ConfigError("min_area must be >= 1")
        if not 0.0 <= self.visibility_threshold <= 1.0:
            raise ConfigError("visibility_threshold must be in [0, 1]")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ConfigError("iou_threshold must be in (0, 1]")
        if not 0.0 < self.histogram_bin_width <= 1.0:
            raise ConfigError("histogram_bin_width must be in (0, 1]")
        try:
            self.psada.validate()
            self.deng.validate()
            self.jitter.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _build(cls, data: dict, context: str):
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad {context} section: {exc}") from exc


def load_config(
    path: Path | str,
    *,
    seed: int | None = None,
    engine: str | None = None,
    workers: int | None = None,
    output_root: Path | str | None = None,
) -> PipelineConfig:
    """Load and validate a pipeline config, applying CLI overrides."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")

    data = dict(data)
    nested = {
        "psada": (PsadaParams, data.pop("psada", {})),
        "deng": (DengParams, data.pop("deng", {})),
        "jitter": (ColorJitter, data.pop("jitter", {})),
    }
    for key in ("dataset_root", "output_root", "labels_dir", "bank_dir"):
        if data.get(key) is not None:
            data[key] = Path(data[key])

    config = _build(PipelineConfig, data, "config")
    for name, (cls, section) in nested.items():
        if not isinstance(section, dict):
            raise ConfigError(f"{name} section must be a mapping")
        setattr(config, name, _build(cls, section, name))

    if seed is not None:
        config.master_seed = seed
    if engine is not None:
        config.engine = engine
    if workers is not None:
        config.worker_count = workers
    if output_root is not None:
        config.output_root = Path(output_root)

    config.validate()
    return config
