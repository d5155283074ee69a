"""JSON experiment configuration (schema version 1).

Example::

    {
      "version": 1,
      "detector": {"kind": "kpca", "kernel": {"kind": "polynomial", "c": 1, "degree": 2}},
      "signal": {"kind": "sinusoid", "freqs": [0.1, 0.2, 0.3]},
      "d": 128, "stride": 1, "length": 500,
      "snr_db": [-20, -16, -12],
      "trials": 300, "target_pf": 0.1, "base_seed": 1,
      "output": "kpca_sweep.csv"
    }

Unknown keys are rejected at every level. Relative file paths resolve
against the directory holding the config file.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .detectors import RANK_TOL, DetectorSpec
from .harness import Ar1Source, ExperimentConfig, FileSource, SinusoidSource
from .kernels import KernelSpec


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class KernelModel(_Strict):
    kind: Literal["linear", "polynomial", "gaussian_rbf", "rbf", "heavy_tailed_rbf", "tanh_nn"]
    c: Optional[float] = None
    degree: Optional[int] = None
    sigma: Optional[float] = None
    gamma: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None

    def to_spec(self) -> KernelSpec:
        params = self.model_dump(exclude_none=True)
        return KernelSpec.from_dict(params)

    @model_validator(mode="after")
    def _valid_for_kind(self):
        try:
            self.to_spec()
        except ValueError as exc:
            raise ValueError(str(exc)) from None
        return self


class DetectorModel(_Strict):
    kind: Literal["pca", "kpca", "glrt", "kglrt", "ec", "mme"]
    kernel: Optional[KernelModel] = None
    rank_tol: float = Field(RANK_TOL, gt=0)
    centering: bool = False

    def to_spec(self) -> DetectorSpec:
        kernel = self.kernel.to_spec() if self.kernel else None
        return DetectorSpec(self.kind, kernel, self.rank_tol, self.centering)

    @model_validator(mode="after")
    def _kernel_fits(self):
        if self.kernel is not None and self.kind not in ("kpca", "kglrt"):
            raise ValueError(f"detector {self.kind!r} takes no kernel")
        self.to_spec()
        return self


class SinusoidModel(_Strict):
    kind: Literal["sinusoid"]
    freqs: list[float] = Field(default_factory=lambda: [0.1, 0.2, 0.3], min_length=1)
    phases: Optional[list[float]] = None

    def to_source(self, base: Path):
        return SinusoidSource(tuple(self.freqs), tuple(self.phases) if self.phases is not None else None)


class Ar1Model(_Strict):
    kind: Literal["ar1"]
    coeff: float = Field(0.95, gt=-1, lt=1)
    seed: int = 0

    def to_source(self, base: Path):
        return Ar1Source(self.coeff, self.seed)


class FileModel(_Strict):
    kind: Literal["file"]
    path: str
    format: Literal["csv", "f64le"] = "csv"

    def to_source(self, base: Path):
        path = Path(self.path)
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise ConfigError(f"signal.path: file {str(path)!r} does not exist")
        return FileSource(str(path), self.format)


class CliConfig(_Strict):
    version: Literal[1]
    detector: DetectorModel
    signal: Annotated[Union[SinusoidModel, Ar1Model, FileModel], Field(discriminator="kind")] = Field(
        default_factory=lambda: SinusoidModel(kind="sinusoid"))
    d: int = Field(128, ge=1)
    stride: int = Field(1, ge=1)
    length: int = Field(500, ge=1)
    snr_db: list[float] = Field(default_factory=lambda: [-10.0], min_length=1)
    trials: int = Field(1000, ge=1)
    target_pf: float = Field(0.1, gt=0, lt=1)
    base_seed: int = Field(0, ge=0, lt=2**64)
    segment_len: Optional[int] = Field(None, ge=1)
    output: Optional[str] = None

    @field_validator("length")
    @classmethod
    def _length_holds_a_frame(cls, v, info):
        d = info.data.get("d")
        if d is not None and v < d:
            raise ValueError(f"length {v} is shorter than frame dimension d={d}")
        return v


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str, base: Path | str = ".") -> tuple[CliConfig, object]:
    """Validate a JSON document; returns the model and its resolved signal source."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    try:
        cfg = CliConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    source = cfg.signal.to_source(Path(base))
    return cfg, source


def load_config(path: str | os.PathLike) -> tuple[CliConfig, object]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from None
    return parse_config(text, path.parent)


def experiment(cfg: CliConfig, source, threads: int = 1) -> ExperimentConfig:
    return ExperimentConfig(
        detector=cfg.detector.to_spec(),
        source=source,
        d=cfg.d,
        stride=cfg.stride,
        length=cfg.length,
        snr_db=tuple(cfg.snr_db),
        trials=cfg.trials,
        target_pf=cfg.target_pf,
        base_seed=cfg.base_seed,
        threads=threads,
    )
