"""Run configuration: parsing, validation, canonical JSON round-trip.

Only the standard library is imported here so the command line can configure
threading before any numerical module loads.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError

__all__ = ["GeometryConfig", "SourceConfig", "SelectionConfig", "RunConfig", "load_config", "save_config"]


@dataclass(frozen=True)
class GeometryConfig:
    eps: float = 1.0
    R: int = 15
    L: int = 6
    K: int = 14
    n1: int = 20
    n2: int = 19

    def validate(self):
        if self.eps <= 0:
            raise ConfigError("geometry.eps must be positive")
        for name in ("R", "L", "K", "n1", "n2"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"geometry.{name} must be a positive integer")


@dataclass(frozen=True)
class SourceConfig:
    kind: str = "incoming"  # none | incoming | gaussian
    j_in: tuple[float, float] | None = None
    amplitude: tuple[float, float] = (1.0, 0.0)  # complex as (re, im)
    d: float = 1.0
    strength: float = 2.0
    decay: float = 3.0
    center: tuple[float, float] = (-3.5, 0.0)

    def validate(self):
        if self.kind not in ("none", "incoming", "gaussian"):
            raise ConfigError(f"source.kind must be none|incoming|gaussian, got {self.kind!r}")
        if self.kind == "incoming" and self.j_in is None:
            raise ConfigError("source.kind 'incoming' requires source.j_in")

    @property
    def amplitude_complex(self) -> complex:
        return complex(self.amplitude[0], self.amplitude[1])


@dataclass(frozen=True)
class SelectionConfig:
    j1_mesh: int = 201
    c0: float | None = None
    level_tol: float | None = None
    n_bands: int = 6
    max_modes: int | None = None
    j2_rows: str = "auto"  # auto: incoming row for plane-wave runs, else all

    def validate(self):
        if self.j1_mesh < 16:
            raise ConfigError("selection.j1_mesh must be at least 16")
        if self.n_bands < 1:
            raise ConfigError("selection.n_bands must be positive")
        if self.j2_rows not in ("auto", "all"):
            raise ConfigError("selection.j2_rows must be 'auto' or 'all'")


@dataclass(frozen=True)
class RunConfig:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    medium_minus: dict = field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    medium_plus: dict = field(default_factory=lambda: {"kind": "disc_array"})
    omega: float = 0.6283185307179586
    delta: float = 1e-4
    source: SourceConfig = field(default_factory=SourceConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    out_dir: str = "out"

    def validate(self):
        self.geometry.validate()
        self.source.validate()
        self.selection.validate()
        if self.omega <= 0:
            raise ConfigError("omega must be positive")
        if self.delta < 0:
            raise ConfigError("delta must be nonnegative")

    def to_dict(self) -> dict:
        d = {
            "geometry": asdict(self.geometry),
            "medium": {"minus": dict(self.medium_minus), "plus": dict(self.medium_plus)},
            "omega": self.omega,
            "delta": self.delta,
            "source": asdict(self.source),
            "selection": asdict(self.selection),
            "outputs": {"dir": self.out_dir},
        }
        d["source"]["j_in"] = list(self.source.j_in) if self.source.j_in is not None else None
        d["source"]["amplitude"] = list(self.source.amplitude)
        d["source"]["center"] = list(self.source.center)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        try:
            geo = GeometryConfig(**d.get("geometry", {}))
            med = d.get("medium", {})
            src_raw = dict(d.get("source", {}))
            if "j_in" in src_raw and src_raw["j_in"] is not None:
                src_raw["j_in"] = tuple(float(v) for v in src_raw["j_in"])
            amp = src_raw.get("amplitude", (1.0, 0.0))
            if isinstance(amp, (int, float)):
                amp = (float(amp), 0.0)
            src_raw["amplitude"] = tuple(float(v) for v in amp)
            if "center" in src_raw:
                src_raw["center"] = tuple(float(v) for v in src_raw["center"])
            src = SourceConfig(**src_raw)
            sel = SelectionConfig(**d.get("selection", {}))
            cfg = cls(
                geometry=geo,
                medium_minus=med.get("minus", {"kind": "constant", "value": 1.0}),
                medium_plus=med.get("plus", {"kind": "disc_array"}),
                omega=float(d.get("omega", cls.omega)),
                delta=float(d.get("delta", cls.delta)),
                source=src,
                selection=sel,
                out_dir=d.get("outputs", {}).get("dir", "out"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc
        cfg.validate()
        return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


def save_config(config: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")
