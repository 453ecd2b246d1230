"""Run configuration: one JSON document, validated before any computation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .basis import BasisSpec
from .estimate import SliceSpec
from .simulate import ExampleSpec

FORMAT_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BasisConfig:
    family: str = "cosine"
    n_basis: int = 50
    grid_size: int = 512
    quadrature: str = "trapezoid"


@dataclass(frozen=True)
class ExampleConfig:
    kind: str = "binary"
    alpha: float = 2.0
    delta: float = 0.5
    levels: list | None = None


@dataclass(frozen=True)
class SampleConfig:
    n: int = 2000
    seed: int = 0
    n_mc: int = 100_000


@dataclass(frozen=True)
class EstimateConfig:
    # None: by_category for discrete responses, 10 equal-count slices otherwise
    slices: Any = None
    ridge_C: float = 1e-3
    rank_tol: float = 1e-3
    d: int = 1
    design: str = "full_path"
    # None (full grid), a count of equispaced points, or explicit points
    observation_points: Any = None


@dataclass(frozen=True)
class DiagnosticsConfig:
    trials: int = 1000
    linearity_n: int = 100_000


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])


@dataclass(frozen=True)
class RunConfig:
    basis: BasisConfig = field(default_factory=BasisConfig)
    example: ExampleConfig = field(default_factory=ExampleConfig)
    sample: SampleConfig = field(default_factory=SampleConfig)
    estimate: EstimateConfig = field(default_factory=EstimateConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        sections = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(doc) - set(sections)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for f in dataclasses.fields(cls):
            sub = doc.get(f.name, {})
            sub_cls = f.default_factory().__class__
            if not isinstance(sub, dict):
                raise ConfigError(f"section {f.name!r} must be an object")
            names = {g.name for g in dataclasses.fields(sub_cls)}
            bad = set(sub) - names
            if bad:
                raise ConfigError(f"unknown keys in {f.name!r}: {sorted(bad)}")
            kwargs[f.name] = sub_cls(**sub)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def with_seed(self, seed: int) -> "RunConfig":
        cfg = dataclasses.replace(self, sample=dataclasses.replace(self.sample, seed=seed))
        cfg.validate()
        return cfg

    # -- validation and derived objects ---------------------------------------

    def validate(self):
        _int(self.basis.n_basis, "basis.n_basis", 1)
        _int(self.basis.grid_size, "basis.grid_size", 2)
        _int(self.sample.n, "sample.n", 2)
        _int(self.sample.seed, "sample.seed", 0)
        _int(self.sample.n_mc, "sample.n_mc", 1)
        _int(self.estimate.d, "estimate.d", 1)
        _int(self.diagnostics.trials, "diagnostics.trials", 1)
        _int(self.diagnostics.linearity_n, "diagnostics.linearity_n", 3)
        for name, v in (("example.alpha", self.example.alpha), ("example.delta", self.example.delta),
                        ("estimate.ridge_C", self.estimate.ridge_C), ("estimate.rank_tol", self.estimate.rank_tol)):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name} must be a number")
        if not 0 < self.estimate.rank_tol < 1:
            raise ConfigError("estimate.rank_tol must lie in (0, 1)")
        if self.estimate.ridge_C < 0:
            raise ConfigError("estimate.ridge_C must be nonnegative")
        if self.estimate.design not in ("full_path", "discrete_points"):
            raise ConfigError(f"unknown estimate.design {self.estimate.design!r}")
        fmts = self.outputs.formats
        if not isinstance(fmts, list) or not set(fmts) <= {"csv", "json"} or "json" not in fmts:
            raise ConfigError("outputs.formats must be a list drawn from ['csv', 'json'] that includes 'json'")
        if not isinstance(self.outputs.directory, str) or not self.outputs.directory:
            raise ConfigError("outputs.directory must be a nonempty string")
        try:
            self.basis_spec()
            self.example_spec()
            self.slice_spec()
            self.points()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def basis_spec(self) -> BasisSpec:
        b = self.basis
        return BasisSpec(b.family, int(b.n_basis), int(b.grid_size), b.quadrature)

    def example_spec(self) -> ExampleSpec:
        e = self.example
        levels = None if e.levels is None else tuple(float(v) for v in e.levels)
        return ExampleSpec(e.kind, float(e.alpha), float(e.delta), int(self.basis.n_basis), levels)

    def slice_spec(self) -> SliceSpec:
        s = self.estimate.slices
        if s is None:
            if self.example.kind == "continuous":
                return SliceSpec("equal_count", 10)
            return SliceSpec("by_category")
        if s == "by_category":
            return SliceSpec("by_category")
        if isinstance(s, bool) or not isinstance(s, int):
            raise ConfigError("estimate.slices must be null, 'by_category' or an integer >= 2")
        if s < 2:
            raise ConfigError("estimate.slices must be at least 2")
        return SliceSpec("equal_count", s)

    def points(self) -> np.ndarray | None:
        if self.estimate.design == "full_path":
            return None
        p = self.estimate.observation_points
        if p is None:
            return np.array(self.basis_spec().nodes)
        if isinstance(p, int) and not isinstance(p, bool):
            if p < 2:
                raise ConfigError("estimate.observation_points count must be at least 2")
            return np.linspace(0.0, 1.0, p)
        pts = np.asarray(p, dtype=float).reshape(-1)
        if pts.size < 1 or np.any((pts < 0) | (pts > 1)):
            raise ConfigError("observation points must lie in [0, 1]")
        return pts


def _int(v, name, lo):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}")
