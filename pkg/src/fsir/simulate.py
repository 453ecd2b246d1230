"""Gaussian process paths and the three single-index example models.

The examples share one structure: given Y = y,

    X = alpha * y * sum_i i^{-(2+delta)} psi_i + sum_i i^{-1} Z_i psi_i,

with Y binary (+-1), categorical (normalised levels) or continuous (standard
normal). Their within/between covariances, the optimal direction
b_i = i^{-delta} and the Bayes error of the linear rule are known in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.stats import norm

from .basis import BasisSpec, FunctionCoef
from .dataset import FunctionalDataset
from .operators import SpectralOperator, apply

Kind = Literal["binary", "categorical", "continuous"]


def default_levels(k: int = 3) -> tuple[float, ...]:
    """k equispaced levels standardised to mean 0 and variance 1 under uniform weights."""
    if k < 2:
        raise ValueError("need at least two categorical levels")
    v = np.arange(k, dtype=float) - (k - 1) / 2.0
    v /= np.sqrt(np.mean(v**2))
    return tuple(v.tolist())


@dataclass(frozen=True)
class ExampleSpec:
    kind: Kind = "binary"
    alpha: float = 1.0
    delta: float = 0.5
    n_basis: int = 50
    categorical_levels: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("binary", "categorical", "continuous"):
            raise ValueError(f"unknown example kind {self.kind!r}")
        if not self.alpha >= 0:
            raise ValueError("alpha must be nonnegative")
        if not 0 < self.delta <= 0.5:
            raise ValueError("delta must lie in (0, 1/2]")
        if self.n_basis < 1:
            raise ValueError("n_basis must be positive")
        if self.kind == "categorical":
            levels = self.categorical_levels or default_levels()
            lv = np.asarray(levels, dtype=float)
            if lv.size < 2 or abs(lv.mean()) > 1e-12 or abs(np.mean(lv**2) - 1) > 1e-12:
                raise ValueError("categorical levels must have mean 0 and variance 1")
            object.__setattr__(self, "categorical_levels", tuple(float(v) for v in lv))

    @property
    def signal(self) -> np.ndarray:
        """Coefficients i^{-(2+delta)} of the conditional-mean direction."""
        i = np.arange(1, self.n_basis + 1, dtype=float)
        return i ** -(2.0 + self.delta)

    @property
    def s_n(self) -> float:
        """Partial sum sum_{i<=N} i^{-(2+2 delta)}."""
        i = np.arange(1, self.n_basis + 1, dtype=float)
        return float(np.sum(i ** -(2.0 + 2.0 * self.delta)))


def make_rng(seed: int, replicate: int | None = None) -> np.random.Generator:
    """Independent stream for (seed, replicate); no shared generator state."""
    if replicate is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([replicate, seed])


def sample_process(G: SpectralOperator, n: int, seed: int) -> FunctionalDataset:
    """n mean-zero Gaussian paths with covariance G (responses are NaN).

    Scores A_i = xi_i^{1/2} Z_i along the eigenfunctions, returned as basis
    coefficients.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    Z = rng.standard_normal((n, G.rank))
    scores = Z * np.sqrt(G.eigvals)
    return FunctionalDataset(np.full(n, np.nan), scores @ G.eigvecs.T, G.basis)


def draw_y(spec: ExampleSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "binary":
        return np.where(rng.random(n) < 0.5, -1.0, 1.0)
    if spec.kind == "categorical":
        levels = np.asarray(spec.categorical_levels)
        return levels[rng.integers(0, levels.size, size=n)]
    return rng.standard_normal(n)


def gen_example(
    spec: ExampleSpec, n: int, seed: int, basis: BasisSpec | None = None, replicate: int | None = None
) -> FunctionalDataset:
    """Draw n (Y, X) pairs from the example model; X as coefficients in ``basis``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    basis = basis or BasisSpec(n_basis=spec.n_basis, grid_size=max(512, 2 * spec.n_basis))
    if basis.n_basis != spec.n_basis:
        raise ValueError("basis and example disagree on n_basis")
    rng = make_rng(seed, replicate)
    y = draw_y(spec, n, rng)
    Z = rng.standard_normal((n, spec.n_basis))
    i = np.arange(1, spec.n_basis + 1, dtype=float)
    A = spec.alpha * y[:, None] * spec.signal[None, :] + Z / i
    return FunctionalDataset(y, A, basis)


def oracle_kernels(
    spec: ExampleSpec, basis: BasisSpec | None = None
) -> tuple[SpectralOperator, SpectralOperator, SpectralOperator]:
    """Closed-form (Gamma_w, Gamma_e, Gamma) for the example model."""
    basis = basis or BasisSpec(n_basis=spec.n_basis, grid_size=max(512, 2 * spec.n_basis))
    i = np.arange(1, spec.n_basis + 1, dtype=float)
    Gw = SpectralOperator.diagonal(i**-2.0, basis)
    g = spec.alpha * spec.signal
    gnorm = np.linalg.norm(g)
    if gnorm > 0:
        Ge = SpectralOperator(np.array([gnorm**2]), (g / gnorm)[:, None], basis)
    else:
        Ge = SpectralOperator.zero(basis)
    G = SpectralOperator.from_matrix(np.diag(i**-2.0) + np.outer(g, g), basis)
    return Gw, Ge, G


def oracle_beta(spec: ExampleSpec, basis: BasisSpec | None = None) -> FunctionCoef:
    """Optimal direction b_i = i^{-delta} (scale c = 1)."""
    basis = basis or BasisSpec(n_basis=spec.n_basis, grid_size=max(512, 2 * spec.n_basis))
    i = np.arange(1, spec.n_basis + 1, dtype=float)
    return FunctionCoef(i**-spec.delta, basis)


def conditional_mean(spec: ExampleSpec, y: float, basis: BasisSpec | None = None) -> FunctionCoef:
    """m_y = alpha * y * sum_i i^{-(2+delta)} psi_i."""
    basis = basis or BasisSpec(n_basis=spec.n_basis, grid_size=max(512, 2 * spec.n_basis))
    return FunctionCoef(spec.alpha * y * spec.signal, basis)


def quad_form(G: SpectralOperator, beta: FunctionCoef) -> float:
    """<G beta, beta>_{L2}."""
    return apply(G, beta).inner(beta)


def rayleigh_ratio(beta: FunctionCoef, Ge: SpectralOperator, Gw: SpectralOperator) -> float:
    den = quad_form(Gw, beta)
    if den <= 0:
        raise ValueError("<Gw beta, beta> vanishes; ratio undefined")
    return quad_form(Ge, beta) / den


def analytic_error_rate(spec: ExampleSpec) -> float:
    """Misclassification rate of sign(<beta, X>) for the binary example.

    <beta, X> given Y = y is normal with mean alpha*y*S_N and variance S_N,
    so the error is Phi(-alpha * sqrt(S_N)).
    """
    if spec.kind != "binary":
        raise ValueError("analytic error rate is defined for the binary example only")
    return float(norm.cdf(-spec.alpha * np.sqrt(spec.s_n)))
