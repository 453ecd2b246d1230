"""Functional sliced inverse regression.

Pipeline: slice the response, estimate slice means (the sample mean for full
paths, a kernel-ridge representer fit for discretely observed paths), form the
between-slice covariance, and solve Gamma_e beta = lambda Gamma beta by
whitening: eta = Gamma^{1/2} beta is an eigenvector of
Gamma^{-1/2} Gamma_e Gamma^{-1/2}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .basis import BasisSpec, FunctionCoef, analyze
from .dataset import FunctionalDataset
from .operators import (
    EMPIRICAL_RANK_TOL,
    POPULATION_RANK_TOL,
    EmptySpectrumError,
    SpectralOperator,
    apply,
    power,
    whitened_conjugate,
)


class SlicingError(ValueError):
    pass


@dataclass(frozen=True)
class SliceSpec:
    mode: Literal["by_category", "equal_count"] = "by_category"
    n_slices: int = 10

    def __post_init__(self):
        if self.mode not in ("by_category", "equal_count"):
            raise ValueError(f"unknown slicing mode {self.mode!r}")
        if self.mode == "equal_count" and self.n_slices < 2:
            raise ValueError("need at least 2 slices")


def slice_partition(y, spec: SliceSpec) -> list[np.ndarray]:
    """Index sets of the slices, ordered by response value."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size == 0:
        raise SlicingError("no samples to slice")
    levels = np.unique(y)
    if levels.size < 2:
        raise SlicingError("fewer than 2 slices: the response takes a single value")
    if spec.mode == "by_category":
        return [np.flatnonzero(y == v) for v in levels]
    if spec.n_slices > y.size:
        raise SlicingError(f"empty slice: {spec.n_slices} slices for {y.size} samples")
    order = np.argsort(y, kind="stable")
    return [np.sort(part) for part in np.array_split(order, spec.n_slices)]


@dataclass(frozen=True, eq=False)
class SliceMeans:
    """Slice weights p_j = n_j / n and mean functions (rows of ``means``)."""

    weights: np.ndarray
    means: np.ndarray
    basis: BasisSpec = field(repr=False)
    alphas: list | None = None
    degenerate: bool = False

    def mean(self, j: int) -> FunctionCoef:
        return FunctionCoef(self.means[j], self.basis)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "alphas": None if self.alphas is None else [np.asarray(a).tolist() for a in self.alphas],
            "degenerate": self.degenerate,
        }


def slice_mean_full_path(coefs, risk_weight: SpectralOperator | None = None) -> FunctionCoef | np.ndarray:
    """Minimiser of sum_i <Lambda (x_i - m), x_i - m> over m.

    For any strictly positive ``risk_weight`` Lambda the minimiser is the
    coordinate-wise mean; the weight is checked only for positivity.
    """
    coefs = np.atleast_2d(np.asarray(coefs, dtype=float))
    if risk_weight is not None and risk_weight.rank < risk_weight.basis.n_basis:
        raise ValueError("risk weight operator must be strictly positive definite")
    return coefs.mean(axis=0)


def slice_mean_representer(values, points, G: SpectralOperator, C: float):
    """Regularised slice mean from paths observed at common points.

    Minimises sum_i sum_k (x_i(t_k) - m(t_k))^2 + C ||m||^2_{H_Gamma} over
    m = sum_k Gamma(., t_k) alpha_k, whose normal equations give
    alpha = (n_j K + C I)^{-1} sum_i x_i(T) with K_{lk} = Gamma(t_l, t_k).

    Returns ``(m, alpha)`` with ``m`` a :class:`FunctionCoef`.
    """
    X = np.atleast_2d(np.asarray(values, dtype=float))
    pts = np.asarray(points, dtype=float).reshape(-1)
    if X.shape[1] != pts.size:
        raise ValueError("values and observation points disagree in length")
    if C < 0:
        raise ValueError("ridge constant C must be nonnegative")
    nj = X.shape[0]
    K = G.kernel(pts)
    K = 0.5 * (K + K.T)
    s = X.sum(axis=0)
    kappa, U = np.linalg.eigh(K)
    denom = nj * kappa + C
    if C == 0 and kappa.min() <= 1e-12 * max(kappa.max(), 1e-300):
        raise np.linalg.LinAlgError("representer system is singular; use C > 0")
    alpha = U @ ((U.T @ s) / denom)
    # Gamma(., t_k) has coefficients Gamma_mat psi(t_k)
    Psi_T = G.basis.evaluate(pts)
    m = G.eigvecs @ (G.eigvals * (G.eigvecs.T @ (Psi_T.T @ alpha)))
    return FunctionCoef(m, G.basis), alpha


def grand_mean_center(data: FunctionalDataset) -> FunctionalDataset:
    return FunctionalDataset(data.y, data.x - data.x.mean(axis=0), data.basis, data.design, data.points)


def empirical_covariance(data: FunctionalDataset, rank_tol: float = POPULATION_RANK_TOL) -> SpectralOperator:
    """(1/n) sum_i x_i (x) x_i of the grand-mean-centred paths, in coefficient space."""
    if len(data) < 2:
        raise ValueError("need at least 2 samples for a covariance")
    coefs = data.coefficients()
    coefs = coefs - coefs.mean(axis=0)
    return SpectralOperator.from_matrix(coefs.T @ coefs / coefs.shape[0], data.basis, rank_tol)


def slice_means(
    data: FunctionalDataset,
    spec: SliceSpec,
    G: SpectralOperator | None = None,
    C: float = 0.0,
) -> SliceMeans:
    """Per-slice weights and mean functions.

    Full-path data use the sample mean; discrete designs use the representer fit
    with covariance ``G`` and ridge constant ``C``.
    """
    parts = slice_partition(data.y, spec)
    n = len(data)
    weights = np.array([p.size / n for p in parts])
    degenerate = any(p.size == 1 for p in parts)
    if degenerate:
        warnings.warn("a slice holds a single sample; its mean interpolates that path", stacklevel=2)
    if data.design == "full_path":
        means = np.array([slice_mean_full_path(data.x[p]) for p in parts])
        return SliceMeans(weights, means, data.basis, None, degenerate)
    if G is None:
        raise ValueError("discrete designs need a covariance operator for the representer fit")
    fits = [slice_mean_representer(data.x[p], data.points, G, C) for p in parts]
    means = np.array([m.coef for m, _ in fits])
    return SliceMeans(weights, means, data.basis, [a for _, a in fits], degenerate)


def between_slice_covariance(sm: SliceMeans, rank_tol: float = POPULATION_RANK_TOL) -> SpectralOperator:
    """sum_j p_j (m_j - mbar) (x) (m_j - mbar)."""
    if not np.isclose(sm.weights.sum(), 1.0, atol=1e-12):
        raise ValueError("slice weights must sum to one")
    mbar = sm.weights @ sm.means
    D = sm.means - mbar
    return SpectralOperator.from_matrix((D.T * sm.weights) @ D, sm.basis, rank_tol)


@dataclass(frozen=True, eq=False)
class FsirResult:
    eigvals: np.ndarray
    betas: list[FunctionCoef]
    etas: list[FunctionCoef]
    rank_tol: float
    ridge_C: float | None = None
    rank_deficient: bool = False

    @property
    def d(self) -> int:
        return len(self.betas)

    def to_dict(self) -> dict:
        return {
            "eigvals": self.eigvals.tolist(),
            "betas": [b.coef.tolist() for b in self.betas],
            "etas": [e.coef.tolist() for e in self.etas],
            "rank_tol": self.rank_tol,
            "ridge_C": self.ridge_C,
            "rank_deficient": self.rank_deficient,
        }

    @classmethod
    def from_dict(cls, doc: dict, basis: BasisSpec) -> "FsirResult":
        return cls(
            np.asarray(doc["eigvals"], dtype=float),
            [FunctionCoef(b, basis) for b in doc["betas"]],
            [FunctionCoef(e, basis) for e in doc["etas"]],
            float(doc["rank_tol"]),
            doc.get("ridge_C"),
            bool(doc.get("rank_deficient", False)),
        )


def _orient(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-10)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def fsir_solve(
    G: SpectralOperator,
    Ge: SpectralOperator,
    d: int = 1,
    rank_tol: float = POPULATION_RANK_TOL,
    ridge_C: float | None = None,
) -> FsirResult:
    """Top-d solutions of Gamma_e beta = lambda Gamma beta.

    When ``d`` exceeds the rank of the whitened operator, fewer directions are
    returned and ``rank_deficient`` is set.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    T = whitened_conjugate(G, Ge, rank_tol)
    inv_half = power(G, -0.5, rank_tol)
    k = min(d, T.rank)
    etas, betas = [], []
    for j in range(k):
        eta = FunctionCoef(_orient(T.eigvecs[:, j]), G.basis)
        etas.append(eta)
        betas.append(apply(inv_half, eta))
    return FsirResult(T.eigvals[:k].copy(), betas, etas, rank_tol, ridge_C, rank_deficient=k < d)


def fit_fsir(
    data: FunctionalDataset,
    slices: SliceSpec,
    d: int = 1,
    rank_tol: float = EMPIRICAL_RANK_TOL,
    ridge_C: float = 1e-3,
    covariance: SpectralOperator | None = None,
) -> tuple[FsirResult, SliceMeans, SpectralOperator]:
    """Empirical FSIR end to end; returns (result, slice means, covariance used)."""
    G = covariance if covariance is not None else empirical_covariance(data)
    if G.rank == 0:
        raise EmptySpectrumError("empirical covariance is zero")
    sm = slice_means(data, slices, G, ridge_C)
    Ge = between_slice_covariance(sm)
    C = ridge_C if data.design == "discrete_points" else None
    return fsir_solve(G, Ge, d, rank_tol, C), sm, G


def gamma_cosine(a: FunctionCoef, b: FunctionCoef, metric: SpectralOperator) -> float:
    """<Gamma a, b> / sqrt(<Gamma a, a> <Gamma b, b>)."""
    ga, gb = apply(metric, a), apply(metric, b)
    return ga.inner(b) / np.sqrt(ga.inner(a) * gb.inner(b))


def subspace_distance(a, b, metric: SpectralOperator) -> float:
    """Frobenius distance between metric-orthogonal projectors onto span(a), span(b).

    Lies in [0, sqrt(2 d)]; zero iff the spans agree in the metric.
    """
    if len(a) != len(b) or not a:
        raise ValueError("need two nonempty families of equal size")
    half = np.sqrt(metric.eigvals)

    def frame(fs):
        M = np.column_stack([f.coef for f in fs])
        W = half[:, None] * (metric.eigvecs.T @ M)
        Q, R = np.linalg.qr(W)
        diag = np.abs(np.diag(R))
        if diag.size < len(fs) or diag.min() <= 1e-12 * max(diag.max(), 1e-300):
            raise ValueError("direction family is rank deficient in the metric")
        return Q

    Qa, Qb = frame(a), frame(b)
    return float(np.linalg.norm(Qa @ Qa.T - Qb @ Qb.T))


def classify(beta: FunctionCoef, x, threshold: float = 0.0):
    """sign(<beta, x> - threshold) with ties sent to +1.

    ``x`` may be a FunctionCoef, grid values, or an (n, N) coefficient array.
    """
    if isinstance(x, FunctionCoef):
        score = beta.inner(x)
    else:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1 and x.size == beta.basis.grid_size and x.size != beta.basis.n_basis:
            x = analyze(x, beta.basis).coef
        score = x @ beta.coef
    out = np.where(np.asarray(score) - threshold >= 0, 1, -1)
    return int(out) if out.ndim == 0 else out
