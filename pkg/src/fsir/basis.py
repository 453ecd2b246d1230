"""Truncated orthonormal bases of L2[0, 1] and the quadrature grid they live on.

Every function in the package is carried as a coefficient vector in one of
these bases; grid values only appear at the boundaries (synthesis, analysis,
evaluation at observation points).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

Family = Literal["cosine", "fourier"]
Quadrature = Literal["trapezoid", "gauss"]


def _cosine_design(t: np.ndarray, n_basis: int) -> np.ndarray:
    k = np.arange(n_basis)
    out = np.sqrt(2.0) * np.cos(np.pi * np.outer(t, k))
    out[:, 0] = 1.0
    return out


def _fourier_design(t: np.ndarray, n_basis: int) -> np.ndarray:
    # ordering: 1, sqrt2 cos(2 pi t), sqrt2 sin(2 pi t), sqrt2 cos(4 pi t), ...
    out = np.empty((t.size, n_basis))
    out[:, 0] = 1.0
    for j in range(1, n_basis):
        freq = 2.0 * np.pi * ((j + 1) // 2)
        trig = np.cos if j % 2 == 1 else np.sin
        out[:, j] = np.sqrt(2.0) * trig(freq * t)
    return out


@dataclass(frozen=True)
class BasisSpec:
    """Orthonormal basis {psi_i} of L2[0, 1] truncated at ``n_basis`` terms.

    Parameters
    ----------
    family : {'cosine', 'fourier'}
        ``cosine``: psi_1 = 1, psi_i = sqrt(2) cos((i - 1) pi t).
        ``fourier``: 1 followed by alternating sqrt(2) cos / sin pairs.
    n_basis : int
        Truncation level N.
    grid_size : int
        Number of quadrature nodes M; must satisfy M >= 2N.
    quadrature : {'trapezoid', 'gauss'}
        Composite trapezoid on a uniform grid (default) or Gauss-Legendre.
    """

    family: Family = "cosine"
    n_basis: int = 50
    grid_size: int = 512
    quadrature: Quadrature = "trapezoid"

    def __post_init__(self):
        if self.family not in ("cosine", "fourier"):
            raise ValueError(f"unknown basis family {self.family!r}")
        if self.quadrature not in ("trapezoid", "gauss"):
            raise ValueError(f"unknown quadrature {self.quadrature!r}")
        if int(self.n_basis) < 1:
            raise ValueError("n_basis must be positive")
        if int(self.grid_size) < 2 * int(self.n_basis):
            raise ValueError(
                f"grid_size={self.grid_size} cannot resolve n_basis={self.n_basis}; need grid_size >= 2*n_basis"
            )

    @cached_property
    def _nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.grid_size
        if self.quadrature == "trapezoid":
            t = np.linspace(0.0, 1.0, m)
            w = np.full(m, 1.0 / (m - 1))
            w[[0, -1]] *= 0.5
        else:
            x, w = np.polynomial.legendre.leggauss(m)
            t, w = 0.5 * (x + 1.0), 0.5 * w
        t.setflags(write=False)
        w.setflags(write=False)
        return t, w

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes_weights[0]

    @property
    def weights(self) -> np.ndarray:
        return self._nodes_weights[1]

    def evaluate(self, t) -> np.ndarray:
        """Basis functions at points ``t``; shape (len(t), n_basis)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.family == "cosine":
            return _cosine_design(t, self.n_basis)
        return _fourier_design(t, self.n_basis)

    @cached_property
    def design(self) -> np.ndarray:
        """psi_i(t_k) on the quadrature grid, shape (M, N). Read-only."""
        psi = self.evaluate(self.nodes)
        psi.setflags(write=False)
        return psi

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix sum_k w_k psi_i(t_k) psi_j(t_k)."""
        psi = self.design
        return psi.T @ (self.weights[:, None] * psi)

    def zeros(self) -> "FunctionCoef":
        return FunctionCoef(np.zeros(self.n_basis), self)

    def unit(self, i: int) -> "FunctionCoef":
        """psi_i as a coefficient vector (1-based, matching the usual indexing)."""
        e = np.zeros(self.n_basis)
        e[i - 1] = 1.0
        return FunctionCoef(e, self)


@dataclass(frozen=True, eq=False)
class FunctionCoef:
    """A function sum_i coef[i] psi_i in a shared basis."""

    coef: np.ndarray
    basis: BasisSpec = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=float)
        if c.shape != (self.basis.n_basis,):
            raise ValueError(f"coefficient shape {c.shape} does not match n_basis={self.basis.n_basis}")
        object.__setattr__(self, "coef", c)

    def _check(self, other: "FunctionCoef"):
        if other.basis != self.basis:
            raise ValueError("functions live in different bases")

    def __add__(self, other: "FunctionCoef") -> "FunctionCoef":
        self._check(other)
        return FunctionCoef(self.coef + other.coef, self.basis)

    def __sub__(self, other: "FunctionCoef") -> "FunctionCoef":
        self._check(other)
        return FunctionCoef(self.coef - other.coef, self.basis)

    def __mul__(self, c: float) -> "FunctionCoef":
        return FunctionCoef(float(c) * self.coef, self.basis)

    __rmul__ = __mul__

    def __neg__(self) -> "FunctionCoef":
        return FunctionCoef(-self.coef, self.basis)

    def inner(self, other: "FunctionCoef") -> float:
        """L2 inner product, computed in coefficient space."""
        self._check(other)
        return float(self.coef @ other.coef)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coef))

    def __call__(self, t) -> np.ndarray:
        return self.basis.evaluate(t) @ self.coef


def synthesize(f: FunctionCoef) -> np.ndarray:
    """Grid values sum_i f_i psi_i(t_k)."""
    return f.basis.design @ f.coef


def analyze(values, basis: BasisSpec) -> FunctionCoef:
    """Quadrature projection f_i = sum_k w_k values_k psi_i(t_k)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (basis.grid_size,):
        raise ValueError(f"expected {basis.grid_size} grid values, got shape {values.shape}")
    return FunctionCoef(basis.design.T @ (basis.weights * values), basis)


def analyze_rows(values, basis: BasisSpec) -> np.ndarray:
    """Row-wise `analyze` for an (n, M) array of sampled paths; returns (n, N)."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != basis.grid_size:
        raise ValueError(f"expected (n, {basis.grid_size}) grid values, got shape {values.shape}")
    return (values * basis.weights) @ basis.design
