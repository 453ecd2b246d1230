"""Spectral algebra of symmetric positive semi-definite integral operators.

An operator is stored by its Mercer expansion sum_i xi_i phi_i (x) phi_i with the
eigenfunctions phi_i held as coefficient vectors in a :class:`BasisSpec`.
Powers, RKHS inner products and the whitened conjugate
Gamma^{-1/2} Gamma_e Gamma^{-1/2} are all exact in this representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, FunctionCoef

POPULATION_RANK_TOL = 1e-12
EMPIRICAL_RANK_TOL = 1e-3


class EmptySpectrumError(ValueError):
    """Raised when a negative power or whitening leaves no retained spectrum."""


class NotInRKHSError(ValueError):
    """Raised when a function has significant mass outside the retained eigenspan."""


@dataclass(frozen=True)
class KernelOnGrid:
    """Bivariate kernel K(t_j, t_k) sampled on the quadrature grid of ``basis``."""

    values: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        K = np.asarray(self.values, dtype=float)
        m = self.basis.grid_size
        if K.shape != (m, m):
            raise ValueError(f"kernel must be {m}x{m}, got {K.shape}")
        if not np.array_equal(K, K.T):
            raise ValueError("kernel is not symmetric")
        object.__setattr__(self, "values", K)

    @classmethod
    def from_function(cls, func, basis: BasisSpec) -> "KernelOnGrid":
        """Sample ``func(s, t)`` (vectorised) on the grid; symmetrised exactly."""
        s, t = np.meshgrid(basis.nodes, basis.nodes, indexing="ij")
        K = np.asarray(func(s, t), dtype=float)
        return cls(0.5 * (K + K.T), basis)


@dataclass(frozen=True, eq=False)
class SpectralOperator:
    """Symmetric PSD operator sum_i eigvals[i] phi_i (x) phi_i.

    ``eigvecs`` has shape (N, r); column i holds the coefficients of phi_i.
    Eigenvalues are kept sorted nonincreasing.
    """

    eigvals: np.ndarray
    eigvecs: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        lam = np.asarray(self.eigvals, dtype=float).reshape(-1)
        V = np.asarray(self.eigvecs, dtype=float).reshape(self.basis.n_basis, lam.size)
        if np.any(lam < 0):
            raise ValueError("eigenvalues must be nonnegative")
        if np.any(np.diff(lam) > 0):
            raise ValueError("eigenvalues must be sorted nonincreasing")
        if lam.size and np.max(np.abs(V.T @ V - np.eye(lam.size))) > 1e-8:
            raise ValueError("eigenvectors are not orthonormal")
        object.__setattr__(self, "eigvals", lam)
        object.__setattr__(self, "eigvecs", V)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, basis: BasisSpec) -> "SpectralOperator":
        return cls(np.zeros(0), np.zeros((basis.n_basis, 0)), basis)

    @classmethod
    def diagonal(cls, eigvals, basis: BasisSpec) -> "SpectralOperator":
        """Operator diagonal in the basis itself: psi_i has eigenvalue eigvals[i]."""
        lam = np.asarray(eigvals, dtype=float)
        order = np.argsort(-lam, kind="stable")
        keep = order[lam[order] > 0]
        return cls(lam[keep], np.eye(basis.n_basis)[:, keep], basis)

    @classmethod
    def from_matrix(cls, A, basis: BasisSpec, rank_tol: float = POPULATION_RANK_TOL) -> "SpectralOperator":
        """Diagonalise a symmetric coefficient-space matrix.

        Eigenvalues at or below ``rank_tol * xi_1`` are dropped; an eigenvalue
        below ``-1e-10 * xi_1`` means the input is not PSD and is rejected.
        """
        A = np.asarray(A, dtype=float)
        if A.shape != (basis.n_basis, basis.n_basis):
            raise ValueError(f"matrix must be {basis.n_basis}x{basis.n_basis}")
        A = 0.5 * (A + A.T)
        lam, V = np.linalg.eigh(A)
        lam, V = lam[::-1], V[:, ::-1]
        return cls._truncate(lam, V, basis, rank_tol)

    @classmethod
    def _truncate(cls, lam, V, basis, rank_tol):
        top = lam[0] if lam.size else 0.0
        if top <= 0:
            if lam.size and lam[-1] < -1e-12:
                raise ValueError("kernel is not positive semi-definite")
            return cls.zero(basis)
        if lam[-1] < -1e-10 * top:
            raise ValueError(f"kernel is not positive semi-definite (eigenvalue {lam[-1]:.3e})")
        keep = lam > rank_tol * top
        return cls(lam[keep], V[:, keep], basis)

    # -- views ----------------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.eigvals.size

    def matrix(self) -> np.ndarray:
        """Dense N x N coefficient-space matrix."""
        V = self.eigvecs
        return (V * self.eigvals) @ V.T

    def kernel(self, s=None, t=None) -> np.ndarray:
        """Kernel values Gamma(s_j, t_k); ``s`` defaults to the grid, ``t`` to ``s``."""
        Ps = self.basis.design if s is None else self.basis.evaluate(s)
        Pt = Ps if t is None else self.basis.evaluate(t)
        Fs, Ft = Ps @ self.eigvecs, Pt @ self.eigvecs
        return (Fs * self.eigvals) @ Ft.T

    def kernel_on_grid(self) -> KernelOnGrid:
        K = self.kernel()
        return KernelOnGrid(0.5 * (K + K.T), self.basis)

    def eigenfunction(self, i: int) -> FunctionCoef:
        return FunctionCoef(self.eigvecs[:, i], self.basis)

    def retained(self, rank_tol: float) -> "SpectralOperator":
        if self.rank == 0:
            return self
        keep = self.eigvals > rank_tol * self.eigvals[0]
        return SpectralOperator(self.eigvals[keep], self.eigvecs[:, keep], self.basis)

    def __add__(self, other: "SpectralOperator") -> "SpectralOperator":
        _same_basis(self, other)
        return SpectralOperator.from_matrix(self.matrix() + other.matrix(), self.basis)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "family": self.basis.family,
            "n_basis": self.basis.n_basis,
            "grid_size": self.basis.grid_size,
            "quadrature": self.basis.quadrature,
            "eigvals": self.eigvals.tolist(),
            "eigvecs": self.eigvecs.T.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectralOperator":
        basis = BasisSpec(
            family=doc["family"],
            n_basis=int(doc["n_basis"]),
            grid_size=int(doc.get("grid_size", max(512, 2 * int(doc["n_basis"])))),
            quadrature=doc.get("quadrature", "trapezoid"),
        )
        vecs = np.asarray(doc["eigvecs"], dtype=float).reshape(-1, basis.n_basis)
        return cls(np.asarray(doc["eigvals"], dtype=float), vecs.T, basis)


def _same_basis(a, b):
    if a.basis != b.basis:
        raise ValueError("operands live in different bases")


def mercer_decompose(K: KernelOnGrid, rank_tol: float = POPULATION_RANK_TOL) -> SpectralOperator:
    """Nystrom eigendecomposition of a grid kernel.

    Eigenpairs of W^{1/2} K W^{1/2} (W the quadrature weights) give the
    eigenvalues and the eigenfunctions on the grid, which are then projected onto
    the basis. Kernels with content outside the basis span are re-diagonalised
    in coefficient space so that the returned eigenvectors stay orthonormal.
    """
    basis = K.basis
    sw = np.sqrt(basis.weights)
    B = sw[:, None] * K.values * sw[None, :]
    lam, U = np.linalg.eigh(0.5 * (B + B.T))
    lam, U = lam[::-1], U[:, ::-1]
    top = lam[0]
    if top > 0 and lam[-1] < -1e-10 * top:
        raise ValueError(f"kernel is not positive semi-definite (eigenvalue {lam[-1]:.3e})")
    if top <= 0:
        return SpectralOperator.zero(basis)
    keep = lam > rank_tol * top
    lam, U = lam[keep], U[:, keep]
    # phi(t_k) = u_k / sqrt(w_k); coefficients = Psi^T W phi = Psi^T W^{1/2} u
    C = basis.design.T @ (sw[:, None] * U)
    if lam.size > basis.n_basis or np.max(np.abs(C.T @ C - np.eye(lam.size))) > 1e-8:
        return SpectralOperator.from_matrix((C * lam) @ C.T, basis, rank_tol)
    return SpectralOperator(lam, C, basis)


def trace(G: SpectralOperator) -> float:
    return float(np.sum(G.eigvals))


def trace_from_kernel(K: KernelOnGrid) -> float:
    """Quadrature of the kernel diagonal, sum_k w_k K(t_k, t_k)."""
    return float(K.basis.weights @ np.diag(K.values))


def power(G: SpectralOperator, s: float, rank_tol: float = POPULATION_RANK_TOL) -> SpectralOperator:
    """Fractional power G^s on the retained spectrum.

    For ``s < 0`` eigenvalues at or below ``rank_tol * xi_1`` are excluded
    (pseudo-inverse convention). Nonnegative powers keep the full spectrum.
    """
    if s < 0:
        R = G.retained(rank_tol)
        if R.rank == 0:
            raise EmptySpectrumError("negative power of an operator with empty retained spectrum")
    else:
        R = G
    lam = R.eigvals**s
    order = np.argsort(-lam, kind="stable")
    return SpectralOperator(lam[order], R.eigvecs[:, order], G.basis)


def apply(G: SpectralOperator, f: FunctionCoef) -> FunctionCoef:
    """(G f) = sum_i xi_i <phi_i, f> phi_i."""
    if f.basis != G.basis:
        raise ValueError("operator and function live in different bases")
    V = G.eigvecs
    return FunctionCoef(V @ (G.eigvals * (V.T @ f.coef)), G.basis)


def _eigcoords(f: FunctionCoef, G: SpectralOperator) -> np.ndarray:
    if f.basis != G.basis:
        raise ValueError("operator and function live in different bases")
    c = G.eigvecs.T @ f.coef
    resid = np.linalg.norm(f.coef - G.eigvecs @ c)
    if resid > 1e-8 * np.linalg.norm(f.coef):
        raise NotInRKHSError(
            f"relative mass {resid / np.linalg.norm(f.coef):.2e} outside the retained eigenspan"
        )
    return c


def hgamma_inner(u: FunctionCoef, v: FunctionCoef, G: SpectralOperator) -> float:
    """RKHS inner product <u, v>_{H_Gamma} = sum_i u_i v_i / xi_i."""
    cu, cv = _eigcoords(u, G), _eigcoords(v, G)
    return float(np.sum(cu * cv / G.eigvals))


def hgamma_norm(u: FunctionCoef, G: SpectralOperator) -> float:
    return float(np.sqrt(hgamma_inner(u, u, G)))


def whitened_conjugate(
    G: SpectralOperator, Ge: SpectralOperator, rank_tol: float = POPULATION_RANK_TOL
) -> SpectralOperator:
    """Gamma^{-1/2} Gamma_e Gamma^{-1/2} on the retained span of ``G``."""
    _same_basis(G, Ge)
    R = G.retained(rank_tol)
    if R.rank == 0:
        raise EmptySpectrumError("cannot whiten by an operator with empty retained spectrum")
    # work in R's eigen-coordinates: D^{-1/2} V^T Ge V D^{-1/2}
    P = R.eigvecs.T @ Ge.eigvecs
    S = (P * Ge.eigvals) @ P.T
    d = R.eigvals**-0.5
    S = d[:, None] * S * d[None, :]
    S = 0.5 * (S + S.T)
    lam, U = np.linalg.eigh(S)
    lam, U = lam[::-1], U[:, ::-1]
    # rotate back into coefficient space; columns remain orthonormal
    return SpectralOperator._truncate(lam, R.eigvecs @ U, G.basis, POPULATION_RANK_TOL)


def operator_norm(G: SpectralOperator) -> float:
    return float(G.eigvals[0]) if G.rank else 0.0
