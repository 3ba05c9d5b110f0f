"""
Dense linear-algebra kernels
Column-restricted least squares, residuals, projections and correlation lists
shared by every recoverer. Feature indices are 0-based here; the 1-based
labels only appear in files and command-line output.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray

from exceptions import InputError, PreconditionError

logger = logging.getLogger("lire.linalg")

RANK_RTOL = 1e-10  # diag(R) entries below RANK_RTOL * max|diag(R)| are treated as zero
RESIDUAL_ZERO_RTOL = 1e-9  # ||r|| <= RESIDUAL_ZERO_RTOL * max(||y||, 1) counts as a zero residual

Support = NDArray[np.intp]


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """n x d measurement matrix with cached column norms (read-only)"""

    entries: NDArray[np.float64]
    column_norms: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise InputError(f"design matrix must be a non-empty 2-D array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("design matrix has non-finite entries")
        a.setflags(write=False)
        norms = np.linalg.norm(a, axis=0)
        norms.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "column_norms", norms)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def columns(self, s: ArrayLike) -> NDArray[np.float64]:
        return self.entries[:, np.asarray(s, dtype=np.intp)]

    def normalized(self) -> "DesignMatrix":
        """Copy with unit l2 columns; all-zero columns are left untouched"""
        norms = np.where(self.column_norms > 0, self.column_norms, 1.0)
        return DesignMatrix(self.entries / norms)


@dataclass(frozen=True, eq=False)
class LeastSquaresFit:
    """Least-squares fit of y on the columns of one support"""

    support: Support
    coefficients: NDArray[np.float64]
    residual: NDArray[np.float64]
    residual_norm: float
    rank: int


MatrixLike = Union[DesignMatrix, ArrayLike]


def as_design(phi: MatrixLike) -> DesignMatrix:
    return phi if isinstance(phi, DesignMatrix) else DesignMatrix(phi)


def as_measurements(y: ArrayLike, n: int) -> NDArray[np.float64]:
    v = np.asarray(y, dtype=np.float64).ravel()
    if v.size != n:
        raise InputError(f"measurement vector has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise InputError("measurement vector has non-finite entries")
    return v


def as_support(indices: ArrayLike, d: int) -> Support:
    """Validate a support vector: strictly ascending indices in [0, d)"""
    s = np.asarray(indices, dtype=np.intp).ravel()
    if s.size and (s.min() < 0 or s.max() >= d):
        raise InputError(f"support indices must lie in [0, {d}), got {s.tolist()}")
    if np.any(np.diff(s) <= 0):
        raise InputError(f"support must be strictly ascending, got {s.tolist()}")
    return s


def support_from(indices: ArrayLike, d: int) -> Support:
    """Sort an index collection into a support vector; duplicates are rejected"""
    s = np.sort(np.asarray(indices, dtype=np.intp).ravel())
    return as_support(s, d)


def is_valid_support(indices: ArrayLike, d: int) -> bool:
    try:
        as_support(indices, d)
    except InputError:
        return False
    return True


def largest_entries(values: ArrayLike, k: int) -> Support:
    """Indices of the k largest values, ascending; ties go to the lower index"""
    v = np.asarray(values, dtype=np.float64).ravel()
    d = v.size
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    if k >= d:
        return np.arange(d, dtype=np.intp)
    kth = np.partition(v, d - k)[d - k]
    above = np.flatnonzero(v > kth)
    ties = np.flatnonzero(v == kth)[: k - above.size]
    return np.sort(np.concatenate([above, ties])).astype(np.intp)


def _min_norm_solve(R: NDArray[np.float64], rhs: NDArray[np.float64], rank: int) -> NDArray[np.float64]:
    """Minimum-norm w with R[:rank] w = rhs[:rank] (R upper trapezoidal)"""
    k = R.shape[1]
    if rank == 0:
        return np.zeros(k)
    if rank == k:
        return sla.solve_triangular(R[:k, :k], rhs[:k])
    # R_r^T = Q2 R2  =>  w = Q2 R2^{-T} rhs
    Q2, R2 = sla.qr(R[:rank, :].T, mode="economic")
    return Q2 @ sla.solve_triangular(R2, rhs[:rank], trans="T")


def restricted_least_squares(phi: MatrixLike, s: ArrayLike, y: ArrayLike) -> LeastSquaresFit:
    """
    Minimise ||y - phi_s z|| over z with a column-pivoted QR of phi_s.

    Rank-deficient column sets get the minimum-norm minimiser. Supports larger
    than n are accepted and are always rank-deficient.
    """
    phi = as_design(phi)
    y = as_measurements(y, phi.rows)
    s = as_support(s, phi.cols)
    if s.size == 0:
        return LeastSquaresFit(s, np.zeros(0), y.copy(), float(np.linalg.norm(y)), 0)

    A = phi.entries[:, s]
    Q, R, P = sla.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_RTOL * diag[0])) if diag.size and diag[0] > 0 else 0
    w = _min_norm_solve(R, Q.T @ y, rank)
    z = np.empty(s.size)
    z[P] = w
    r = y - A @ z
    return LeastSquaresFit(s, z, r, float(np.linalg.norm(r)), rank)


def residual(phi: MatrixLike, s: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
    """y minus its projection onto span(phi_s); an empty s returns y"""
    return restricted_least_squares(phi, s, y).residual


def is_residual_zero(r: ArrayLike, y: ArrayLike, rtol: float = RESIDUAL_ZERO_RTOL) -> bool:
    return float(np.linalg.norm(r)) <= rtol * max(float(np.linalg.norm(y)), 1.0)


def correlations(phi: MatrixLike, r: ArrayLike) -> NDArray[np.float64]:
    """|phi_i^T r| for every column i"""
    phi = as_design(phi)
    r = as_measurements(r, phi.rows)
    return np.abs(r @ phi.entries)


def top_correlated(phi: MatrixLike, r: ArrayLike, ell: int) -> Support:
    """The ell features most correlated with r, ascending (lowest index wins ties)"""
    phi = as_design(phi)
    r = as_measurements(r, phi.rows)
    if not 1 <= ell <= phi.cols:
        raise PreconditionError(f"list size must lie in [1, {phi.cols}], got {ell}")
    if not np.any(r):
        raise PreconditionError("correlation list requested for an all-zero residual")
    return largest_entries(np.abs(r @ phi.entries), ell)


def projector(phi: MatrixLike, s: ArrayLike) -> NDArray[np.float64]:
    """Orthogonal projector onto span(phi_s) as an explicit n x n matrix"""
    phi = as_design(phi)
    s = as_support(s, phi.cols)
    if s.size == 0:
        return np.zeros((phi.rows, phi.rows))
    Q, R, _ = sla.qr(phi.entries[:, s], mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_RTOL * diag[0])) if diag[0] > 0 else 0
    Qr = Q[:, :rank]
    return Qr @ Qr.T


# --- CSV files: one matrix row per line, no header ---
def read_matrix_csv(path: Union[str, Path]) -> DesignMatrix:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read matrix from {path}: {exc}") from exc
    return DesignMatrix(data)


def write_matrix_csv(path: Union[str, Path], phi: MatrixLike) -> None:
    np.savetxt(path, as_design(phi).entries, delimiter=",", fmt="%.17g")


def read_vector(path: Union[str, Path]) -> NDArray[np.float64]:
    try:
        return np.loadtxt(path, ndmin=1, dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read vector from {path}: {exc}") from exc


def write_vector(path: Union[str, Path], v: ArrayLike) -> None:
    np.savetxt(path, np.asarray(v, dtype=np.float64).ravel(), fmt="%.17g")
