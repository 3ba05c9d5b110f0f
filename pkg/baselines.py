"""
Baseline recoverers
OMP, CoSaMP, basis pursuit (ADMM) and LASSO (coordinate descent with k-fold
cross-validation), the estimators LiRE is composed with or compared against.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray
from sklearn.model_selection import KFold

import linalg
from exceptions import ConfigError, SolverError
from linalg import MatrixLike, Support
from lire import pad_support
from schemas import BaseAlgorithm, FillPolicy, SolverParams

logger = logging.getLogger("lire.baselines")

LASSO_OBJECTIVE = "(1/(2n))*||y - phi x||^2 + lambda*||x||_1"


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Support estimate with coefficients fitted on it"""

    algorithm: str
    support: Support
    coefficients: NDArray[np.float64]
    iterations: int
    final_residual_norm: float
    converged: bool = True
    residual_trace: list[float] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class L1Solution:
    """Full-length coefficient vector from an l1 solver plus its convergence record"""

    x: NDArray[np.float64]
    iterations: int
    converged: bool
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    objective_trace: list[float] = field(default_factory=list)


def _params(params: Optional[SolverParams]) -> SolverParams:
    return params if params is not None else SolverParams()


def _check_sparsity(m: int, n: int, d: int) -> None:
    if m < 1:
        raise ConfigError(f"sparsity m must be >= 1, got {m}")
    if m > n:
        raise ConfigError(f"m={m} exceeds the number of measurements n={n}")
    if m > d:
        raise ConfigError(f"m={m} exceeds the number of features d={d}")


def _is_zero_signal(y: NDArray[np.float64], tol: float) -> bool:
    return float(np.linalg.norm(y)) <= tol


def _zero_result(algorithm: str, m: int, **metadata) -> RecoveryResult:
    """Padded lowest-index support with zero coefficients, for y == 0"""
    return RecoveryResult(
        algorithm=algorithm,
        support=np.arange(m, dtype=np.intp),
        coefficients=np.zeros(m),
        iterations=0,
        final_residual_norm=0.0,
        residual_trace=[0.0],
        metadata=metadata,
    )


def _finish(algorithm: str, phi, y, support, iterations, converged=True, trace=None, **metadata) -> RecoveryResult:
    fit = linalg.restricted_least_squares(phi, support, y)
    return RecoveryResult(
        algorithm=algorithm,
        support=fit.support,
        coefficients=fit.coefficients,
        iterations=iterations,
        final_residual_norm=fit.residual_norm,
        converged=converged,
        residual_trace=trace or [],
        metadata=metadata,
    )


# --- Greedy pursuits ---
def omp(phi: MatrixLike, y: ArrayLike, m: int, params: Optional[SolverParams] = None) -> RecoveryResult:
    """Orthogonal matching pursuit: m greedy picks with a least-squares refit after each"""
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    _check_sparsity(m, phi.rows, phi.cols)
    if _is_zero_signal(y, params.residual_tol):
        return _zero_result("omp", m)

    scale = np.where(phi.column_norms > 0, phi.column_norms, np.inf)
    chosen: list[int] = []
    r = y
    trace = [float(np.linalg.norm(y))]
    for _ in range(m):
        corr = linalg.correlations(phi, r) / scale
        corr[chosen] = -np.inf
        chosen.append(int(np.argmax(corr)))
        r = linalg.residual(phi, sorted(chosen), y)
        trace.append(float(np.linalg.norm(r)))
        if linalg.is_residual_zero(r, y, params.residual_tol):
            break

    iterations = len(chosen)
    support = pad_support(phi, y, chosen, m, FillPolicy.CORRELATION)
    return _finish("omp", phi, y, support, iterations, trace=trace)


def cosamp_iterations(d: int) -> int:
    return max(1, math.ceil(d / 4))


def cosamp(
    phi: MatrixLike,
    y: ArrayLike,
    m: int,
    params: Optional[SolverParams] = None,
    iterations: Optional[int] = None,
) -> RecoveryResult:
    """CoSaMP: merge the top-2m proxy with the support, fit, prune to m; ceil(d/4) rounds by default"""
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    _check_sparsity(m, phi.rows, phi.cols)
    if _is_zero_signal(y, params.residual_tol):
        return _zero_result("cosamp", m)

    rounds = iterations if iterations is not None else cosamp_iterations(phi.cols)
    y_norm = float(np.linalg.norm(y))
    support = np.empty(0, dtype=np.intp)
    r = y
    trace = [y_norm]
    done = 0
    for done in range(1, rounds + 1):
        proxy = linalg.correlations(phi, r)
        merged = np.union1d(linalg.largest_entries(proxy, 2 * m), support)
        fit = linalg.restricted_least_squares(phi, merged, y)
        keep = linalg.largest_entries(np.abs(fit.coefficients), m)
        pruned = merged[keep]
        r = y - phi.columns(pruned) @ fit.coefficients[keep]
        trace.append(float(np.linalg.norm(r)))
        support = pruned
        if trace[-1] <= params.residual_tol * y_norm:
            break

    support = pad_support(phi, y, support, m, FillPolicy.CORRELATION)
    return _finish("cosamp", phi, y, support, done, trace=trace)


# --- Basis pursuit ---
def soft_threshold(v: ArrayLike, tau: float) -> NDArray[np.float64]:
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def basis_pursuit(phi: MatrixLike, y: ArrayLike, params: Optional[SolverParams] = None) -> L1Solution:
    """
    min ||x||_1 subject to phi x = y, by ADMM.

    x-step: projection onto {x : phi x = y} with a cached Cholesky factor of
    phi phi^T; z-step: soft-thresholding at 1/rho; scaled dual update.
    Stops when primal ||x - z|| and dual rho*||z - z_prev|| fall below
    sqrt(d)*tol + tol*scale. The returned x is the feasible iterate.
    """
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    A = phi.entries
    d = phi.cols
    if not np.any(y):
        return L1Solution(np.zeros(d), 0, True)

    try:
        factor = sla.cho_factor(A @ A.T)
    except sla.LinAlgError as exc:
        raise SolverError("phi phi^T is singular; basis pursuit needs full row rank") from exc

    def project(v: NDArray[np.float64]) -> NDArray[np.float64]:
        return v - A.T @ sla.cho_solve(factor, A @ v - y)

    rho = params.admm_rho
    tol = params.tolerance
    x = project(np.zeros(d))
    z = x.copy()
    u = np.zeros(d)
    primal = dual = np.inf
    for it in range(1, params.max_iterations + 1):
        x = project(z - u)
        z_prev = z
        z = soft_threshold(x + u, 1.0 / rho)
        u = u + x - z
        primal = float(np.linalg.norm(x - z))
        dual = float(rho * np.linalg.norm(z - z_prev))
        eps_primal = math.sqrt(d) * tol + tol * max(np.linalg.norm(x), np.linalg.norm(z))
        eps_dual = math.sqrt(d) * tol + tol * rho * np.linalg.norm(u)
        if primal <= eps_primal and dual <= eps_dual:
            return L1Solution(x, it, True, primal, dual)

    logger.warning(f"⚠️ Basis pursuit did not converge in {params.max_iterations} iterations (primal={primal:.2e}, dual={dual:.2e})")
    return L1Solution(x, params.max_iterations, False, primal, dual)


def bp_support(phi: MatrixLike, y: ArrayLike, m: int, params: Optional[SolverParams] = None) -> Support:
    """Indices of the m largest basis-pursuit coefficients"""
    phi = linalg.as_design(phi)
    _check_sparsity(m, phi.rows, phi.cols)
    return linalg.largest_entries(np.abs(basis_pursuit(phi, y, params).x), m)


# --- LASSO ---
def lasso_objective(phi: MatrixLike, y: ArrayLike, x: ArrayLike, lam: float) -> float:
    phi = linalg.as_design(phi)
    r = np.asarray(y) - phi.entries @ np.asarray(x)
    return float(r @ r / (2 * phi.rows) + lam * np.abs(x).sum())


def _lasso_cd(
    gram: NDArray[np.float64],
    corr: NDArray[np.float64],
    lam: float,
    x0: NDArray[np.float64],
    params: SolverParams,
    objective=None,
) -> tuple[NDArray[np.float64], int, bool, list[float]]:
    """Cyclic coordinate descent on the covariance form (gram = phi^T phi / n, corr = phi^T y / n)"""
    x = x0.copy()
    diag = np.diag(gram)
    trace = [objective(x)] if objective else []
    for sweep in range(1, params.max_iterations + 1):
        max_step = 0.0
        for j in range(x.size):
            if diag[j] == 0.0:
                continue
            old = x[j]
            rho_j = corr[j] - gram[j] @ x + diag[j] * old
            new = math.copysign(max(abs(rho_j) - lam, 0.0), rho_j) / diag[j]
            if new != old:
                x[j] = new
                max_step = max(max_step, abs(new - old))
        if objective:
            trace.append(objective(x))
        if max_step <= params.tolerance:
            return x, sweep, True, trace
    return x, params.max_iterations, False, trace


def lasso(
    phi: MatrixLike,
    y: ArrayLike,
    lam: float,
    params: Optional[SolverParams] = None,
    x0: Optional[ArrayLike] = None,
    record_objective: bool = False,
) -> L1Solution:
    """Minimise (1/(2n))||y - phi x||^2 + lam ||x||_1 by cyclic coordinate descent"""
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    if lam < 0:
        raise ConfigError(f"lasso penalty must be >= 0, got {lam}")
    A = phi.entries
    n = phi.rows
    start = np.zeros(phi.cols) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    objective = (lambda v: lasso_objective(phi, y, v, lam)) if record_objective else None
    x, sweeps, converged, trace = _lasso_cd(A.T @ A / n, A.T @ y / n, lam, start, params, objective)
    if not converged:
        logger.warning(f"⚠️ LASSO did not converge in {params.max_iterations} sweeps (lambda={lam:.3e})")
    return L1Solution(x, sweeps, converged, objective_trace=trace)


def lambda_grid(phi: MatrixLike, y: ArrayLike, params: Optional[SolverParams] = None) -> NDArray[np.float64]:
    """Log-spaced penalties from ||phi^T y||_inf / n down over cv_grid_decades decades"""
    phi = linalg.as_design(phi)
    params = _params(params)
    lam_max = float(np.max(np.abs(np.asarray(y) @ phi.entries))) / phi.rows
    if lam_max == 0.0:
        return np.zeros(1)
    return np.logspace(np.log10(lam_max), np.log10(lam_max) - params.cv_grid_decades, params.cv_grid_size)


def _path_errors(A_train, y_train, A_test, y_test, lambdas, params) -> NDArray[np.float64]:
    """Held-out mean squared error along a warm-started descending path"""
    n = A_train.shape[0]
    gram = A_train.T @ A_train / n
    corr = A_train.T @ y_train / n
    x = np.zeros(A_train.shape[1])
    errors = np.empty(lambdas.size)
    for k, lam in enumerate(lambdas):
        x, _, _, _ = _lasso_cd(gram, corr, lam, x, params)
        resid = y_test - A_test @ x
        errors[k] = float(resid @ resid) / max(y_test.size, 1)
    return errors


def select_lambda(
    phi: MatrixLike,
    y: ArrayLike,
    folds: int = 10,
    params: Optional[SolverParams] = None,
) -> tuple[float, NDArray[np.float64], NDArray[np.float64]]:
    """k-fold cross-validated penalty: (lambda, grid, mean held-out error per grid point)"""
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    if folds < 2 or phi.rows < folds:
        raise ConfigError(f"cross-validation needs 2 <= folds <= n, got folds={folds}, n={phi.rows}")
    lambdas = lambda_grid(phi, y, params)
    A = phi.entries
    # contiguous folds: the split depends on n only
    splits = KFold(n_splits=folds).split(A)
    errors = np.mean(
        [_path_errors(A[train], y[train], A[test], y[test], lambdas, params) for train, test in splits],
        axis=0,
    )
    best = int(np.argmin(errors))  # first minimum, i.e. the largest penalty among ties
    return float(lambdas[best]), lambdas, errors


def lasso_cv(
    phi: MatrixLike,
    y: ArrayLike,
    m: int,
    folds: int = 10,
    params: Optional[SolverParams] = None,
) -> Support:
    """Support of the m largest LASSO coefficients at the cross-validated penalty"""
    return _lasso_recovery(phi, y, m, folds, params).support


def _lasso_recovery(phi, y, m, folds, params) -> RecoveryResult:
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    _check_sparsity(m, phi.rows, phi.cols)
    if _is_zero_signal(y, params.residual_tol):
        return _zero_result("lasso", m, objective=LASSO_OBJECTIVE)
    if params.lasso_lambda is not None:
        lam, grid_meta = params.lasso_lambda, {}
    else:
        lam, lambdas, errors = select_lambda(phi, y, folds, params)
        grid_meta = {
            "cv_folds": folds,
            "lambda_grid": [float(lambdas[0]), float(lambdas[-1]), int(lambdas.size)],
        }
    sol = lasso(phi, y, lam, params)
    support = linalg.largest_entries(np.abs(sol.x), m)
    return RecoveryResult(
        algorithm="lasso",
        support=support,
        coefficients=sol.x[support],
        iterations=sol.iterations,
        final_residual_norm=float(np.linalg.norm(y - phi.columns(support) @ sol.x[support])),
        converged=sol.converged,
        metadata={"lambda": lam, "objective": LASSO_OBJECTIVE, **grid_meta},
    )


def _bp_recovery(phi, y, m, params) -> RecoveryResult:
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    params = _params(params)
    _check_sparsity(m, phi.rows, phi.cols)
    if _is_zero_signal(y, params.residual_tol):
        return _zero_result("bp", m)
    sol = basis_pursuit(phi, y, params)
    support = linalg.largest_entries(np.abs(sol.x), m)
    return RecoveryResult(
        algorithm="bp",
        support=support,
        coefficients=sol.x[support],
        iterations=sol.iterations,
        final_residual_norm=float(np.linalg.norm(y - phi.columns(support) @ sol.x[support])),
        converged=sol.converged,
        metadata={"admm_rho": params.admm_rho, "tolerance": params.tolerance, "primal_residual": sol.primal_residual},
    )


def recover(
    algorithm: BaseAlgorithm | str,
    phi: MatrixLike,
    y: ArrayLike,
    m: int,
    params: Optional[SolverParams] = None,
    folds: int = 10,
) -> RecoveryResult:
    """Dispatch to one of the four baseline recoverers"""
    try:
        algorithm = BaseAlgorithm(algorithm)
    except ValueError as exc:
        raise ConfigError(f"unknown algorithm: {algorithm}") from exc
    if algorithm == BaseAlgorithm.OMP:
        return omp(phi, y, m, params)
    if algorithm == BaseAlgorithm.COSAMP:
        return cosamp(phi, y, m, params)
    if algorithm == BaseAlgorithm.BP:
        return _bp_recovery(phi, y, m, params)
    if algorithm == BaseAlgorithm.LASSO:
        return _lasso_recovery(phi, y, m, folds, params)
    raise ConfigError(f"{algorithm.value} is not a baseline recoverer")
