"""
Restricted isometry constants and recovery-guarantee evaluators

Exact constants come from a brute-force scan of every size-t column subset
(symmetric eigensolve of each Gram block, subsets visited in colex order).
The condition checkers take a delta provider, i.e. anything callable as
provider(order) -> delta, so the same check runs on exact constants,
Monte-Carlo lower bounds or hand-entered values.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from itertools import combinations, islice
from typing import Callable, Iterator, Mapping, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

import linalg
from ensemble import SeedLike
from exceptions import ConfigError, DomainError, SolverError
from linalg import MatrixLike
from schemas import RipMethod, RipReport, TheoremCheck, TheoremConditions

logger = logging.getLogger("lire.theory")

MAX_EXACT_SUBSETS = 2_000_000
_CHUNK = 4096

DeltaProvider = Callable[[int], float]


# --- RIP constants ---
def _colex_block(d: int, t: int, top: int) -> Iterator[tuple[int, ...]]:
    """All size-t subsets of range(d) whose largest element is top, in colex order"""
    for rest in combinations(range(top), t - 1):
        yield rest + (top,)


def _deviation(gram: NDArray[np.float64], subsets: NDArray[np.intp]) -> NDArray[np.float64]:
    blocks = gram[subsets[:, :, None], subsets[:, None, :]]
    eig = np.linalg.eigvalsh(blocks)
    return np.maximum(eig[:, -1] - 1.0, 1.0 - eig[:, 0])


def _scan(gram: NDArray[np.float64], t: int, tops: list[int]) -> tuple[float, tuple[int, ...], int]:
    """Largest Gram deviation over the colex blocks in tops; first maximiser wins"""
    d = gram.shape[0]
    best, best_subset, count = -np.inf, (), 0
    for top in tops:
        gen = _colex_block(d, t, top)
        while True:
            chunk = list(islice(gen, _CHUNK))
            if not chunk:
                break
            subsets = np.asarray(chunk, dtype=np.intp)
            dev = _deviation(gram, subsets)
            k = int(np.argmax(dev))
            if dev[k] > best:
                best, best_subset = float(dev[k]), chunk[k]
            count += len(chunk)
    return best, best_subset, count


def _scan_worker(args):
    return _scan(*args)


def rip_constant(phi: MatrixLike, t: int, jobs: int = 1) -> RipReport:
    """Exact order-t RIP constant by enumerating all C(d, t) column subsets"""
    phi = linalg.as_design(phi)
    d = phi.cols
    if not 1 <= t <= d:
        raise ConfigError(f"RIP order must lie in [1, {d}], got {t}")
    total = math.comb(d, t)
    if total > MAX_EXACT_SUBSETS:
        raise SolverError(
            f"exact RIP scan needs C({d},{t}) = {total} subsets (limit {MAX_EXACT_SUBSETS}); "
            "use the Monte-Carlo estimate instead"
        )

    gram = phi.entries.T @ phi.entries
    tops = list(range(t - 1, d))
    if jobs > 1 and len(tops) > 1:
        parts = [tops[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_scan_worker, [(gram, t, part) for part in parts]))
        # tie-break toward the subset that comes first in colex order
        delta = max(r[0] for r in results)
        subset = min((r[1] for r in results if r[0] == delta), key=lambda s: s[::-1])
        count = sum(r[2] for r in results)
    else:
        delta, subset, count = _scan(gram, t, tops)

    logger.debug(f"🧮 delta_{t} = {delta:.6g} over {count} subsets")
    return RipReport(
        order=t,
        delta=max(delta, 0.0),
        extremal_support=list(subset),
        method=RipMethod.EXACT_BRUTEFORCE,
        subsets_examined=count,
    )


def rip_monte_carlo(phi: MatrixLike, t: int, samples: int, seed: SeedLike) -> RipReport:
    """Lower bound on delta_t from uniformly sampled supports"""
    phi = linalg.as_design(phi)
    d = phi.cols
    if samples < 1:
        raise ConfigError("Monte-Carlo RIP estimate needs at least one sample")
    if not 1 <= t <= d:
        raise ConfigError(f"RIP order must lie in [1, {d}], got {t}")
    if samples >= math.comb(d, t):
        exact = rip_constant(phi, t)
        return exact.model_copy(update={"method": RipMethod.MONTE_CARLO})

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(int(seed))
    gram = phi.entries.T @ phi.entries
    best, best_subset, done = -np.inf, [], 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        subsets = np.sort(np.argsort(rng.random((k, d)), axis=1)[:, :t], axis=1)
        dev = _deviation(gram, subsets)
        i = int(np.argmax(dev))
        if dev[i] > best:
            best, best_subset = float(dev[i]), subsets[i].tolist()
        done += k
    return RipReport(
        order=t,
        delta=max(best, 0.0),
        extremal_support=best_subset,
        method=RipMethod.MONTE_CARLO,
        subsets_examined=samples,
    )


def mutual_coherence(phi: MatrixLike) -> float:
    """Largest |<phi_i, phi_j>| / (||phi_i|| ||phi_j||) over distinct columns"""
    phi = linalg.as_design(phi)
    if phi.cols < 2:
        return 0.0
    unit = phi.normalized().entries
    gram = np.abs(unit.T @ unit)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


# --- Delta providers ---
class ExactDeltas:
    """delta_t by brute force, cached per order; orders beyond d reuse delta_d"""

    optimistic = False

    def __init__(self, phi: MatrixLike, jobs: int = 1):
        self.phi = linalg.as_design(phi)
        self.jobs = jobs
        self._cached = lru_cache(maxsize=None)(self._compute)

    def _compute(self, order: int) -> float:
        return rip_constant(self.phi, order, self.jobs).delta

    def __call__(self, order: int) -> float:
        if order <= 0:
            return 0.0
        return self._cached(min(order, self.phi.cols))


class MonteCarloDeltas(ExactDeltas):
    """Sampled lower bounds; conditions evaluated on them are optimistic"""

    optimistic = True

    def __init__(self, phi: MatrixLike, samples: int, seed: int):
        super().__init__(phi)
        self.samples = samples
        self.seed = seed

    def _compute(self, order: int) -> float:
        return rip_monte_carlo(self.phi, order, self.samples, self.seed).delta


class FixedDelta:
    """Same delta at every order"""

    optimistic = False

    def __init__(self, delta: float):
        if delta < 0:
            raise ConfigError(f"delta must be >= 0, got {delta}")
        self.delta = float(delta)

    def __call__(self, order: int) -> float:
        return self.delta


class TableDeltas:
    """Hand-entered deltas per order, with an optional fallback"""

    optimistic = False

    def __init__(self, table: Mapping[int, float], default: Optional[float] = None):
        self.table = {int(k): float(v) for k, v in table.items()}
        self.default = default

    def __call__(self, order: int) -> float:
        if order in self.table:
            return self.table[order]
        if self.default is None:
            raise ConfigError(f"no delta supplied for order {order}")
        return float(self.default)


# --- Guarantee evaluators ---
def eta(delta_t: float) -> float:
    """sqrt(2) d (1 - d^2) / ((1 - d - d^2)(1 - 2d)) for d = delta_t"""
    a = 1.0 - delta_t - delta_t**2
    b = 1.0 - 2.0 * delta_t
    if a <= 0 or b <= 0:
        raise DomainError(f"eta is undefined for delta_t={delta_t}: needs 1 - d - d^2 > 0 and 1 - 2d > 0")
    return math.sqrt(2.0) * delta_t * (1.0 - delta_t**2) / (a * b)


def _error_bound(delta: float) -> float:
    """Largest admissible sqrt(e + 1) at delta_t (infinite at delta = 0, zero when undefined)"""
    a = 1.0 - delta - delta**2
    b = 1.0 - 2.0 * delta
    if a <= 0 or b <= 0:
        return 0.0
    if delta == 0:
        return math.inf
    return math.sqrt(2.0) * a * b / (delta * (1.0 + delta) * (1.0 + 2.0 * delta - delta**2))


def theorem1_check(m: int, e: int, ell: int, delta_provider: DeltaProvider) -> TheoremCheck:
    """Evaluate the four sufficient conditions for one LiRE pass to recover every missed feature"""
    if not 1 <= ell <= m:
        raise ConfigError(f"need 1 <= ell <= m, got ell={ell}, m={m}")
    if not 0 <= e <= m:
        raise ConfigError(f"need 0 <= e <= m, got e={e}, m={m}")

    t = max(m + e, ell + e + 1)
    delta_t = float(delta_provider(t))
    delta_lm1 = float(delta_provider(ell + m - 1))
    root_e = math.sqrt(e + 1)

    error_rhs = _error_bound(delta_t)
    try:
        eta_t: Optional[float] = eta(delta_t)
    except DomainError:
        eta_t = None

    list_rhs: Optional[float] = None
    lower_ok = False
    if eta_t is not None:
        denom = 1.0 - delta_t - delta_t * eta_t * root_e
        # the bound is only meaningful for a positive denominator
        if denom > 0:
            numer = (1.0 - delta_t**2 + delta_t) * eta_t * root_e - 1.0 + delta_t
            list_rhs = numer / denom * root_e
            lower_ok = math.sqrt(ell) > list_rhs

    conditions = TheoremConditions(
        list_size_rule=ell <= max(e, 1),
        error_bound=root_e <= error_rhs,
        list_lower_bound=lower_ok,
        list_upper_bound=delta_lm1 < 0.5,
    )
    return TheoremCheck(
        m=m,
        e=e,
        ell=ell,
        t=t,
        delta_t=delta_t,
        eta_t=eta_t,
        delta_lm1=delta_lm1,
        error_bound_rhs=None if math.isinf(error_rhs) else error_rhs,
        list_lower_bound_rhs=list_rhs,
        conditions=conditions,
        satisfied=all(conditions.model_dump().values()),
    )


def corollary1_bound(delta: float) -> float:
    """Right-hand side for e + 1 at delta = delta_{m+e+2} (list size max{e, 1})"""
    a = 1.0 - delta - delta**2
    b = 1.0 - 2.0 * delta
    if a <= 0 or b <= 0:
        return 0.0
    if delta == 0:
        return math.inf
    return (math.sqrt(2.0) * a * b / (delta * (1.0 + 2.0 * delta - delta**2) * (1.0 + delta))) ** 2


def corollary1_check(m: int, e: int, delta_provider: DeltaProvider) -> bool:
    """LiRE with list size max{e, 1} corrects exactly e errors"""
    if not 0 <= e <= m:
        raise ConfigError(f"need 0 <= e <= m, got e={e}, m={m}")
    if delta_provider(m + e) >= 0.5:
        return False
    return e + 1 < corollary1_bound(float(delta_provider(m + e + 2)))


def corollary2_bound(delta: float) -> float:
    """Right-hand side for e_bar + 1 at delta = delta_{m+e_bar+1} (list size 1)"""
    a = 1.0 - delta - delta**2
    b = 1.0 - 2.0 * delta
    if a <= 0 or b <= 0:
        return 0.0
    if delta == 0:
        return math.inf
    return (a * b / (delta * math.sqrt(2.0) * (1.0 + delta - delta**2) * (1.0 + delta))) ** 2


def corollary2_check(m: int, e_bar: int, delta_provider: DeltaProvider) -> bool:
    """LiRE with list size 1 corrects any number of errors up to e_bar"""
    if e_bar < 0:
        raise ConfigError(f"e_bar must be >= 0, got {e_bar}")
    if delta_provider(m) >= 0.5:
        return False
    return e_bar + 1 <= corollary2_bound(float(delta_provider(m + e_bar + 1)))


def max_correctable_errors(m: int, delta_provider: DeltaProvider) -> Optional[int]:
    """Largest e_bar <= m admitted by corollary2_check, None if not even e_bar = 0 is"""
    best = None
    for e_bar in range(m + 1):
        if not corollary2_check(m, e_bar, delta_provider):
            break
        best = e_bar
    return best


def random_init_condition(m: int, delta_provider: DeltaProvider) -> bool:
    """Guarantee for LiRE from a random support, which may miss all m features"""
    return corollary2_check(m, m, delta_provider)


def omp_recovery_condition(m: int, delta_provider: DeltaProvider) -> bool:
    """delta_{m+1} < 1/sqrt(m+1): OMP recovers every m-sparse signal in m steps"""
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    return float(delta_provider(m + 1)) < 1.0 / math.sqrt(m + 1)


# --- Block regression identity ---
def lemma3_identity_check(phi: MatrixLike, s1: ArrayLike, s2: ArrayLike, y: ArrayLike) -> float:
    """
    Compare the s1 block of the joint least-squares fit on s1 + s2 with the
    Schur-complement formula (phi_1^T (I - P_2) phi_1)^{-1} phi_1^T y_perp2.
    Returns the largest absolute coefficient difference.
    """
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    s1 = linalg.support_from(s1, phi.cols)
    s2 = linalg.support_from(s2, phi.cols)
    if s1.size == 0:
        raise ConfigError("s1 must not be empty")
    if np.intersect1d(s1, s2).size:
        raise ConfigError("s1 and s2 must be disjoint")

    joint = linalg.restricted_least_squares(phi, np.union1d(s1, s2), y)
    block = joint.coefficients[np.searchsorted(joint.support, s1)]

    A1 = phi.columns(s1)
    if s2.size:
        A2 = phi.columns(s2)
        try:
            P2 = A2 @ np.linalg.solve(A2.T @ A2, A2.T)
        except np.linalg.LinAlgError as exc:
            raise SolverError("phi_s2^T phi_s2 is singular") from exc
    else:
        P2 = np.zeros((phi.rows, phi.rows))
    complement = np.eye(phi.rows) - P2
    inner = A1.T @ complement @ A1
    try:
        schur = np.linalg.solve(inner, A1.T @ (complement @ y))
    except np.linalg.LinAlgError as exc:
        raise SolverError("Schur complement is singular") from exc
    return float(np.max(np.abs(block - schur)))
