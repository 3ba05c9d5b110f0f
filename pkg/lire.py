"""
LiRE: list-regression error correction
Leave-one-out replacement of every support slot: drop the feature in the slot,
list the features most correlated with what the rest of the support cannot
explain, regress on the rest plus the list, and write back the list member with
the largest coefficient.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike

import linalg
from ensemble import SeedLike, random_support
from exceptions import ConfigError
from linalg import MatrixLike, Support
from schemas import FillPolicy, LireConfig, LireStep, LireTrace

logger = logging.getLogger("lire.lire")


def default_list_size(m: int, n: int) -> int:
    """m/2 when 1.5m <= n, n - m otherwise, clamped to [1, m]"""
    if not 1 <= m <= n:
        raise ConfigError(f"default list size needs 1 <= m <= n, got m={m}, n={n}")
    ell = m // 2 if 3 * m <= 2 * n else n - m
    return min(max(ell, 1), m)


def resolve_list_size(cfg: LireConfig, n: int) -> int:
    return cfg.list_size if cfg.list_size is not None else default_list_size(cfg.m, n)


def count_errors(s_in: ArrayLike, s_star: ArrayLike) -> int:
    """Number of true features missing from s_in"""
    return len(set(np.asarray(s_star).tolist()) - set(np.asarray(s_in).tolist()))


def pad_support(
    phi: MatrixLike,
    y: ArrayLike,
    s: ArrayLike,
    m: int,
    policy: FillPolicy = FillPolicy.CORRELATION,
) -> Support:
    """Grow s to m features, either by correlation with the running residual or by lowest index"""
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    chosen = [int(i) for i in linalg.support_from(s, phi.cols)]
    if len(chosen) > m:
        raise ConfigError(f"support already has {len(chosen)} > m={m} features")
    if m > phi.cols:
        raise ConfigError(f"cannot pad to {m} features with only d={phi.cols}")

    policy = FillPolicy(policy)
    while len(chosen) < m:
        pick = None
        if policy == FillPolicy.CORRELATION:
            r = linalg.residual(phi, sorted(chosen), y)
            if not linalg.is_residual_zero(r, y):
                corr = linalg.correlations(phi, r)
                corr[chosen] = -np.inf
                pick = int(np.argmax(corr))
        if pick is None:
            taken = set(chosen)
            pick = next(i for i in range(phi.cols) if i not in taken)
        chosen.append(pick)
    return np.sort(np.asarray(chosen, dtype=np.intp))


def _check_config(cfg: LireConfig, n: int, d: int, s_in_size: int) -> int:
    if cfg.m > n:
        raise ConfigError(f"m={cfg.m} exceeds the number of measurements n={n}")
    if cfg.m > d:
        raise ConfigError(f"m={cfg.m} exceeds the number of features d={d}")
    if s_in_size > cfg.m:
        raise ConfigError(f"initial support has {s_in_size} features, more than m={cfg.m}")
    ell = resolve_list_size(cfg, n)
    if ell > cfg.m:
        raise ConfigError(f"list size {ell} exceeds m={cfg.m}")
    return ell


def lire_pass(
    phi: MatrixLike,
    y: ArrayLike,
    s_in: ArrayLike,
    cfg: LireConfig,
) -> tuple[Support, LireTrace]:
    """One pass of LiRE over the m slots of the (padded) initial support"""
    phi = linalg.as_design(phi)
    y = linalg.as_measurements(y, phi.rows)
    s_in = linalg.support_from(s_in, phi.cols)
    ell = _check_config(cfg, phi.rows, phi.cols, s_in.size)

    # slots are visited in the ascending order they have at the start of the pass
    slots = [int(i) for i in pad_support(phi, y, s_in, cfg.m, cfg.fill_policy)]
    trace = LireTrace()

    for i in range(len(slots)):
        removed = slots[i]
        rest = sorted(slots[:i] + slots[i + 1:])
        r = linalg.residual(phi, rest, y)
        r_norm = float(np.linalg.norm(r))
        if linalg.is_residual_zero(r, y, cfg.residual_zero_tol):
            trace.exited_early = True
            logger.debug(f"slot {i + 1}: residual is zero, pass ends")
            break

        candidates = linalg.top_correlated(phi, r, ell)
        rest_set = set(rest)
        fit = linalg.restricted_least_squares(phi, sorted(rest_set.union(candidates.tolist())), y)
        coef = dict(zip(fit.support.tolist(), np.abs(fit.coefficients)))

        # a list member already in the rest of the support cannot be picked twice
        eligible = [j for j in candidates.tolist() if j == removed or j not in rest_set]
        chosen = removed
        if eligible:
            chosen = eligible[int(np.argmax([coef[j] for j in eligible]))]
        slots[i] = chosen

        trace.steps.append(
            LireStep(
                step=i + 1,
                removed=removed,
                candidates=candidates.tolist(),
                chosen=chosen,
                residual_norm=r_norm,
            )
        )
        if chosen != removed:
            logger.debug(f"slot {i + 1}: feature {removed} replaced by {chosen}")

    return np.sort(np.asarray(slots, dtype=np.intp)), trace


def lire_correct(
    phi: MatrixLike,
    y: ArrayLike,
    s_in: ArrayLike,
    cfg: LireConfig,
) -> tuple[Support, list[LireTrace]]:
    """Run up to cfg.passes passes, stopping at the first pass that changes nothing"""
    phi = linalg.as_design(phi)
    support = linalg.support_from(s_in, phi.cols)
    traces: list[LireTrace] = []
    for _ in range(cfg.passes):
        updated, trace = lire_pass(phi, y, support, cfg)
        traces.append(trace)
        unchanged = np.array_equal(updated, support)
        support = updated
        if unchanged:
            break
    logger.debug(f"LiRE finished after {len(traces)} pass(es): {support.tolist()}")
    return support, traces


def lire_standalone(
    phi: MatrixLike,
    y: ArrayLike,
    m: int,
    cfg: LireConfig,
    seed: SeedLike,
) -> Support:
    """LiRE started from a uniformly random support"""
    phi = linalg.as_design(phi)
    if cfg.m != m:
        cfg = cfg.model_copy(update={"m": m})
    if m > phi.rows:
        raise ConfigError(f"m={m} exceeds the number of measurements n={phi.rows}")
    s_in = random_support(phi.cols, m, seed)
    support, _ = lire_correct(phi, y, s_in, cfg)
    return support
