"""
End-to-end recovery guarantees
The phase-diagram checks run at desk scale and are marked slow.
"""

import itertools
import statistics
import time

import numpy as np
import pytest
from scipy.linalg import null_space

import bench
from baselines import recover
from ensemble import generate_instance, random_support
from lire import lire_correct, lire_pass
from linalg import DesignMatrix, residual
from schemas import EnsembleConfig, GridSpec, LireConfig
from tests.conftest import planted
from theory import ExactDeltas, theorem1_check


def near_orthonormal(d: int, eps: float, rng) -> DesignMatrix:
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return DesignMatrix(q + eps * rng.normal(size=(d, d)) / np.sqrt(d)).normalized()


def corrupt(s_star, d: int, e: int, rng) -> np.ndarray:
    """Replace e true features with e features outside the true support"""
    keep = rng.choice(s_star, size=len(s_star) - e, replace=False)
    outside = np.setdiff1d(np.arange(d), s_star)
    return np.sort(np.concatenate([keep, rng.choice(outside, size=e, replace=False)]))


def simplex_frame(n: int, rng) -> DesignMatrix:
    """n + 1 unit columns in R^n with pairwise inner products of magnitude 1/n, randomly rotated"""
    basis = null_space(np.ones((1, n + 1)))
    frame = basis.T @ (np.eye(n + 1) - 1.0 / (n + 1))
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    signs = rng.choice([-1.0, 1.0], size=n + 1)
    return DesignMatrix(q @ frame * signs).normalized()


def guarantee_holds(phi: DesignMatrix, m: int, e: int, trial: int, rng) -> tuple[bool, bool]:
    """(theorem 1 conditions hold, one pass contains the true support)"""
    ell = max(e, 1)
    instance = planted(phi.entries, rng.choice(phi.cols, size=m, replace=False), seed=trial)
    s_in = corrupt(instance.s_star, phi.cols, e, rng)
    if not theorem1_check(m, e, ell, ExactDeltas(phi)).satisfied:
        return False, False
    s_out, _ = lire_pass(phi, instance.y, s_in, LireConfig(m=m, list_size=ell))
    return True, set(instance.s_star.tolist()) <= set(s_out.tolist())


def test_one_pass_recovers_whenever_theorem1_holds():
    rng = np.random.default_rng(2024)
    kept = contained = 0
    for trial in range(200):
        d = int(rng.integers(8, 13))
        m = int(rng.integers(2, 5))
        e = int(rng.integers(1, 3))
        holds, ok = guarantee_holds(near_orthonormal(d, eps=0.05, rng=rng), m, e, trial, rng)
        kept += holds
        contained += ok

    assert kept == 200
    assert contained == kept


def test_one_pass_recovers_on_underdetermined_frames():
    # delta_t = (t - 1) / 20 on the 20 x 21 simplex frame: every draw but m = 4, e = 2 is certified
    rng = np.random.default_rng(7)
    expected = kept = contained = 0
    for trial in range(60):
        m = int(rng.integers(2, 5))
        e = int(rng.integers(1, 3))
        holds, ok = guarantee_holds(simplex_frame(20, rng), m, e, trial, rng)
        expected += (m, e) != (4, 2)
        kept += holds
        contained += ok

    assert kept == expected
    assert contained == kept


def test_lire_after_omp_matches_exhaustive_search():
    unique = 0
    matched = 0
    for seed in range(100):
        instance = generate_instance(EnsembleConfig(d=14, n=10, m=2, seed=seed))
        tol = 1e-9 * np.linalg.norm(instance.y)
        exact = [
            pair
            for pair in itertools.combinations(range(instance.d), 2)
            if np.linalg.norm(residual(instance.phi, list(pair), instance.y)) <= tol
        ]
        if len(exact) != 1:
            continue
        unique += 1
        start = recover("omp", instance.phi, instance.y, 2).support
        support, _ = lire_correct(instance.phi, instance.y, start, LireConfig(m=2, passes=5))
        matched += tuple(support.tolist()) == exact[0]

    assert unique > 0
    assert matched >= 0.95 * unique


# --- desk-scale phase diagrams ---
@pytest.fixture(scope="module")
def omp_grid():
    spec = GridSpec(
        d=128,
        m_values=[8, 12, 16],
        n_values=list(range(16, 125, 4)),
        trials=50,
        algorithms=["omp", "bp", "lire5+omp"],
        seed=7,
    )
    return bench.run_grid(spec, jobs=4)


@pytest.mark.slow
def test_smoothed_success_rate_rises_with_measurements(omp_grid):
    # two trials of sampling slack per step
    slack = 2.0 / omp_grid.spec.trials
    for algorithm in omp_grid.algorithms:
        for m in omp_grid.spec.m_values:
            rates = np.array([omp_grid.success_rate(m, n, algorithm) for n in omp_grid.spec.n_values])
            smoothed = np.convolve(rates, np.ones(3) / 3, mode="valid")
            assert np.all(np.diff(smoothed) >= -slack), (algorithm, m, smoothed)


@pytest.mark.slow
def test_lire_never_degrades_omp(omp_grid):
    diff = bench.improvement_grid(omp_grid, "lire5+omp", "omp")
    assert min(diff.values()) >= -0.04
    band = [
        diff[(m, n)]
        for (m, n) in diff
        if 0.0 < omp_grid.success_rate(m, n, "omp") < 1.0
    ]
    assert band
    assert statistics.mean(band) > 0.0


@pytest.mark.slow
def test_lire_needs_fewer_measurements(omp_grid):
    n_omp = bench.measurements_to_perfect(omp_grid, "omp", 12)
    n_lire = bench.measurements_to_perfect(omp_grid, "lire5+omp", 12)
    assert n_omp is not None and n_lire is not None
    assert n_lire <= 0.85 * n_omp


@pytest.mark.slow
def test_lire_after_omp_keeps_up_with_basis_pursuit(omp_grid):
    diff = bench.improvement_grid(omp_grid, "lire5+omp", "bp")
    assert min(diff.values()) >= -0.05
    assert max(diff.values()) > 0.0


@pytest.mark.slow
def test_lire_beats_lasso_under_noise():
    spec = GridSpec(
        d=128,
        m_values=[8, 12],
        n_values=list(range(24, 105, 8)),
        trials=50,
        algorithms=["lasso", "lire1+omp"],
        sigma2=0.001,
        seed=11,
    )
    grid = bench.run_grid(spec, jobs=4)
    band = [
        (grid.success_rate(m, n, "lire1+omp"), grid.success_rate(m, n, "lasso"))
        for m in spec.m_values
        for n in spec.n_values
        if max(grid.success_rate(m, n, "lire1+omp"), grid.success_rate(m, n, "lasso")) > 0.0
    ]
    assert band
    assert statistics.mean(r for r, _ in band) >= statistics.mean(r for _, r in band)


@pytest.mark.slow
def test_pass_cost_is_linear_in_d():
    def median_pass_time(d: int) -> float:
        rng = np.random.default_rng(d)
        instance = planted(rng.normal(0.0, 1.0 / np.sqrt(128), size=(128, d)), rng.choice(d, 16, replace=False))
        s_in = random_support(d, 16, seed=3)
        cfg = LireConfig(m=16)
        times = []
        for _ in range(5):
            start = time.perf_counter()
            lire_pass(instance.phi, instance.y, s_in, cfg)
            times.append(time.perf_counter() - start)
        return statistics.median(times)

    ratio = median_pass_time(4096) / median_pass_time(2048)
    assert 1.5 <= ratio <= 3.5
