import itertools
import math

import numpy as np
import pytest
from scipy.linalg import hadamard

import baselines
import theory
from ensemble import orthonormal_design
from exceptions import ConfigError, DomainError, SolverError
from schemas import RipMethod


def pair_deviation(a, b):
    """max(lambda_max - 1, 1 - lambda_min) of a 2x2 Gram block in closed form"""
    p, q, c = a @ a, b @ b, a @ b
    mid = (p + q) / 2
    rad = math.sqrt(((p - q) / 2) ** 2 + c**2)
    return max(mid + rad - 1, 1 - (mid - rad))


class TestRipConstant:
    def test_orthonormal_columns_have_zero_delta(self, rng):
        Q = orthonormal_design(6, rng)
        for t in range(1, 7):
            assert theory.rip_constant(Q, t).delta == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("rho", [0.0, 0.3, -0.7])
    def test_two_coherent_columns(self, rho):
        phi = np.array([[1.0, rho], [0.0, math.sqrt(1 - rho**2)]])
        report = theory.rip_constant(phi, 2)
        assert report.delta == pytest.approx(abs(rho), abs=1e-12)
        assert report.extremal_support == [0, 1]

    def test_order_two_matches_pairwise_closed_form(self, rng):
        phi = rng.normal(0, 1 / math.sqrt(6), size=(6, 10))
        expected = max(pair_deviation(phi[:, i], phi[:, j]) for i, j in itertools.combinations(range(10), 2))
        report = theory.rip_constant(phi, 2)
        assert report.delta == pytest.approx(expected, abs=1e-12)
        assert report.subsets_examined == 45
        assert report.method == RipMethod.EXACT_BRUTEFORCE

    def test_monotone_in_order(self, rng):
        phi = rng.normal(0, 1 / math.sqrt(8), size=(8, 12))
        deltas = [theory.rip_constant(phi, t).delta for t in range(1, 9)]
        assert all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:]))

    def test_dependent_columns_are_flagged(self, rng):
        phi = rng.normal(size=(3, 6))
        assert theory.rip_constant(phi, 4).flagged

    def test_enumeration_guard(self, rng):
        with pytest.raises(SolverError, match="Monte-Carlo"):
            theory.rip_constant(rng.normal(size=(30, 40)), 20)

    def test_order_out_of_range(self):
        with pytest.raises(ConfigError):
            theory.rip_constant(np.eye(3), 0)
        with pytest.raises(ConfigError):
            theory.rip_constant(np.eye(3), 4)

    def test_parallel_scan_matches_serial(self, rng):
        phi = rng.normal(0, 1 / math.sqrt(8), size=(8, 11))
        serial = theory.rip_constant(phi, 3)
        parallel = theory.rip_constant(phi, 3, jobs=2)
        assert parallel.delta == serial.delta
        assert parallel.extremal_support == serial.extremal_support
        assert parallel.subsets_examined == serial.subsets_examined


class TestRipMonteCarlo:
    def test_never_exceeds_exact(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            phi = rng.normal(0, 1 / math.sqrt(6), size=(6, 9))
            exact = theory.rip_constant(phi, 3).delta
            sampled = theory.rip_monte_carlo(phi, 3, 20, seed)
            assert sampled.delta <= exact + 1e-12
            assert sampled.method == RipMethod.MONTE_CARLO

    def test_full_enumeration_fallback(self, gaussian):
        phi = gaussian[:6, :8]
        report = theory.rip_monte_carlo(phi, 2, 1000, 0)
        assert report.delta == theory.rip_constant(phi, 2).delta
        assert report.method == RipMethod.MONTE_CARLO

    def test_zero_samples_rejected(self):
        with pytest.raises(ConfigError):
            theory.rip_monte_carlo(np.eye(3), 1, 0, 0)

    def test_same_seed_same_estimate(self, gaussian):
        assert theory.rip_monte_carlo(gaussian, 4, 50, 3) == theory.rip_monte_carlo(gaussian, 4, 50, 3)


class TestDeltaProviders:
    def test_exact_provider_caches_and_clamps(self, rng):
        phi = rng.normal(size=(4, 5))
        provider = theory.ExactDeltas(phi)
        assert provider(2) == theory.rip_constant(phi, 2).delta
        assert provider(9) == provider(5)
        assert provider(0) == 0.0

    def test_monte_carlo_provider_is_optimistic(self, gaussian):
        provider = theory.MonteCarloDeltas(gaussian, 30, 1)
        assert provider.optimistic
        assert provider(2) <= theory.ExactDeltas(gaussian)(2) + 1e-12

    def test_table_provider(self):
        provider = theory.TableDeltas({3: 0.2}, default=0.4)
        assert provider(3) == 0.2
        assert provider(7) == 0.4
        with pytest.raises(ConfigError):
            theory.TableDeltas({})(1)
        with pytest.raises(ConfigError):
            theory.FixedDelta(-0.1)


class TestEta:
    def test_values(self):
        assert theory.eta(0.0) == 0.0
        assert theory.eta(0.1) == pytest.approx(0.196639, abs=1e-6)

    @pytest.mark.parametrize("delta", [0.5, 0.7, 0.62])
    def test_outside_domain(self, delta):
        with pytest.raises(DomainError):
            theory.eta(delta)


class TestTheorem1:
    def test_reference_point_is_satisfied(self):
        check = theory.theorem1_check(10, 1, 1, theory.FixedDelta(0.1))
        assert check.t == 11
        assert check.error_bound_rhs == pytest.approx(7.692, abs=1e-3)
        assert check.list_lower_bound_rhs == pytest.approx(-0.968, abs=1e-3)
        assert check.eta_t == pytest.approx(0.196639, abs=1e-6)
        assert check.conditions.list_upper_bound
        assert check.satisfied

    def test_list_larger_than_errors_fails(self):
        check = theory.theorem1_check(10, 1, 2, theory.FixedDelta(0.1))
        assert not check.conditions.list_size_rule
        assert not check.satisfied

    def test_large_delta_fails_error_bound(self):
        check = theory.theorem1_check(10, 1, 1, theory.FixedDelta(0.4))
        assert check.error_bound_rhs == pytest.approx(0.1355, abs=1e-4)
        assert not check.conditions.error_bound
        assert not check.satisfied

    def test_order_bookkeeping(self):
        seen = []

        def provider(order):
            seen.append(order)
            return 0.1

        check = theory.theorem1_check(4, 2, 2, provider)
        assert check.t == max(4 + 2, 2 + 2 + 1)
        assert seen == [6, 5]

    @pytest.mark.parametrize("m, e", [(4, 0), (4, 1), (4, 2), (6, 3)])
    def test_zero_delta_is_always_satisfied(self, m, e):
        for ell in range(1, max(e, 1) + 1):
            check = theory.theorem1_check(m, e, ell, theory.FixedDelta(0.0))
            assert check.satisfied
            assert check.error_bound_rhs is None

    def test_undefined_eta_marks_list_bound_unsatisfied(self):
        check = theory.theorem1_check(4, 1, 1, theory.FixedDelta(0.55))
        assert check.eta_t is None
        assert not check.conditions.list_lower_bound
        assert not check.satisfied

    def test_preconditions(self):
        with pytest.raises(ConfigError):
            theory.theorem1_check(3, 1, 4, theory.FixedDelta(0.1))
        with pytest.raises(ConfigError):
            theory.theorem1_check(3, 4, 1, theory.FixedDelta(0.1))


class TestCorollaries:
    def test_corollary1(self):
        assert not theory.corollary1_check(5, 1, theory.FixedDelta(0.6))
        assert theory.corollary1_bound(0.2) == pytest.approx(3.90, abs=0.01)
        assert theory.corollary1_check(5, 0, theory.FixedDelta(0.2))
        assert theory.corollary1_bound(0.0) == math.inf
        assert theory.corollary1_check(5, 5, theory.FixedDelta(0.0))

    def test_corollary2_reference_bound(self):
        assert theory.corollary2_bound(0.05) == pytest.approx(120.2, abs=0.1)
        provider = theory.FixedDelta(0.05)
        assert theory.corollary2_check(200, 119, provider)
        assert not theory.corollary2_check(200, 120, provider)

    def test_corollary2_needs_small_delta_m(self):
        provider = theory.TableDeltas({10: 0.5}, default=0.01)
        assert not theory.corollary2_check(10, 0, provider)
        assert theory.corollary2_check(10, 0, theory.FixedDelta(0.01))

    def test_corollary2_is_monotone_in_error_count(self, rng):
        phi = rng.normal(0, 1 / math.sqrt(10), size=(10, 10))
        provider = theory.ExactDeltas(phi)
        results = [theory.corollary2_check(2, e, provider) for e in range(0, 6)]
        # once the check fails it never passes again for more errors
        assert results == sorted(results, reverse=True)

    def test_max_correctable_errors(self):
        assert theory.max_correctable_errors(200, theory.FixedDelta(0.05)) == 119
        assert theory.max_correctable_errors(50, theory.FixedDelta(0.05)) == 50
        assert theory.max_correctable_errors(5, theory.FixedDelta(0.6)) is None

    def test_random_init_condition(self):
        assert theory.random_init_condition(100, theory.FixedDelta(0.05))
        assert not theory.random_init_condition(150, theory.FixedDelta(0.05))

    def test_omp_condition(self):
        assert theory.omp_recovery_condition(15, theory.FixedDelta(0.2))
        assert not theory.omp_recovery_condition(3, theory.FixedDelta(0.5))

    def test_omp_condition_is_consistent_with_omp(self):
        # identity plus three orthogonal spread columns: delta_3 = 1/2 < 1/sqrt(3)
        phi = np.hstack([np.eye(8), hadamard(8)[:3].T / math.sqrt(8)])
        assert theory.rip_constant(phi, 3).delta == pytest.approx(0.5)
        assert theory.omp_recovery_condition(2, theory.ExactDeltas(phi))
        rng = np.random.default_rng(21)
        for _ in range(200):
            s = np.sort(rng.choice(11, size=2, replace=False))
            x = np.zeros(11)
            x[s] = rng.choice([-1.0, 1.0], size=2) * (0.5 + rng.random(2))
            assert np.array_equal(baselines.omp(phi, phi @ x, 2).support, s)


def test_mutual_coherence():
    extra = np.stack([np.ones(10), np.tile([1.0, -1.0], 5)], axis=1)
    phi = np.hstack([np.eye(10), extra])
    assert theory.mutual_coherence(phi) == pytest.approx(1 / math.sqrt(10))
    assert theory.mutual_coherence(np.ones((3, 1))) == 0.0


class TestLemma3:
    def test_empty_s2_reduces_to_normal_equations(self, gaussian, rng):
        assert theory.lemma3_identity_check(gaussian, [1, 4], [], rng.normal(size=20)) <= 1e-10

    def test_orthogonal_blocks(self, rng):
        Q = orthonormal_design(8, rng)
        assert theory.lemma3_identity_check(Q, [0, 3], [5, 6, 7], rng.normal(size=8)) <= 1e-10

    def test_random_configurations(self):
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(100):
            phi = rng.normal(0, 1 / math.sqrt(10), size=(10, 16))
            chosen = rng.choice(16, size=5, replace=False)
            y = rng.normal(size=10)
            worst = max(worst, theory.lemma3_identity_check(phi, chosen[:2], chosen[2:], y))
        assert worst <= 1e-8

    def test_overlap_rejected(self, gaussian):
        with pytest.raises(ConfigError):
            theory.lemma3_identity_check(gaussian, [1, 2], [2, 3], np.ones(20))

    def test_singular_block_is_a_solver_error(self):
        phi = np.hstack([np.zeros((4, 1)), np.eye(4)])
        with pytest.raises(SolverError):
            theory.lemma3_identity_check(phi, [0, 1], [], np.ones(4))

