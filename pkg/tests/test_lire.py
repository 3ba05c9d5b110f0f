import numpy as np
import pytest
from numpy.testing import assert_array_equal

from baselines import omp
from ensemble import generate_instance, mix_seed
from exceptions import ConfigError
from lire import count_errors, default_list_size, lire_correct, lire_pass, lire_standalone, pad_support
from schemas import EnsembleConfig, FillPolicy, LireConfig, build
from tests.conftest import planted


@pytest.mark.parametrize("m, n, expected", [(10, 20, 5), (10, 12, 2), (1, 1, 1), (4, 4, 1), (3, 4, 1)])
def test_default_list_size(m, n, expected):
    assert default_list_size(m, n) == expected


def test_default_list_size_needs_m_at_most_n():
    with pytest.raises(ConfigError):
        default_list_size(5, 4)


def test_count_errors():
    assert count_errors([0, 2, 4], [0, 2, 4]) == 0
    assert count_errors([0, 2, 5], [0, 2, 4]) == 1
    assert count_errors([], [1, 3]) == 2


class TestIdentityDesign:
    @pytest.mark.parametrize("s_in", [[0, 2, 3], [1, 2, 11], [5, 6, 7], [1, 5, 9]])
    def test_one_pass_recovers_the_support(self, identity_instance, s_in):
        inst = identity_instance
        s_out, trace = lire_pass(inst.phi, inst.y, s_in, LireConfig(m=3, list_size=1))
        assert_array_equal(s_out, inst.s_star)
        assert len(trace.steps) <= 3

    def test_short_support_is_padded_by_correlation(self, identity_instance):
        inst = identity_instance
        padded = pad_support(inst.phi, inst.y, [], 3, FillPolicy.CORRELATION)
        assert_array_equal(padded, inst.s_star)

    def test_lowest_index_padding(self, identity_instance):
        inst = identity_instance
        assert_array_equal(pad_support(inst.phi, inst.y, [7], 3, FillPolicy.LOWEST_INDEX), [0, 1, 7])
        s_out, _ = lire_pass(inst.phi, inst.y, [], LireConfig(m=3, list_size=1, fill_policy=FillPolicy.LOWEST_INDEX))
        assert_array_equal(s_out, inst.s_star)

    def test_standalone_recovers_for_any_seed(self, identity_instance):
        inst = identity_instance
        for seed in range(5):
            s_out = lire_standalone(inst.phi, inst.y, 3, LireConfig(m=3, list_size=1), seed)
            assert_array_equal(s_out, inst.s_star)


def test_zero_residual_exits_immediately():
    inst = planted(np.eye(12), [5, 9], values=[1.0, -2.0])
    s_out, trace = lire_pass(inst.phi, inst.y, [1, 5, 9], LireConfig(m=3, list_size=1))
    assert_array_equal(s_out, [1, 5, 9])
    assert trace.exited_early
    assert trace.steps == []


def test_multi_pass_stops_at_fixed_point(identity_instance):
    inst = identity_instance
    s_out, traces = lire_correct(inst.phi, inst.y, [0, 2, 3], LireConfig(m=3, list_size=1, passes=5))
    assert_array_equal(s_out, inst.s_star)
    # the second pass changes nothing, so passes three to five are skipped
    assert len(traces) == 2


def test_single_pass_correct_equals_lire_pass():
    inst = generate_instance(build(EnsembleConfig, d=40, n=20, m=4, seed=3, normalize_columns=True))
    cfg = LireConfig(m=4)
    s_in = [0, 1, 2, 3]
    direct, _ = lire_pass(inst.phi, inst.y, s_in, cfg)
    multi, traces = lire_correct(inst.phi, inst.y, s_in, cfg)
    assert_array_equal(direct, multi)
    assert len(traces) == 1


@pytest.mark.parametrize("seed", range(10))
def test_output_is_a_valid_size_m_support(seed):
    inst = generate_instance(build(EnsembleConfig, d=30, n=15, m=5, seed=seed, sigma2=0.001))
    rng = np.random.default_rng(seed)
    s_in = np.sort(rng.choice(30, size=3, replace=False))
    s_out, traces = lire_correct(inst.phi, inst.y, s_in, LireConfig(m=5, passes=3))
    assert s_out.size == 5
    assert np.all(np.diff(s_out) > 0)
    assert 0 <= s_out.min() and s_out.max() < 30
    assert sum(len(t.steps) for t in traces) <= 5 * 3


def test_steps_never_duplicate_a_feature():
    inst = generate_instance(build(EnsembleConfig, d=50, n=20, m=6, seed=11))
    _, trace = lire_pass(inst.phi, inst.y, [0, 1, 2, 3, 4, 5], LireConfig(m=6, list_size=3))
    slots = [0, 1, 2, 3, 4, 5]
    for step in trace.steps:
        i = step.step - 1
        assert slots[i] == step.removed
        assert step.chosen == step.removed or step.chosen not in slots
        assert step.chosen in step.candidates or step.chosen == step.removed
        slots[i] = step.chosen


def test_standalone_is_deterministic():
    inst = generate_instance(build(EnsembleConfig, d=40, n=20, m=4, seed=5))
    cfg = LireConfig(m=4, passes=3)
    assert_array_equal(
        lire_standalone(inst.phi, inst.y, 4, cfg, 9),
        lire_standalone(inst.phi, inst.y, 4, cfg, 9),
    )


def test_config_errors(identity_instance):
    inst = identity_instance
    with pytest.raises(ConfigError):
        build(LireConfig, m=3, list_size=4)
    with pytest.raises(ConfigError):
        build(LireConfig, m=3, passes=0)
    with pytest.raises(ConfigError):
        lire_pass(np.eye(12)[:2], inst.y[:2], [0], LireConfig(m=3))
    with pytest.raises(ConfigError):
        lire_pass(inst.phi, inst.y, [0, 1, 2, 3], LireConfig(m=3))


def test_successful_output_is_a_fixed_point():
    successes = 0
    for seed in range(30):
        inst = generate_instance(build(EnsembleConfig, d=40, n=30, m=3, seed=seed, normalize_columns=True))
        cfg = LireConfig(m=3, passes=5)
        s_out, _ = lire_correct(inst.phi, inst.y, omp(inst.phi, inst.y, 3).support, cfg)
        if not set(inst.s_star.tolist()) <= set(s_out.tolist()):
            continue
        successes += 1
        again, _ = lire_pass(inst.phi, inst.y, s_out, cfg)
        assert_array_equal(again, s_out)
    assert successes > 0


@pytest.mark.slow
def test_later_passes_fix_what_one_pass_misses():
    found = None
    for n in (40, 48, 56):
        for seed in range(60):
            inst = generate_instance(build(EnsembleConfig, d=128, n=n, m=12, seed=seed))
            start = omp(inst.phi, inst.y, 12).support
            one, _ = lire_correct(inst.phi, inst.y, start, LireConfig(m=12, passes=1))
            if count_errors(one, inst.s_star) == 0:
                continue
            five, traces = lire_correct(inst.phi, inst.y, start, LireConfig(m=12, passes=5))
            if count_errors(five, inst.s_star) == 0:
                found = traces
                break
        if found:
            break
    assert found is not None
    assert 2 <= len(found) <= 5


@pytest.mark.slow
def test_standalone_beats_omp_from_a_random_start():
    d, m, n = 128, 10, 60
    lire_wins = omp_wins = 0
    for k in range(50):
        inst = generate_instance(build(EnsembleConfig, d=d, n=n, m=m, seed=mix_seed(0, m, n, k)))
        lire_wins += count_errors(lire_standalone(inst.phi, inst.y, m, LireConfig(m=m), seed=k), inst.s_star) == 0
        omp_wins += count_errors(omp(inst.phi, inst.y, m).support, inst.s_star) == 0
    assert lire_wins > omp_wins
