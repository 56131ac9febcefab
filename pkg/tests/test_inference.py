import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ssanova.errors import DataError, DegenerateEstimatorError
from ssanova.grid import GridDomain
from ssanova.inference import (all_assignments, asymptotic_test, bootstrap_test, exact_permutation_test,
                               n_assignments, p_value, permutation_test, recommend_method)
from ssanova.sample import GroupedSample

D = GridDomain(0.0, 1.0, 6)


def test_p_value_counts_ties():
    assert p_value(np.array([1.0, 2.0, 3.0, 4.0]), 3.0) == 0.5
    assert p_value(np.array([1.0, 2.0, 3.0, 4.0]), 3.0, add_one=True) == 0.6


def test_p_value_tie_guard_absorbs_round_off():
    assert p_value(np.array([1.0 - 1e-15, 0.2]), 1.0) == 0.5


@pytest.mark.parametrize("sizes,expected", [((4, 4, 4), "permutation"), ((20, 20, 20), "asymptotic"),
                                            ((5, 5, 10), "permutation"), ((6, 6, 6), "asymptotic")])
def test_method_advice(sizes, expected):
    assert recommend_method(sizes) == expected


def test_asymptotic_is_deterministic_and_on_the_grid(small_sample):
    a = asymptotic_test(small_sample, 1000, 42)
    b = asymptotic_test(small_sample, 1000, 42)
    assert a == b
    assert a.p_value * 1000 == pytest.approx(round(a.p_value * 1000), abs=1e-9)
    assert a.method == "asymptotic" and a.replicates == 1000 and a.seed == 42
    assert "clipped_eigenvalues" in a.extras


def test_asymptotic_translation_gives_same_p(small_sample):
    shifted = small_sample.with_values(small_sample.values + np.linspace(-3, 3, 6))
    assert asymptotic_test(shifted, 500, 1).p_value == asymptotic_test(small_sample, 500, 1).p_value


def test_asymptotic_rejects_singleton_groups():
    s = oracles.random_sample(0, (1, 4, 4), 5)
    with pytest.raises(DegenerateEstimatorError, match="permutation"):
        asymptotic_test(s, 100, 0)


def test_identical_observations_bootstrap():
    s = GroupedSample(D, np.ones((6, 6)), (3, 3))
    r = bootstrap_test(s, 200, 0)
    assert r.statistic == 0.0 and r.p_value == 1.0


def test_bootstrap_and_permutation_determinism(small_sample):
    assert bootstrap_test(small_sample, 300, 5) == bootstrap_test(small_sample, 300, 5)
    assert permutation_test(small_sample, 300, 5) == permutation_test(small_sample, 300, 5)
    assert permutation_test(small_sample, 300, 5) != permutation_test(small_sample, 300, 6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 600))
def test_p_values_on_replicate_grid(seed, reps):
    s = oracles.random_sample(seed % 50, (3, 3, 2), 4)
    for r in (bootstrap_test(s, reps, seed), permutation_test(s, reps, seed)):
        assert 0 <= r.p_value <= 1
        assert r.p_value * reps == pytest.approx(round(r.p_value * reps), abs=1e-9)


def test_counting_and_enumeration():
    assert n_assignments((2, 2)) == 6
    labels = list(all_assignments((2, 2)))
    assert len(labels) == 6
    assert len({tuple(x) for x in labels}) == 6
    assert n_assignments((2, 2, 2)) == 90
    assert all(np.bincount(x, minlength=3).tolist() == [2, 2, 2] for x in all_assignments((2, 2, 2)))


def test_exact_on_identical_observations():
    s = GroupedSample(D, np.ones((6, 6)), (2, 2, 2))
    assert exact_permutation_test(s).p_value == 1.0


def test_exact_guard():
    s = oracles.random_sample(1, (10, 10, 10), 3)
    with pytest.raises(DataError, match="Monte-Carlo"):
        exact_permutation_test(s)


@pytest.mark.parametrize("sizes,m_p,tol", [((3, 3), 20_000, 0.02), ((2, 2, 2), 50_000, 0.01)])
def test_monte_carlo_permutation_approaches_exact(sizes, m_p, tol):
    s = oracles.random_sample(12, sizes, 5)
    exact = exact_permutation_test(s).p_value
    assert abs(permutation_test(s, m_p, 3).p_value - exact) <= tol


@pytest.mark.parametrize("seed", range(3))
def test_permutation_p_invariant_under_transforms(seed):
    s = oracles.random_sample(seed, (4, 4, 3), 7)
    base = permutation_test(s, 400, 9)
    for name, other in oracles.transformed_copies(s, seed):
        r = permutation_test(other, 400, 9)
        assert r.statistic == pytest.approx(base.statistic, abs=1e-10), name
        assert r.p_value == base.p_value, name


def test_exact_p_values_sub_uniform():
    # exact permutation p-values satisfy P(p <= a) <= a under exchangeability
    rng = np.random.default_rng(0)
    ps = np.array([exact_permutation_test(GroupedSample(D, rng.normal(size=(6, 6)), (2, 2, 2))).p_value
                   for _ in range(300)])
    for a in (0.1, 0.2, 0.5):
        assert np.mean(ps <= a) <= a + 2.58 * np.sqrt(a * (1 - a) / 300)


def test_strong_shift_gives_small_p():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(30, 6))
    vals[20:] += 5.0
    s = GroupedSample(D, vals, (10, 10, 10))
    assert asymptotic_test(s, 1000, 1).p_value == 0.0
    assert permutation_test(s, 1000, 1).p_value < 0.01
    assert bootstrap_test(s, 1000, 1).p_value < 0.01


def test_report_round_trips_to_dict(small_sample):
    d = permutation_test(small_sample, 50, 1).to_dict()
    assert set(d) == {"test", "statistic", "p_value", "method", "replicates", "seed", "extras"}
