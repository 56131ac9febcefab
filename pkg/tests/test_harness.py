import numpy as np
import pytest

from ssanova import harness as hn
from ssanova.errors import DataError
from ssanova.grid import GridDomain
from ssanova.processes import ProcessSpec, generate_grouped
from ssanova.sample import GroupedSample

D = GridDomain(0.25, 0.75, 20)


def _config(**kw):
    base = dict(process=ProcessSpec.sbm(), sizes=(5, 5, 5), tests=("ss-perm", "cff"), c1=0.5,
                c2_values=(0.0, 3.0), replications=6, resamples=60, seed=4, domain=D)
    base.update(kw)
    return hn.ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(hn.UnknownSelectorError, match="valid"):
        _config(tests=("ss-perm", "bogus"))
    for bad in (dict(replications=0), dict(alpha=1.0), dict(c2_values=()), dict(sizes=(4, 4)),
                dict(resamples=0)):
        with pytest.raises(DataError):
            _config(**bad)


def test_noise_shared_across_shifts():
    a, b = _config(c2_values=(0.0,)), _config(c1=2.0, c2_values=(1.0, 9.0))
    for rep in range(3):
        assert hn.noise_digest(a, rep) == hn.noise_digest(b, rep)
    assert hn.noise_digest(a, 0) != hn.noise_digest(a, 1)


def test_zero_shift_matches_size_estimate():
    cfg = _config(c1=0.0, c2_values=(0.0, 2.0))
    curve, size = hn.power_curve(cfg), hn.estimate_size(cfg)
    for t in cfg.tests:
        assert curve.rates[t][0] == size.rates[t]


def test_power_curve_independent_of_threads():
    cfg = _config()
    a, b = hn.power_curve(cfg, 1), hn.power_curve(cfg, 3)
    assert a.rows() == b.rows()


def test_single_replication_rates_are_binary():
    curve = hn.power_curve(_config(replications=1))
    for t, r in curve.rates.items():
        assert set(r.tolist()) <= {0.0, 1.0}
        np.testing.assert_array_equal(curve.standard_errors[t], 0.0)


def test_errors_excluded_from_denominator():
    curve = hn.power_curve(_config(sizes=(1, 1, 1), tests=("ss-asym", "ss-perm"), replications=3))
    assert curve.errors["ss-asym"].tolist() == [3, 3]
    assert np.all(np.isnan(curve.rates["ss-asym"]))
    assert curve.valid["ss-perm"].tolist() == [3, 3] and curve.errors["ss-perm"].sum() == 0


def test_power_grows_with_shift():
    curve = hn.power_curve(_config(tests=("ss-asym",), c2_values=(0.0, 40.0), replications=20,
                                   sizes=(8, 8, 8)))
    r = curve.rates["ss-asym"]
    assert r[1] >= 0.9 and r[1] > r[0]


def test_run_tests_returns_errors_per_selector(small_sample):
    out = hn.run_tests(small_sample, ["ss-perm", "hr"], 50, 1)
    assert out["ss-perm"].method == "permutation"
    assert isinstance(out["hr"], DataError)


def _regions(sizes=(30, 12, 5), shift=0.0, seed=1):
    s = generate_grouped(ProcessSpec.sbm(), [0.0, 0.0, shift], sizes, seed, D)
    return GroupedSample(D, s.values, s.sizes, ("East", "West", "North"))


def test_subsample_size_omits_small_groups():
    res = hn.subsample_study(_regions(), ["ss-perm"], "size", subgroup_size=4, replications=5,
                             resamples=50, seed=2)
    assert res.omitted_groups == ("North",)
    assert res.valid["ss-perm"] == 5 * 2
    assert res.subgroup_size == 4
    assert 0 <= res.rates["ss-perm"] <= 1


def test_subsample_size_needs_a_large_group():
    with pytest.raises(DataError, match="K\\*s"):
        hn.subsample_study(_regions((6, 6, 6)), ["ss-perm"], "size", subgroup_size=3)


def test_subsample_power_far_shift():
    res = hn.subsample_study(_regions((20, 20, 20), shift=30.0), ["ss-perm", "ss-asym"], "power",
                             subgroup_size=6, replications=10, resamples=200, seed=3)
    assert res.rates["ss-perm"] == 1.0 and res.rates["ss-asym"] == 1.0
    assert res.omitted_groups == ()


def test_subsample_is_deterministic():
    args = (_regions(), ["ss-perm"], "size", 4, 4, 0.05, 40, 8)
    assert hn.subsample_study(*args) == hn.subsample_study(*args)


def test_subsample_rejects_unknown_mode():
    with pytest.raises(ValueError):
        hn.subsample_study(_regions(), ["ss-perm"], "both")


@pytest.mark.parametrize("weights", [(0.5, 0.6, -0.1), (0.3, 0.3, 0.3), (1.0,), (0.0, 0.5, 0.5)])
def test_alternative_weights_validated(weights):
    with pytest.raises(DataError):
        hn.ShrinkingAlternative.shift_design(0.5, 1.0, ProcessSpec.sbm(), D, weights)


def test_alternative_coefficients():
    alt = hn.ShrinkingAlternative.shift_design(0.0, 2.0, ProcessSpec.sbm(), D, (0.2, 0.3, 0.5))
    c = alt.delta_coefficients()
    assert c.shape == (3, D.m)
    np.testing.assert_allclose(alt.delta_bar(), 0.5 * c[2])


def test_limiting_power_null_and_monotone():
    null = hn.ShrinkingAlternative.shift_design(0.0, 0.0, ProcessSpec.sbm(), D)
    r = hn.asymptotic_power_ss(null, outer=400, inner=100, pairs=1000, draws=20_000, seed=1)
    assert abs(r.power - 0.05) <= 2 * r.standard_error
    assert not r.extras["unstable_inverse_distance"]
    powers = [hn.asymptotic_power_ss(hn.ShrinkingAlternative.shift_design(0.5, c2, ProcessSpec.sbm(), D),
                                     outer=400, inner=100, pairs=1000, draws=5000, seed=1).power
              for c2 in (0.0, 30.0, 60.0)]
    assert powers[0] < powers[1] < powers[2]


@pytest.mark.parametrize("test", ["CFF", "ZC", "HR"])
def test_baseline_limiting_null(test):
    null = hn.ShrinkingAlternative.shift_design(0.0, 0.0, ProcessSpec.sbm(), D)
    r = hn.asymptotic_power_baseline(test, null, gamma_draws=2000, draws=20_000, seed=2)
    if test == "HR":
        assert r.power == pytest.approx(0.05, abs=1e-12)
        assert r.extras["noncentrality"] == pytest.approx(0.0, abs=1e-12)
    else:
        assert abs(r.power - 0.05) <= 2 * r.standard_error


def test_hr_noncentrality_grows_with_shift():
    cov = hn.process_covariance(ProcessSpec.sbm(), D, 2000, 3)
    ncs = [hn.hr_noncentrality(hn.ShrinkingAlternative.shift_design(0.0, c2, ProcessSpec.sbm(), D), cov)[0]
           for c2 in (0.0, 10.0, 20.0)]
    assert ncs[0] == pytest.approx(0.0, abs=1e-12)
    # the shift enters linearly, so the noncentrality is quadratic in c2
    assert ncs[2] == pytest.approx(4 * ncs[1], rel=1e-10)


def test_unknown_limiting_test_rejected():
    with pytest.raises(DataError):
        hn.asymptotic_power_baseline("GPF", hn.ShrinkingAlternative.shift_design(0, 0, ProcessSpec.sbm(), D))
