import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zenga.errors import ConditioningEmptyError, DomainError, EmptySampleError
from zenga.estimator import (
    TailSubsample,
    empirical_quantile,
    estimate_lower_partial_mean,
    estimate_surface,
    estimate_vbzc,
    surface_slice,
    tail_subsample,
)
from zenga.grid import Measure, Provenance
from zenga.models import BivariateSample, LognormalParams, ParetoUnit, lognormal_sample
from zenga.simulation import derive_seed, reference_truth
from zenga.vbzc import Direction

DIAG4 = BivariateSample.from_pairs([(1, 1), (2, 2), (3, 3), (4, 4)])


def _sub(values):
    return TailSubsample(Direction.D12, 0.5, 0.0, np.sort(np.asarray(values, dtype=float)))


# --------------------------------------------------------------------------- empirical quantile


def test_empirical_quantile_at_half():
    assert empirical_quantile([1, 2, 3, 4], 0.5) == 2


def test_empirical_quantile_just_above_half():
    assert empirical_quantile([1, 2, 3, 4], 0.51) == 3


def test_empirical_quantile_single_point():
    for u in (0.01, 0.5, 0.99):
        assert empirical_quantile([7.5], u) == 7.5


def test_empirical_quantile_errors():
    with pytest.raises(EmptySampleError):
        empirical_quantile([], 0.5)
    with pytest.raises(DomainError):
        empirical_quantile([1, 2], 1.0)


def test_empirical_quantile_snaps_decimal_levels():
    # 10 * 0.3 is 3.0000000000000004 in floating point; the third order statistic is intended
    assert empirical_quantile(list(range(1, 11)), 0.3) == 3


# --------------------------------------------------------------------------- tail subsample


def test_tail_subsample_strict_filter():
    sub = tail_subsample(DIAG4, "12", 0.5)
    assert sub.values.tolist() == [3.0, 4.0] and sub.size == 2
    assert sub.threshold == 2.0


def test_tail_subsample_level_too_high():
    with pytest.raises(ConditioningEmptyError):
        tail_subsample(DIAG4, "12", 0.99)


def test_tail_subsample_all_ties():
    s = BivariateSample.from_pairs([(5, 5)] * 10)
    with pytest.raises(ConditioningEmptyError):
        tail_subsample(s, "12", 0.5)


def test_tail_subsample_direction_21_conditions_on_x1():
    s = BivariateSample.from_pairs([(1, 40), (2, 30), (3, 20), (4, 10)])
    assert tail_subsample(s, Direction.D21, 0.5).values.tolist() == [10.0, 20.0]
    assert tail_subsample(s, Direction.D12, 0.5).values.tolist() == [1.0, 2.0]


# --------------------------------------------------------------------------- lower partial mean


def test_lower_partial_mean_k_one():
    assert estimate_lower_partial_mean(_sub([3, 4]), 0.5) == 3.0


def test_lower_partial_mean_constant():
    for u in (0.1, 0.5, 0.9):
        assert estimate_lower_partial_mean(_sub([2.5, 2.5, 2.5]), u) == pytest.approx(2.5, abs=1e-15)


def test_lower_partial_mean_k_zero():
    assert estimate_lower_partial_mean(_sub([3, 4]), 0.25) == pytest.approx(3.0, abs=1e-15)


# brute force: midpoint Riemann sum of the empirical step quantile X_(ceil(n p)).
# N is divisible by 60 and by every n <= 6, so the steps and the levels k/60 fall on cell edges.
_N = 1_000_020


def _riemann_lower_means(values):
    n = len(values)
    mid = (np.arange(_N) + 0.5) / _N
    q = np.asarray(values)[np.ceil(n * mid).astype(int) - 1]
    return np.cumsum(q) / _N


def test_lower_partial_mean_against_riemann_oracle():
    value_set = (0.5, 1.0, 2.5, 7.0)
    levels = [k / 60 for k in range(1, 60)]
    checked = 0
    for n in range(1, 7):
        for vals in itertools.combinations_with_replacement(value_set, n):
            cum = _riemann_lower_means(vals)
            sub = _sub(vals)
            for k, u in enumerate(levels, start=1):
                oracle = cum[k * (_N // 60) - 1] / u
                assert estimate_lower_partial_mean(sub, u) == pytest.approx(oracle, abs=1e-9)
                checked += 1
    assert checked == 209 * 59


# --------------------------------------------------------------------------- VBZC estimates


def test_estimate_vbzc_hand_example():
    v = estimate_vbzc(DIAG4, (0.5, 0.5))
    assert (v.i12, v.i21) == (0.25, 0.25)


def test_estimate_vbzc_total_ties():
    with pytest.raises(ConditioningEmptyError):
        estimate_vbzc(BivariateSample.from_pairs([(2, 3)] * 8), (0.5, 0.5))


def test_estimate_vbzc_jittered_equal_pairs():
    rng = np.random.default_rng(5)
    n = 400
    s = BivariateSample(2.0 + 1e-6 * rng.random(n), 3.0 + 1e-6 * rng.random(n))
    v = estimate_vbzc(s, (0.5, 0.5))
    assert 0 <= v.i12 < 1e-4 and 0 <= v.i21 < 1e-4


def test_empirical_bounds_on_random_samples():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(500):
        n = int(rng.integers(2, 60))
        s = BivariateSample(rng.lognormal(0, 2, n), rng.pareto(1.5, n) + 1e-3)
        u = tuple(rng.uniform(0.05, 0.95, 2))
        try:
            v = estimate_vbzc(s, u)
        except ConditioningEmptyError:
            continue
        assert 0 <= v.i12 <= 1 and 0 <= v.i21 <= 1
        checked += 1
    assert checked > 400


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_empirical_scale_invariance(a1, a2):
    s = lognormal_sample(LognormalParams(), 200, 3)
    for u in [(0.3, 0.3), (0.5, 0.8), (0.8, 0.2)]:
        v = estimate_vbzc(s, u)
        w = estimate_vbzc(s.scaled(a1, a2), u)
        assert w.i12 == pytest.approx(v.i12, abs=1e-12)
        assert w.i21 == pytest.approx(v.i21, abs=1e-12)


# --------------------------------------------------------------------------- surfaces


def test_estimate_surface_3x3_schema():
    s = lognormal_sample(LognormalParams(), 100, 9)
    g = estimate_surface(s, [0.2, 0.5, 0.8])
    assert g.measure is Measure.VBZC and g.provenance is Provenance.EMPIRICAL and g.n == 100
    assert g.values.shape == g.values2.shape == (3, 3)
    assert g.n_missing == 0
    assert g.values[1, 2] == estimate_vbzc(s, (0.5, 0.8)).i12


def test_estimate_surface_all_equal_is_missing():
    g = estimate_surface(BivariateSample.from_pairs([(1, 1)] * 5), [0.2, 0.5])
    assert np.all(np.isnan(g.values)) and np.all(np.isnan(g.values2))
    assert g.meta["failures"] == {"ConditioningEmptyError": 8}


def test_estimate_surface_marks_high_levels_missing():
    g = estimate_surface(DIAG4, [0.5, 0.9])
    assert not np.isnan(g.values[0, 0])
    assert np.isnan(g.values[0, 1]) and np.isnan(g.values2[1, 0])


def test_estimate_surface_rejects_boundary_levels():
    with pytest.raises(DomainError):
        estimate_surface(DIAG4, [0.0, 0.5])


def test_surface_slice_views():
    s = lognormal_sample(LognormalParams(), 100, 9)
    g = estimate_surface(s, [0.2, 0.5, 0.8])
    row = surface_slice(g, "u1", 0.5)
    col = surface_slice(g, "u2", 0.5)
    np.testing.assert_array_equal(row.values, g.values[1, :])
    np.testing.assert_array_equal(col.values2, g.values2[:, 1])
    assert row.free == "u2"


def test_lognormal_estimate_within_three_standard_errors_of_truth():
    dgp = LognormalParams()
    truth = reference_truth(dgp, (0.5, 0.5), 1_000_000, 99)
    reps = np.array([estimate_vbzc(lognormal_sample(dgp, 500, derive_seed(1, r)), (0.5, 0.5)).i12 for r in range(200)])
    se = reps.std(ddof=1)
    single = estimate_vbzc(lognormal_sample(dgp, 500, 12345), (0.5, 0.5)).i12
    assert abs(single - truth[0]) <= 3 * se


def test_consistency_median_error_shrinks_per_decade():
    model = ParetoUnit(2.0)
    target = 0.6534537935444441
    med = []
    for n in (200, 2000, 20000):
        errs = [abs(estimate_vbzc(model.sample(n, derive_seed(77, n, r)), (0.5, 0.5)).i12 - target) for r in range(50)]
        med.append(float(np.median(errs)))
    # the median error should fall by about sqrt(10) per decade; require at least 2/1.5
    assert med[0] / med[1] >= 2 / 1.5
    assert med[1] / med[2] >= 2 / 1.5
