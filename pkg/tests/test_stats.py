import math
from collections import Counter

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from agroseason import stats
from agroseason.errors import (DegenerateSampleError, InsufficientDataError, MissingValueError,
                               UsageError)

pytestmark = pytest.mark.filterwarnings("ignore:mann_kendall. n=")


def brute_s(x):
    return sum(int(x[j] > x[i]) - int(x[j] < x[i]) for i in range(len(x)) for j in range(i + 1, len(x)))


def brute_var(x):
    n = len(x)
    ties = sum(t * (t - 1) * (2 * t + 5) for t in Counter(x).values() if t > 1)
    return (n * (n - 1) * (2 * n + 5) - ties) / 18.0


def brute_u(x):
    n = len(x)
    return [sum(int(x[i] > x[j]) - int(x[i] < x[j]) for i in range(t) for j in range(t, n)) for t in range(1, n)]


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestMannKendall:
    def test_monotone(self):
        res = stats.mann_kendall(range(1, 11))
        assert res.s == 45 and res.var_s == 125.0
        assert res.z == pytest.approx(44 / math.sqrt(125), abs=1e-12)
        assert res.z == pytest.approx(3.9355, abs=5e-5)
        # normal CDF oracle via erfc
        assert res.p_two_sided == pytest.approx(math.erfc(res.z / math.sqrt(2)), rel=1e-12)
        assert res.p_two_sided == pytest.approx(8.3e-5, rel=0.01)
        assert res.tau == 1.0

    def test_all_ties(self):
        res = stats.mann_kendall([5] * 8)
        assert (res.s, res.z, res.p_two_sided) == (0, 0.0, 1.0)

    def test_random_matches_brute_force(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=50)
        assert stats.mann_kendall(x).s == brute_s(list(x))

    def test_ties_variance(self):
        x = [1, 2, 2, 3, 3, 3, 4, 5, 5, 6]
        res = stats.mann_kendall(x)
        assert res.var_s == brute_var(x)
        assert res.s == brute_s(x)

    def test_errors(self):
        with pytest.raises(InsufficientDataError):
            stats.mann_kendall([1, 2, 3])
        with pytest.raises(MissingValueError):
            stats.mann_kendall([1, 2, np.nan, 4, 5])

    @pytest.mark.filterwarnings("default")
    def test_small_n_warns(self):
        with pytest.warns(UserWarning, match="n=4"):
            stats.mann_kendall([1, 2, 3, 4])

    def test_one_sided(self):
        res = stats.mann_kendall(range(10))
        assert res.p_increasing == pytest.approx(res.p_two_sided / 2)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-5, 5), min_size=4, max_size=40))
    def test_reverse_negates(self, x):
        a, b = stats.mann_kendall(x), stats.mann_kendall(x[::-1])
        assert b.s == -a.s and b.z == -a.z and b.p_two_sided == a.p_two_sided

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(-50, 50), min_size=4, max_size=40), st.integers(-100, 100),
           st.integers(1, 20))
    def test_affine_invariance(self, x, shift, scale):
        a = stats.mann_kendall(x)
        b = stats.mann_kendall([scale * v + shift for v in x])
        assert (a.s, a.var_s, a.z, a.p_two_sided, a.tau) == (b.s, b.var_s, b.z, b.p_two_sided, b.tau)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(finite, min_size=4, max_size=60))
    def test_result_invariants(self, x):
        r = stats.mann_kendall(x)
        assert 0.0 <= r.p_two_sided <= 1.0
        assert -1.0 <= r.tau <= 1.0
        if r.s == 0:
            assert r.z == 0.0
        else:
            assert np.sign(r.z) == np.sign(r.s) or r.z == 0.0 and abs(r.s) == 1


class TestSlopes:
    def test_exact_line(self):
        x = [3 + 2 * i for i in range(12)]
        assert stats.sen_slope(x) == (2.0, 3.0)
        ols = stats.ols_slope(x)
        assert ols.slope == pytest.approx(2.0) and ols.intercept == pytest.approx(3.0)

    def test_constant(self):
        assert stats.sen_slope([4.0] * 6).slope == 0.0

    def test_exhaustive_oracle(self):
        rng = np.random.default_rng(9)
        x = list(rng.normal(size=30))
        pairs = [(x[j] - x[i]) / (j - i) for i in range(30) for j in range(i + 1, 30)]
        assert len(pairs) == 435
        assert stats.sen_slope(x).slope == pytest.approx(float(np.median(pairs)), abs=1e-15)

    def test_matches_scipy(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=40) + 0.1 * np.arange(40)
        assert stats.sen_slope(x).slope == pytest.approx(scipy.stats.theilslopes(x).slope)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            stats.sen_slope([1.0])


class TestPettitt:
    def test_step(self):
        res = stats.pettitt([0] * 4 + [10] * 4)
        assert res.u_series[3] == -16 and res.k_stat == 16 and res.break_index == 4
        assert list(res.u_series) == brute_u([0] * 4 + [10] * 4)
        assert res.p_approx == pytest.approx(2 * math.exp(-1536 / 576), abs=1e-15)
        assert res.p_approx == pytest.approx(0.139, abs=1e-3)
        assert (res.mean_before, res.mean_after, res.mean_diff) == (0.0, 10.0, 10.0)
        assert not res.significant

    def test_constant(self):
        res = stats.pettitt([3.0] * 10)
        assert set(res.u_series) == {0} and res.k_stat == 0
        assert res.p_approx == 1.0 and not res.significant

    def test_keys_and_earliest_tie(self):
        # |U| peaks twice with equal height; earliest wins
        x = [0, 1, 0, 1]
        res = stats.pettitt(x, keys=["a", "b", "c", "d"])
        u = brute_u(x)
        first = [abs(v) for v in u].index(max(abs(v) for v in u)) + 1
        assert res.break_index == first
        assert res.break_date == ["a", "b", "c", "d"][first - 1]

    def test_significant_shift(self):
        rng = np.random.default_rng(1)
        x = np.concatenate([rng.normal(0, 0.3, 15), rng.normal(1.5, 0.3, 15)])
        res = stats.pettitt(x, alpha=0.05, keys=list(range(1990, 2020)))
        assert res.significant and res.break_date == 2004

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(-4, 4), min_size=4, max_size=30))
    def test_recursion_vs_direct(self, x):
        res = stats.pettitt(x)
        assert list(res.u_series) == brute_u(x)
        assert res.k_stat == max(abs(v) for v in res.u_series)
        assert res.mean_diff == pytest.approx(res.mean_after - res.mean_before)

    def test_probability_monotone_and_clamped(self):
        n = 30
        ps = [stats.pettitt_probability(k, n) for k in range(0, 400)]
        assert all(0.0 <= p <= 1.0 for p in ps)
        tail = [p for p in ps if p < 1.0]
        assert all(a > b for a, b in zip(tail, tail[1:]))

    def test_errors(self):
        with pytest.raises(InsufficientDataError):
            stats.pettitt([1, 2, 3])
        with pytest.raises(UsageError):
            stats.pettitt([1, 2, 3, 4], alpha=1.5)


class TestBreakMeans:
    def test_example(self):
        assert stats.break_period_means([0, 0, 10, 10], 2) == (0.0, 10.0, 10.0)

    def test_uniform(self):
        assert stats.break_period_means([2.5] * 7, 3).diff == 0.0

    def test_random(self):
        rng = np.random.default_rng(4)
        x = list(rng.normal(size=25))
        before, after, diff = stats.break_period_means(x, 9)
        assert before == pytest.approx(sum(x[:9]) / 9, abs=1e-14)
        assert after == pytest.approx(sum(x[9:]) / 16, abs=1e-14)

    @pytest.mark.parametrize("k", [0, 4, -1])
    def test_out_of_range(self, k):
        with pytest.raises(UsageError):
            stats.break_period_means([1, 2, 3, 4], k)


class TestShapiroWilk:
    def test_blom_quantiles_near_one(self):
        x = scipy.stats.norm.ppf(stats.blom_positions(30))
        res = stats.shapiro_wilk(x)
        assert res.w > 0.98 and res.accepts_normality(0.05)

    def test_three_points_vs_reference(self):
        for x in ([1, 2, 3], [1, 2, 7], [0.1, 5, 5.2]):
            assert abs(stats.shapiro_wilk(x).w - scipy.stats.shapiro(x).statistic) < 1e-3

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            stats.shapiro_wilk([2.0, 2.0, 2.0])

    def test_sizes(self):
        with pytest.raises(InsufficientDataError):
            stats.shapiro_wilk([1.0, 2.0])
        with pytest.raises(InsufficientDataError):
            stats.shapiro_wilk(np.arange(5001.0))

    def test_coefficients_unit_norm_antisymmetric(self):
        for n in (3, 4, 5, 6, 11, 12, 50, 501):
            a = stats.shapiro_wilk_coefficients(n)
            assert np.dot(a, a) == pytest.approx(1.0, abs=1e-12)
            assert np.allclose(a, -a[::-1])

    def test_rejects_skewed(self):
        rng = np.random.default_rng(0)
        res = stats.shapiro_wilk(rng.exponential(size=200))
        assert res.p < 0.01

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=60, unique=True),
           st.floats(0.01, 100), st.floats(-1e3, 1e3))
    def test_affine_invariance(self, ints, scale, shift):
        x = [v / 10.0 for v in ints]
        a = stats.shapiro_wilk(x)
        b = stats.shapiro_wilk([scale * v + shift for v in x])
        assert a.w == pytest.approx(b.w, abs=1e-9)
        assert 0.0 < a.w <= 1.0 and 0.0 <= a.p <= 1.0


class TestQQ:
    def test_fitted_normal_quantiles(self):
        rng = np.random.default_rng(8)
        x = rng.normal(5.0, 2.0, size=25)
        z = scipy.stats.norm.ppf((np.arange(1, 26) - 0.375) / 25.25)
        expected = x.mean() + x.std(ddof=1) * z
        pts = stats.qq_normal(x)
        np.testing.assert_allclose([p.theoretical for p in pts], expected, rtol=1e-12)
        np.testing.assert_array_equal([p.observed for p in pts], np.sort(x))

    def test_normal_sample_hugs_line(self):
        # observed sample equal to its own Blom quantiles lies on the fitted line up to the sd ratio
        q = scipy.stats.norm.ppf(stats.blom_positions(40))
        pts = stats.qq_normal(q)
        r = np.corrcoef([p.theoretical for p in pts], [p.observed for p in pts])[0, 1]
        assert r == pytest.approx(1.0, abs=1e-12)

    def test_two_points(self):
        (t1, o1), (t2, o2) = stats.qq_normal([1.0, -1.0])
        assert (o1, o2) == (-1.0, 1.0)
        assert t2 > 0 and t1 == pytest.approx(-t2, abs=1e-15)
        assert t2 == pytest.approx(0.83361638373861, abs=1e-12)

    def test_affine(self):
        rng = np.random.default_rng(2)
        x = rng.gamma(2.0, size=20)
        a, b = 3.5, -7.0
        base = stats.qq_normal(x)
        moved = stats.qq_normal(a * x + b)
        for (t0, o0), (t1, o1) in zip(base, moved):
            assert o1 == pytest.approx(a * o0 + b)
            assert t1 == pytest.approx(a * t0 + b)

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            stats.qq_normal([1.0, 1.0])


class TestAnomalies:
    def test_example(self):
        np.testing.assert_allclose(stats.standardized_anomalies([1, 2, 3]),
                                   [-1.224744871391589, 0.0, 1.224744871391589], atol=1e-12)

    def test_antisymmetric(self):
        a = stats.standardized_anomalies([1, 4, 5, 6, 9])
        np.testing.assert_allclose(a, -a[::-1], atol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=2, max_size=80))
    def test_centred_unit(self, x):
        if np.std(x) < 1e-6:
            return
        a = stats.standardized_anomalies(x)
        assert abs(a.sum()) < 1e-9
        assert abs(a.mean()) < 1e-9 and abs(a.std() - 1.0) < 1e-9

    def test_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            stats.standardized_anomalies([3, 3])


class TestPearson:
    def test_self_and_negation(self):
        x = np.arange(10.0) ** 1.5
        cm = stats.pearson_matrix({"x": x, "neg": -x})
        assert cm.cell("x", "x")[0] == 1.0
        assert cm.cell("x", "neg")[0] == -1.0
        assert cm.cell("x", "neg")[1] == 0.0

    def test_textbook_formula(self):
        rng = np.random.default_rng(5)
        x, y = rng.normal(size=40), rng.normal(size=40)
        cov = sum((a - x.mean()) * (b - y.mean()) for a, b in zip(x, y)) / 39
        r = cov / (x.std(ddof=1) * y.std(ddof=1))
        cm = stats.pearson_matrix({"x": x, "y": y})
        assert cm.r[0, 1] == pytest.approx(r, abs=1e-12)
        assert cm.p[0, 1] == pytest.approx(scipy.stats.pearsonr(x, y).pvalue, rel=1e-9)
        assert np.array_equal(cm.r, cm.r.T)

    def test_pairwise_complete(self):
        x = np.array([1, 2, 3, 4, 5, np.nan, 7.0])
        y = np.array([2, 1, 4, 3, np.nan, 6, 8.0])
        z = np.array([np.nan, np.nan, np.nan, np.nan, np.nan, 1.0, 2.0])
        cm = stats.pearson_matrix({"x": x, "y": y, "z": z})
        assert cm.n_pairs[0, 1] == 5
        assert math.isnan(cm.r[0, 2]) and cm.n_pairs[0, 2] == 1
        listwise = stats.pearson_matrix({"x": x, "y": y}, pairwise_complete=False)
        assert listwise.n_pairs[0, 1] == 5

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(finite, finite), min_size=4, max_size=40), st.floats(0.1, 10), st.floats(-5, 5))
    def test_affine_invariance(self, pairs, scale, shift):
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        if np.std(x) < 1e-3 or np.std(y) < 1e-3:
            return
        a = stats.pearson_matrix({"x": x, "y": y}).r[0, 1]
        b = stats.pearson_matrix({"x": scale * x + shift, "y": y}).r[0, 1]
        c = stats.pearson_matrix({"x": -x, "y": y}).r[0, 1]
        assert b == pytest.approx(a, abs=1e-9)
        assert c == pytest.approx(-a, abs=1e-12)
        assert -1.0 <= a <= 1.0

    def test_needs_two(self):
        with pytest.raises(InsufficientDataError):
            stats.pearson_matrix({"x": [1, 2, 3]})
