"""Rank-based trend and break tests, normality, anomalies and correlation.

Normal and Student-t distribution functions come from ``scipy.special``
(Cephes ``ndtr``/``ndtri``/``stdtr``; relative accuracy around 1e-15), which
is well inside the 1e-7 budget these p-values need.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np
from scipy import special

from .errors import (DegenerateSampleError, InsufficientDataError, MissingValueError,
                     UsageError)


def _as_complete(values, min_n: int, what: str) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise UsageError(f"{what} expects a one-dimensional sequence")
    if np.isnan(x).any():
        raise MissingValueError(f"{what}: input contains missing values; drop or impute them first")
    if x.size < min_n:
        raise InsufficientDataError(f"{what} needs at least {min_n} values, got {x.size}")
    return x


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal."""
    return float(special.ndtr(-z))


# ----------------------------------------------------------------------------
# Mann-Kendall
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TrendTestResult:
    s: int
    var_s: float
    z: float
    p_two_sided: float
    tau: float
    n: int

    @property
    def p_increasing(self) -> float:
        """One-sided p for an upward trend."""
        return normal_sf(self.z)

    @property
    def p_decreasing(self) -> float:
        return normal_sf(-self.z)

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_two_sided < alpha


def _pairwise_sign_sum(x: np.ndarray) -> int:
    """sum_{i<j} sgn(x_j - x_i), exact in integers."""
    n = x.size
    total = 0
    # row blocks keep memory at O(block * n)
    block = max(1, 2_000_000 // max(n, 1))
    for start in range(0, n - 1, block):
        stop = min(n - 1, start + block)
        rows = x[start:stop, None]
        signs = np.sign(x[None, :] - rows).astype(np.int64)
        cols = np.arange(n)[None, :]
        upper = cols > np.arange(start, stop)[:, None]
        total += int(signs[upper].sum())
    return total


def tie_group_sizes(values) -> np.ndarray:
    """Sizes of groups of equal values (size > 1 only)."""
    _, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    return counts[counts > 1]


def mann_kendall(values: Sequence[float]) -> TrendTestResult:
    """Mann-Kendall test for a monotonic trend.

    ``S`` is the sum of ``sgn(x_j - x_i)`` over all pairs ``i < j``; its
    variance carries the usual tie correction

        V(S) = [n(n-1)(2n+5) - sum_g t_g(t_g-1)(2t_g+5)] / 18

    and the standardized statistic uses a continuity correction of one unit
    toward zero. ``tau`` is ``S / (n(n-1)/2)`` without tie adjustment.

    Raises
    ------
    InsufficientDataError
        Fewer than 4 values.
    MissingValueError
        Any NaN in the input.
    """
    x = _as_complete(values, 4, "mann_kendall")
    n = x.size
    if n < 8:
        warnings.warn(f"mann_kendall: n={n} < 8, normal approximation of S is rough", stacklevel=2)
    s = _pairwise_sign_sum(x)
    ties = tie_group_sizes(x).astype(float)
    var_s = (n * (n - 1) * (2 * n + 5) - float(np.sum(ties * (ties - 1) * (2 * ties + 5)))) / 18.0
    if s > 0:
        z = (s - 1) / math.sqrt(var_s)
    elif s < 0:
        z = (s + 1) / math.sqrt(var_s)
    else:
        z = 0.0
    p = min(1.0, 2.0 * normal_sf(abs(z)))
    tau = s / (n * (n - 1) / 2.0)
    return TrendTestResult(int(s), float(var_s), float(z), float(p), float(tau), int(n))


# ----------------------------------------------------------------------------
# Slopes
# ----------------------------------------------------------------------------

class LineFit(NamedTuple):
    slope: float
    intercept: float


def sen_slope(values: Sequence[float]) -> LineFit:
    """Theil-Sen slope: median of ``(x_j - x_i)/(j - i)`` over ``j > i``.

    Index origin is 0, so ``intercept`` is the fitted value at the first
    step: ``median(x_i - slope * i)``.
    """
    x = _as_complete(values, 2, "sen_slope")
    i, j = np.triu_indices(x.size, k=1)
    slope = float(np.median((x[j] - x[i]) / (j - i)))
    intercept = float(np.median(x - slope * np.arange(x.size)))
    return LineFit(slope, intercept)


def ols_slope(values: Sequence[float]) -> LineFit:
    """Least-squares line against step index 0..n-1."""
    x = _as_complete(values, 2, "ols_slope")
    t = np.arange(x.size, dtype=float)
    tc = t - t.mean()
    slope = float(np.dot(tc, x - x.mean()) / np.dot(tc, tc))
    return LineFit(slope, float(x.mean() - slope * t.mean()))


# ----------------------------------------------------------------------------
# Pettitt
# ----------------------------------------------------------------------------

class BreakMeans(NamedTuple):
    mean_before: float
    mean_after: float
    diff: float


@dataclass(frozen=True)
class BreakTestResult:
    """Pettitt change-point result.

    ``break_index`` is 1-based: the break falls after the ``break_index``-th
    value, so ``mean_before`` averages the first ``break_index`` values.
    ``break_date`` is the key of that last pre-break value when keys were
    given.
    """

    u_series: tuple
    k_stat: int
    break_index: int
    break_date: Optional[object]
    p_approx: float
    alpha: float
    mean_before: float
    mean_after: float
    mean_diff: float
    n: int

    @property
    def significant(self) -> bool:
        return self.p_approx < self.alpha


def pettitt_probability(k: float, n: int) -> float:
    """``min(1, 2 exp(-6 k^2 / (n^3 + n^2)))``."""
    return min(1.0, 2.0 * math.exp(-6.0 * k * k / (n ** 3 + n ** 2)))


def pettitt_u(values) -> np.ndarray:
    """``U_t = sum_{i<=t} sum_{j>t} sgn(x_i - x_j)`` for t = 1..n-1.

    Uses ``U_t = U_{t-1} + sum_j sgn(x_t - x_j)`` (sum over all j).
    """
    x = np.asarray(values, dtype=float)
    row_sums = np.sign(x[:, None] - x[None, :]).astype(np.int64).sum(axis=1)
    return np.cumsum(row_sums)[:-1]


def break_period_means(values: Sequence[float], break_index: int) -> BreakMeans:
    """Means of ``values[:break_index]`` and ``values[break_index:]``."""
    x = np.asarray(values, dtype=float)
    if not 1 <= break_index < x.size:
        raise UsageError(f"break_index must be in [1, {x.size - 1}], got {break_index}")
    before = float(np.mean(x[:break_index]))
    after = float(np.mean(x[break_index:]))
    return BreakMeans(before, after, after - before)


def pettitt(values: Sequence[float], alpha: float = 0.05,
            keys: Optional[Sequence] = None) -> BreakTestResult:
    """Pettitt test for a single change point in location.

    The break is placed at the earliest ``t`` maximizing ``|U_t|``.
    """
    x = _as_complete(values, 4, "pettitt")
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"alpha must be in (0, 1), got {alpha}")
    if keys is not None and len(keys) != x.size:
        raise UsageError("keys must have the same length as values")
    u = pettitt_u(x)
    absu = np.abs(u)
    pos = int(np.argmax(absu))  # first occurrence on ties
    k = int(absu[pos])
    t = pos + 1
    means = break_period_means(x, t)
    return BreakTestResult(
        u_series=tuple(int(v) for v in u),
        k_stat=k,
        break_index=t,
        break_date=None if keys is None else keys[t - 1],
        p_approx=pettitt_probability(k, x.size),
        alpha=alpha,
        mean_before=means.mean_before,
        mean_after=means.mean_after,
        mean_diff=means.diff,
        n=int(x.size),
    )


# ----------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1995, AS R94)
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalityTestResult:
    w: float
    p: float
    n: int

    def accepts_normality(self, alpha: float = 0.05) -> bool:
        return self.p > alpha


# AS R94 polynomial coefficients, ascending powers
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coef, x):
    result = 0.0
    for c in reversed(coef):
        result = result * x + c
    return result


def shapiro_wilk_coefficients(n: int) -> np.ndarray:
    """Full antisymmetric weight vector ``a`` (ascending order, sum a^2 = 1).

    The two outermost weights come from Royston's polynomial corrections;
    the inner ones are normalized Blom scores.
    """
    if n < 3:
        raise InsufficientDataError("shapiro_wilk needs n >= 3")
    half = n // 2
    a = np.zeros(half)
    if n == 3:
        a[0] = math.sqrt(0.5)
    else:
        m = -special.ndtri((np.arange(1, half + 1) - 0.375) / (n + 0.25))
        summ2 = 2.0 * float(np.sum(m * m))
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) + m[0] / ssumm2
        if n > 5:
            a2 = m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2)
                            / (1.0 - 2.0 * a1 ** 2 - 2.0 * a2 ** 2))
            a[1] = a2
            first = 2
        else:
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 ** 2))
            first = 1
        a[0] = a1
        a[first:] = m[first:] / fac
    full = np.zeros(n)
    full[:half] = -a
    full[n - half:] = a[::-1]
    return full


def _shapiro_wilk_pvalue(w: float, n: int) -> float:
    if n == 3:
        # exact for n = 3: (6/pi) * (asin(sqrt(W)) - pi/3)
        return max(0.0, min(1.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0)))
    w1 = 1.0 - w
    if w1 <= 0.0:
        return 1.0
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return 1e-99
        y = -math.log(gamma - y)
        mean = _poly(_C3, n)
        sd = math.exp(_poly(_C4, n))
    else:
        lnn = math.log(n)
        mean = _poly(_C5, lnn)
        sd = math.exp(_poly(_C6, lnn))
    return min(1.0, normal_sf((y - mean) / sd))


def shapiro_wilk(values: Sequence[float]) -> NormalityTestResult:
    """Shapiro-Wilk W with Royston's coefficients and p-value (AS R94).

    ``W = (sum a_i x_(i))^2 / sum (x_i - mean)^2`` on the sorted sample.
    Normality is accepted at level alpha when ``p > alpha``.

    Raises
    ------
    InsufficientDataError
        ``n < 3`` or ``n > 5000`` (outside the approximation's range).
    DegenerateSampleError
        All values equal.
    """
    x = _as_complete(values, 3, "shapiro_wilk")
    n = x.size
    if n > 5000:
        raise InsufficientDataError(f"shapiro_wilk supports 3 <= n <= 5000, got {n}")
    x = np.sort(x)
    span = x[-1] - x[0]
    if span <= 0.0 or span < 1e-19 * max(1.0, abs(x[0])):
        raise DegenerateSampleError("shapiro_wilk: sample has zero variance")
    # centre and scale first: W is affine invariant and this keeps the sums well conditioned
    xs = (x - x.mean()) / span
    a = shapiro_wilk_coefficients(n)
    ssq = float(np.dot(xs, xs))
    w = float(np.dot(a, xs)) ** 2 / ssq
    w = min(w, 1.0)
    return NormalityTestResult(w, _shapiro_wilk_pvalue(w, n), int(n))


# ----------------------------------------------------------------------------
# Q-Q, anomalies, correlation
# ----------------------------------------------------------------------------

class QQPoint(NamedTuple):
    theoretical: float
    observed: float


def blom_positions(n: int) -> np.ndarray:
    return (np.arange(1, n + 1) - 0.375) / (n + 0.25)


def qq_normal(values: Sequence[float]) -> list:
    """Normal Q-Q pairs against the fitted normal.

    Theoretical quantile ``i`` is ``mean + sd * Phi^-1((i - 3/8)/(n + 1/4))``
    with the sample mean and sample standard deviation (ddof=1); observed
    values are sorted ascending.
    """
    x = _as_complete(values, 2, "qq_normal")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("qq_normal: sample has zero variance")
    theo = x.mean() + sd * special.ndtri(blom_positions(x.size))
    return [QQPoint(float(t), float(o)) for t, o in zip(theo, np.sort(x))]


def standardized_anomalies(values: Sequence[float]) -> np.ndarray:
    """``(x - mean) / std`` with the population standard deviation."""
    x = _as_complete(values, 2, "standardized_anomalies")
    sd = float(np.std(x))
    if sd == 0.0:
        raise DegenerateSampleError("standardized_anomalies: sample has zero variance")
    return (x - x.mean()) / sd


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple
    r: np.ndarray
    p: np.ndarray
    n_pairs: np.ndarray

    def cell(self, a: str, b: str):
        i, j = self.labels.index(a), self.labels.index(b)
        return float(self.r[i, j]), float(self.p[i, j]), int(self.n_pairs[i, j])


def pearson_r(x, y) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc)))
    if denom == 0.0:
        return math.nan
    return max(-1.0, min(1.0, float(np.dot(xc, yc)) / denom))


def pearson_pvalue(r: float, n: int) -> float:
    """Two-sided p of ``t = r sqrt((n-2)/(1-r^2))`` on n-2 degrees of freedom."""
    if math.isnan(r):
        return math.nan
    if abs(r) >= 1.0:
        return 0.0
    df = n - 2
    t = abs(r) * math.sqrt(df / (1.0 - r * r))
    return float(min(1.0, 2.0 * special.stdtr(df, -t)))


def pearson_matrix(named_series: Mapping[str, Sequence[float]], pairwise_complete: bool = True,
                   min_pairs: int = 3) -> CorrelationMatrix:
    """Pearson correlations with two-sided significance.

    With ``pairwise_complete`` each pair uses the days where both series are
    present; otherwise only days where every series is present. Cells with
    fewer than ``min_pairs`` shared observations (or a constant series) are
    NaN.
    """
    if len(named_series) < 2:
        raise InsufficientDataError("pearson_matrix needs at least 2 series")
    labels = tuple(named_series)
    data = [np.asarray(named_series[k], dtype=float) for k in labels]
    length = data[0].size
    if any(d.shape != (length,) for d in data):
        raise UsageError("all series must be one-dimensional with equal length")
    k = len(labels)
    ok = [~np.isnan(d) for d in data]
    if not pairwise_complete:
        common = np.logical_and.reduce(ok)
        ok = [common] * k
    r = np.full((k, k), np.nan)
    p = np.full((k, k), np.nan)
    n_pairs = np.zeros((k, k), dtype=int)
    for i in range(k):
        for j in range(i, k):
            mask = ok[i] & ok[j]
            n = int(mask.sum())
            n_pairs[i, j] = n_pairs[j, i] = n
            if n < min_pairs:
                continue
            if i == j:
                rij = 1.0 if np.ptp(data[i][mask]) > 0 else math.nan
                pij = 0.0 if rij == 1.0 else math.nan
            else:
                rij = pearson_r(data[i][mask], data[j][mask])
                pij = pearson_pvalue(rij, n)
            r[i, j] = r[j, i] = rij
            p[i, j] = p[j, i] = pij
    return CorrelationMatrix(labels, r, p, n_pairs)
