"""Nonparametric test battery used by the behavior and performance reports.

All p-values are computed in-repo: chi-square upper tails go through the
regularized upper incomplete gamma function, normal tails through erfc.
Tie handling follows the classical average-rank convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import median
from typing import Sequence

from ..errors import DegenerateData, ZeroExpectedCount

_EPS = 1e-16
_MAX_ITER = 600


def _gamma_p_series(a: float, x: float) -> float:
    # Series expansion of the lower regularized gamma, valid for x < a + 1.
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # Lentz continued fraction for the upper regularized gamma, x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_sf(statistic: float, df: int) -> float:
    """Upper tail of the chi-square distribution with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if statistic < 0:
        raise ValueError("chi-square statistic must be non-negative")
    return gammainc_upper(df / 2.0, statistic / 2.0)


def normal_sf(z: float) -> float:
    """Upper tail of the standard normal distribution."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def rankdata(values: Sequence[float]) -> list[float]:
    """Ranks (1-based) with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # average of 1-based positions i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _tie_counts(values: Sequence[float]) -> list[int]:
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return [c for c in counts.values() if c > 1]


@dataclass(frozen=True)
class PairwiseComparison:
    """One post hoc pair: labels, test statistic, raw and corrected p."""

    pair: tuple[str, str]
    statistic: float
    p_raw: float
    p_corrected: float


@dataclass(frozen=True)
class StatTestResult:
    test_name: str
    statistic: float
    p_value: float
    posthoc: tuple[PairwiseComparison, ...] | None = None
    details: dict = field(default_factory=dict)


def _check_groups(groups: Sequence[Sequence[float]], min_total: int = 2) -> None:
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise ValueError("every group must be non-empty")
    if sum(len(g) for g in groups) < min_total:
        raise ValueError(f"need at least {min_total} pooled observations")


def _pearson_chi2(table: Sequence[Sequence[float]], yates: bool = False) -> tuple[float, int]:
    rows = len(table)
    cols = len(table[0])
    row_tot = [sum(r) for r in table]
    col_tot = [sum(table[i][j] for i in range(rows)) for j in range(cols)]
    total = sum(row_tot)
    stat = 0.0
    for i in range(rows):
        for j in range(cols):
            expected = row_tot[i] * col_tot[j] / total
            if expected == 0:
                raise ZeroExpectedCount(
                    f"expected count is zero at cell ({i}, {j})"
                )
            diff = abs(table[i][j] - expected)
            if yates and rows == 2 and cols == 2:
                diff = max(0.0, diff - 0.5)
            stat += diff * diff / expected
    return stat, (rows - 1) * (cols - 1)


def chi_square_independence(
    table: Sequence[Sequence[float]], yates: bool = False
) -> StatTestResult:
    """Pearson chi-square test of independence on an r x c count table.

    No continuity correction by default; pass ``yates=True`` to apply it on
    2x2 tables.
    """
    if len(table) < 2 or any(len(r) != len(table[0]) for r in table) or len(table[0]) < 2:
        raise ValueError("table must be at least 2x2 and rectangular")
    if any(cell < 0 for row in table for cell in row):
        raise ValueError("counts must be non-negative")
    stat, df = _pearson_chi2(table, yates=yates)
    return StatTestResult(
        test_name="chi-square-independence",
        statistic=stat,
        p_value=chi2_sf(stat, df),
        details={"df": df, "yates": yates},
    )


def moods_median_test(groups: Sequence[Sequence[float]]) -> StatTestResult:
    """Mood's median test: do the groups share a common median?

    Counts per group above vs at-or-below the grand median, then applies a
    Pearson chi-square with (k - 1) degrees of freedom. Raises DegenerateData
    when the pooled values are all equal or when nothing lies strictly above
    the grand median (zero-margin table).
    """
    _check_groups(groups)
    pooled = [v for g in groups for v in g]
    if min(pooled) == max(pooled):
        raise DegenerateData("pooled values are all equal")
    grand = median(pooled)
    above = [sum(1 for v in g if v > grand) for g in groups]
    at_or_below = [len(g) - a for g, a in zip(groups, above)]
    if sum(above) == 0 or sum(at_or_below) == 0:
        raise DegenerateData("grand median splits no observations")
    stat, df = _pearson_chi2([above, at_or_below])
    return StatTestResult(
        test_name="moods-median",
        statistic=stat,
        p_value=chi2_sf(stat, df),
        details={
            "df": df,
            "grand_median": grand,
            "table": [list(above), list(at_or_below)],
        },
    )


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> StatTestResult:
    """Kruskal-Wallis H test with average-rank tie correction.

    H = 12 / (N(N+1)) * sum(R_i^2 / n_i) - 3(N+1), divided by the tie
    correction 1 - sum(t^3 - t) / (N^3 - N). Upper-tail p comes from the
    chi-square distribution with (k - 1) degrees of freedom.
    """
    _check_groups(groups, min_total=3)
    pooled = [v for g in groups for v in g]
    n = len(pooled)
    ranks = rankdata(pooled)
    h = 0.0
    offset = 0
    for g in groups:
        r_sum = sum(ranks[offset : offset + len(g)])
        h += r_sum * r_sum / len(g)
        offset += len(g)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    correction = 1.0 - sum(t**3 - t for t in _tie_counts(pooled)) / (n**3 - n)
    if correction <= 0.0:
        raise DegenerateData("all pooled values are tied")
    h /= correction
    h = max(0.0, h)  # guard tiny negative float noise at H ~ 0
    df = len(groups) - 1
    return StatTestResult(
        test_name="kruskal-wallis",
        statistic=h,
        p_value=chi2_sf(h, df),
        details={"df": df},
    )


def dunn_posthoc(
    groups: Sequence[Sequence[float]],
    labels: Sequence[str] | None = None,
) -> list[PairwiseComparison]:
    """Dunn's pairwise z tests on pooled ranks, Bonferroni-corrected.

    z_ij = (mean rank_i - mean rank_j) / sqrt((N(N+1)/12 - T)(1/n_i + 1/n_j))
    with tie term T = sum(t^3 - t) / (12(N - 1)); the corrected p multiplies
    the two-sided raw p by the number of pairs, clamped at 1.
    """
    _check_groups(groups, min_total=3)
    k = len(groups)
    names = list(labels) if labels is not None else [str(i) for i in range(k)]
    if len(names) != k:
        raise ValueError("labels must match the number of groups")
    pooled = [v for g in groups for v in g]
    n = len(pooled)
    ranks = rankdata(pooled)
    mean_ranks = []
    offset = 0
    for g in groups:
        mean_ranks.append(sum(ranks[offset : offset + len(g)]) / len(g))
        offset += len(g)
    tie_term = sum(t**3 - t for t in _tie_counts(pooled)) / (12.0 * (n - 1))
    var_base = n * (n + 1) / 12.0 - tie_term
    if var_base <= 0.0:
        raise DegenerateData("all pooled values are tied")
    n_pairs = k * (k - 1) // 2
    results = []
    for i in range(k):
        for j in range(i + 1, k):
            se = math.sqrt(var_base * (1.0 / len(groups[i]) + 1.0 / len(groups[j])))
            z = (mean_ranks[i] - mean_ranks[j]) / se
            p_raw = 2.0 * normal_sf(abs(z))
            p_raw = min(1.0, p_raw)
            results.append(
                PairwiseComparison(
                    pair=(names[i], names[j]),
                    statistic=z,
                    p_raw=p_raw,
                    p_corrected=min(1.0, p_raw * n_pairs),
                )
            )
    return results


def bonferroni(p_values: Sequence[float], m: int) -> list[float]:
    """Bonferroni correction: each p becomes min(1, p * m)."""
    if m < len(p_values):
        raise ValueError("m must be at least the number of p-values")
    return [min(1.0, p * m) for p in p_values]


def binomial_se(p: float, n: int) -> float:
    """Standard error of a proportion: sqrt(p(1-p)/n)."""
    if n <= 0:
        raise ValueError("n must be positive")
    return math.sqrt(p * (1.0 - p) / n)
