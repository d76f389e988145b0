"""Exact two-sided Wilcoxon signed-rank test for small paired samples.

Zero differences are dropped, ties in |d| receive average ranks, and
the p-value enumerates all 2^n sign patterns of the rank values: the
two-sided p counts patterns with W+ at or below min(W+, W-) plus those
at or above max(W+, W-).
"""

from dataclasses import dataclass

import numpy as np

MAX_EXACT_N = 20


@dataclass
class WilcoxonResult:
    p_two_sided: float
    w_plus: float
    w_minus: float
    direction: str  # "plus", "equal", or "minus" (sign of mean difference)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def wilcoxon_exact(a, b, alpha: float = 0.10) -> WilcoxonResult:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("wilcoxon_exact expects two equal-length 1-D samples")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")

    d = a - b
    mean_d = d.mean() if d.size else 0.0
    if mean_d > 0:
        direction = "plus"
    elif mean_d < 0:
        direction = "minus"
    else:
        direction = "equal"

    dd = d[d != 0.0]
    n = dd.size
    if n == 0:
        return WilcoxonResult(p_two_sided=1.0, w_plus=0.0, w_minus=0.0,
                              direction="equal" if (d == 0).all() else direction)
    if n > MAX_EXACT_N:
        raise ValueError(f"exact enumeration supports n <= {MAX_EXACT_N}, got {n}")

    ranks = _average_ranks(np.abs(dd))
    w_plus = float(ranks[dd > 0].sum())
    w_minus = float(ranks[dd < 0].sum())

    # distribution of W+ over all 2^n sign patterns
    sums = np.zeros(1)
    for r in ranks:
        sums = np.concatenate([sums, sums + r])
    eps = 1e-9
    w_lo, w_hi = min(w_plus, w_minus), max(w_plus, w_minus)
    extreme = (sums <= w_lo + eps).sum() + (sums >= w_hi - eps).sum()
    p = min(1.0, float(extreme) / sums.size)
    return WilcoxonResult(p_two_sided=p, w_plus=w_plus, w_minus=w_minus,
                          direction=direction)
