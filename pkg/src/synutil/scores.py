"""Rank and threshold statistics of propensity scores.

Every function takes distinct-or-repeated score values ``p`` together with
original and synthetic masses ``w0`` and ``w1`` at each value.  Record-level
scores pass 0/1 indicator masses; tables pass cell counts.  Scores closer
than ``tie_tol`` are treated as one tied value, which lets fitted scores
(subject to solver round-off) match their exact tabular counterparts.
"""
from __future__ import annotations

import numpy as np


def group_ties(p, w0, w1, tie_tol: float = 0.0):
    """Collapse to sorted distinct score values with summed masses.

    Consecutive sorted values whose gap is ``<= tie_tol`` join one group; the
    group's representative is its first (smallest) value.
    """
    p = np.asarray(p, dtype=np.float64)
    w0 = np.asarray(w0, dtype=np.float64)
    w1 = np.asarray(w1, dtype=np.float64)
    order = np.argsort(p, kind="stable")
    ps = p[order]
    if ps.size == 0:
        return ps, ps.copy(), ps.copy()
    starts = np.empty(ps.size, dtype=bool)
    starts[0] = True
    starts[1:] = np.diff(ps) > tie_tol
    gid = np.cumsum(starts) - 1
    ng = int(gid[-1]) + 1
    g0 = np.bincount(gid, weights=w0[order], minlength=ng)
    g1 = np.bincount(gid, weights=w1[order], minlength=ng)
    return ps[starts], g0, g1


def po50(p, w0, w1, c: float, tie_tol: float = 0.0) -> float:
    """Percentage correctly classified by thresholding at ``c``, minus 50.

    Scores tied with ``c`` carry no information and count as half correct,
    so an uninformative model scores exactly 0.
    """
    p = np.asarray(p, dtype=np.float64)
    w0 = np.asarray(w0, dtype=np.float64)
    w1 = np.asarray(w1, dtype=np.float64)
    total = w0.sum() + w1.sum()
    if total <= 0:
        return 0.0
    tie = np.abs(p - c) <= tie_tol
    above = (p > c) & ~tie
    below = (p < c) & ~tie
    correct = w1[above].sum() + w0[below].sum() + 0.5 * (w0[tie].sum() + w1[tie].sum())
    return float(100.0 * correct / total - 50.0)


def specks(p, w0, w1, tie_tol: float = 0.0) -> float:
    """Kolmogorov-Smirnov distance between the mass-weighted score CDFs."""
    _, g0, g1 = group_ties(p, w0, w1, tie_tol)
    t0, t1 = g0.sum(), g1.sum()
    if t0 <= 0 or t1 <= 0:
        return 0.0
    return float(np.max(np.abs(np.cumsum(g0) / t0 - np.cumsum(g1) / t1), initial=0.0))


def rank_sum(p, w0, w1, tie_tol: float = 0.0) -> float:
    """Sum of midranks of the synthetic mass in the pooled ascending ordering."""
    _, g0, g1 = group_ties(p, w0, w1, tie_tol)
    size = g0 + g1
    upper = np.cumsum(size)
    mid = upper - (size - 1.0) / 2.0
    return float(np.dot(g1, mid))
