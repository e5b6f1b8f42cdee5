"""Minimal-cost noncrossing perfect matchings of points in circular order.

Points ``0..n-1`` sit in counter-clockwise order on a convex curve, so a
matching is noncrossing exactly when it is nested as a bracket sequence of the
linear order obtained by cutting the circle before point 0.  Each chord
``(i, j)`` carries a cost and an area contribution; the objective is
lexicographic: least total cost, then (within ``tol``) largest (or smallest)
total area.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["MatchingResult", "dp_matching", "brute_force_matching", "enumerate_matchings", "ordered_sum"]


@dataclass
class MatchingResult:
    pairs: list
    cost: float
    area: float
    tie: bool = False
    alt_pairs: list = field(default_factory=list)


def ordered_sum(weights, pairs):
    """Sum ``weights[i, j]`` over chords sorted by their first index."""
    total = 0.0
    for i, j in sorted(pairs):
        total += float(weights[i, j])
    return total


def _dp(C, A, tol, maximize):
    n = C.shape[0]
    B = np.zeros((n + 1, n + 1))
    BA = np.zeros((n + 1, n + 1))
    choice = np.full((n + 1, n + 1), -1, dtype=int)
    sign = 1.0 if maximize else -1.0
    for ell in range(2, n + 1, 2):
        i = np.arange(0, n - ell + 1)
        j = i + ell
        k = i[:, None] + np.arange(1, ell, 2)[None, :]
        ii = np.broadcast_to(i[:, None], k.shape)
        jj = np.broadcast_to(j[:, None], k.shape)
        cost = C[ii, k] + B[ii + 1, k] + B[k + 1, jj]
        area = A[ii, k] + BA[ii + 1, k] + BA[k + 1, jj]
        cmin = cost.min(axis=1, keepdims=True)
        score = np.where(cost <= cmin + tol, sign * area, -np.inf)
        pick = np.argmax(score, axis=1)
        rows = np.arange(len(i))
        B[i, j] = cost[rows, pick]
        BA[i, j] = area[rows, pick]
        choice[i, j] = k[rows, pick]
    pairs = []
    stack = [(0, n)]
    while stack:
        a, b = stack.pop()
        if b - a < 2:
            continue
        kk = int(choice[a, b])
        pairs.append((a, kk))
        stack.append((a + 1, kk))
        stack.append((kk + 1, b))
    return sorted(pairs)


def dp_matching(C, A, tol=0.0, base_area=0.0, detect_ties=True):
    """Interval dynamic programme, O(n^3) work vectorised over interval starts.

    Parameters
    ----------
    C, A : ndarray (n, n)
        Chord cost and signed area contribution, read for ``i < j`` only.
    tol : float
        Costs within ``tol`` of the minimum count as tied.
    base_area : float
        Area term independent of the matching (outer face).
    """
    C = np.asarray(C, float)
    A = np.asarray(A, float)
    n = C.shape[0]
    if n % 2:
        raise ValueError("odd number of points")
    if n == 0:
        return MatchingResult([], 0.0, float(base_area))
    pairs = _dp(C, A, tol, True)
    res = MatchingResult(pairs, ordered_sum(C, pairs), base_area + ordered_sum(A, pairs))
    if detect_ties and n >= 4:
        alt = _dp(C, A, tol, False)
        if alt != pairs:
            res.tie = True
            res.alt_pairs = alt
    return res


def enumerate_matchings(n):
    """All noncrossing perfect matchings of ``0..n-1`` (Catalan many)."""
    def rec(a, b):
        if a >= b:
            yield []
            return
        for k in range(a + 1, b, 2):
            for left in rec(a + 1, k):
                for right in rec(k + 1, b):
                    yield [(a, k)] + left + right
    yield from rec(0, n)


def brute_force_matching(C, A, tol=0.0, base_area=0.0):
    """Exhaustive reference for :func:`dp_matching` using the same tie rule."""
    C = np.asarray(C, float)
    A = np.asarray(A, float)
    cands = []
    for m in enumerate_matchings(C.shape[0]):
        m = sorted(m)
        cands.append((ordered_sum(C, m), ordered_sum(A, m), m))
    cmin = min(c for c, _, _ in cands)
    near = [c for c in cands if c[0] <= cmin + tol]
    best = max(near, key=lambda c: c[1])
    worst = min(near, key=lambda c: c[1])
    res = MatchingResult(best[2], best[0], base_area + best[1])
    if worst[2] != best[2]:
        res.tie = True
        res.alt_pairs = worst[2]
    return res
