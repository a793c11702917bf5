"""Pure-Python versions of the hot kernels.

Used when the compiled extension is unavailable or FTBALANCE_PURE=1.
"""
from __future__ import annotations

import math

import numpy as np

_G3_X = (0.5 - math.sqrt(15.0) / 10.0, 0.5, 0.5 + math.sqrt(15.0) / 10.0)
_G3_W = (5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0)


def _inner(z, b, b0, b1):
    w0 = z - b0
    w1 = z - b1
    if w0 * w1 >= 0.0:
        return b * abs(w0 + w1) * 0.5
    return b * (w0 * w0 + w1 * w1) / (2.0 * abs(w0 - w1))


def pair_integral(a, a0, a1, b, b0, b1):
    """int_0^a int_0^b |f(t) - g(s)| ds dt for f, g affine from a0 to a1 on
    [0, a] and from b0 to b1 on [0, b]. Exact up to rounding."""
    if a <= 0.0 or b <= 0.0:
        return 0.0
    cuts = [0.0, 1.0]
    da = a1 - a0
    if da != 0.0:
        for c in (b0, b1):
            th = (c - a0) / da
            if 0.0 < th < 1.0:
                cuts.append(th)
    cuts.sort()
    total = 0.0
    for k in range(len(cuts) - 1):
        lo = cuts[k]
        hi = cuts[k + 1]
        h = hi - lo
        if h <= 0.0:
            continue
        acc = 0.0
        for j in range(3):
            th = lo + h * _G3_X[j]
            acc += _G3_W[j] * _inner(a0 + da * th, b, b0, b1)
        total += acc * h
    return total * a


def pair_sum(a, a0, a1, bs, b0s, b1s):
    total = 0.0
    for j in range(len(bs)):
        total += pair_integral(a, a0, a1, bs[j], b0s[j], b1s[j])
    return total


def quadratic_full(sizes, s0, s1):
    """Sum of pair_integral over all ordered pairs (i, j), diagonal included."""
    m = len(sizes)
    total = 0.0
    for i in range(m):
        total += pair_integral(sizes[i], s0[i], s1[i], sizes[i], s0[i], s1[i])
        for j in range(i + 1, m):
            total += 2.0 * pair_integral(sizes[i], s0[i], s1[i], sizes[j], s0[j], s1[j])
    return total


def approaching_quadratic(sizes, s0, s1, speeds):
    """Sum over unordered pairs i < j (list order) with speeds[i] > speeds[j]."""
    m = len(sizes)
    total = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            if speeds[i] > speeds[j]:
                total += pair_integral(sizes[i], s0[i], s1[i], sizes[j], s0[j], s1[j])
    return total


def linear_term(fams, sizes, nfam):
    """Sum |s_p||s_q| over list-ordered pairs p before q with fam[q] < fam[p]."""
    acc = [0.0] * (nfam + 2)
    total = 0.0
    for k in range(len(fams)):
        f = fams[k]
        s = sizes[k]
        right = 0.0
        for g in range(f + 1, nfam + 2):
            right += acc[g]
        total += s * right
        acc[f] += s
    return total


def pareto_knapsack(costs, masses, budgets):
    """Exact 0/1 knapsack maxima for each budget via a Pareto frontier.

    Items are added in index order so that subset sums are formed in the
    same order as a brute-force enumeration.
    """
    cap = max(budgets) if len(budgets) else 0.0
    fc = [0.0]
    fm = [0.0]
    for k in range(len(costs)):
        w = costs[k]
        m = masses[k]
        cand = []
        for j in range(len(fc)):
            cand.append((fc[j], -fm[j]))
            c = fc[j] + w
            if c <= cap:
                cand.append((c, -(fm[j] + m)))
        cand.sort()
        nc = []
        nm = []
        best = -1.0
        for c, negm in cand:
            mm = -negm
            if mm > best:
                nc.append(c)
                nm.append(mm)
                best = mm
        fc, fm = nc, nm
    out = np.zeros(len(budgets))
    for b in range(len(budgets)):
        best = 0.0
        for j in range(len(fc)):
            if fc[j] <= budgets[b] and fm[j] > best:
                best = fm[j]
        out[b] = best
    return out
