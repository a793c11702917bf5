# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; same contracts as _kernels_py."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef double G3X0 = 0.5 - 0.3872983346207417
cdef double G3X1 = 0.5
cdef double G3X2 = 0.5 + 0.3872983346207417
cdef double G3W0 = 5.0 / 18.0
cdef double G3W1 = 8.0 / 18.0
cdef double G3W2 = 5.0 / 18.0


cdef inline double _inner(double z, double b, double b0, double b1) nogil:
    cdef double w0 = z - b0
    cdef double w1 = z - b1
    if w0 * w1 >= 0.0:
        return b * fabs(w0 + w1) * 0.5
    return b * (w0 * w0 + w1 * w1) / (2.0 * fabs(w0 - w1))


cdef double _pair(double a, double a0, double a1, double b, double b0, double b1) nogil:
    cdef double cuts[4]
    cdef int nc = 2
    cdef double da, th, lo, hi, h, acc, total, tmp
    cdef int k, j
    if a <= 0.0 or b <= 0.0:
        return 0.0
    cuts[0] = 0.0
    cuts[1] = 1.0
    da = a1 - a0
    if da != 0.0:
        th = (b0 - a0) / da
        if 0.0 < th < 1.0:
            cuts[nc] = th
            nc += 1
        th = (b1 - a0) / da
        if 0.0 < th < 1.0:
            cuts[nc] = th
            nc += 1
    # insertion sort, at most 4 entries
    for k in range(1, nc):
        tmp = cuts[k]
        j = k - 1
        while j >= 0 and cuts[j] > tmp:
            cuts[j + 1] = cuts[j]
            j -= 1
        cuts[j + 1] = tmp
    total = 0.0
    for k in range(nc - 1):
        lo = cuts[k]
        hi = cuts[k + 1]
        h = hi - lo
        if h <= 0.0:
            continue
        acc = G3W0 * _inner(a0 + da * (lo + h * G3X0), b, b0, b1)
        acc += G3W1 * _inner(a0 + da * (lo + h * G3X1), b, b0, b1)
        acc += G3W2 * _inner(a0 + da * (lo + h * G3X2), b, b0, b1)
        total += acc * h
    return total * a


def pair_integral(double a, double a0, double a1, double b, double b0, double b1):
    return _pair(a, a0, a1, b, b0, b1)


def pair_sum(double a, double a0, double a1, bs, b0s, b1s):
    cdef double[::1] B = np.ascontiguousarray(bs, dtype=np.float64)
    cdef double[::1] B0 = np.ascontiguousarray(b0s, dtype=np.float64)
    cdef double[::1] B1 = np.ascontiguousarray(b1s, dtype=np.float64)
    cdef Py_ssize_t j, m = B.shape[0]
    cdef double total = 0.0
    for j in range(m):
        total += _pair(a, a0, a1, B[j], B0[j], B1[j])
    return total


def quadratic_full(sizes, s0, s1):
    cdef double[::1] S = np.ascontiguousarray(sizes, dtype=np.float64)
    cdef double[::1] A0 = np.ascontiguousarray(s0, dtype=np.float64)
    cdef double[::1] A1 = np.ascontiguousarray(s1, dtype=np.float64)
    cdef Py_ssize_t i, j, m = S.shape[0]
    cdef double total = 0.0
    for i in range(m):
        total += _pair(S[i], A0[i], A1[i], S[i], A0[i], A1[i])
        for j in range(i + 1, m):
            total += 2.0 * _pair(S[i], A0[i], A1[i], S[j], A0[j], A1[j])
    return total


def approaching_quadratic(sizes, s0, s1, speeds):
    cdef double[::1] S = np.ascontiguousarray(sizes, dtype=np.float64)
    cdef double[::1] A0 = np.ascontiguousarray(s0, dtype=np.float64)
    cdef double[::1] A1 = np.ascontiguousarray(s1, dtype=np.float64)
    cdef double[::1] V = np.ascontiguousarray(speeds, dtype=np.float64)
    cdef Py_ssize_t i, j, m = S.shape[0]
    cdef double total = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            if V[i] > V[j]:
                total += _pair(S[i], A0[i], A1[i], S[j], A0[j], A1[j])
    return total


def linear_term(fams, sizes, int nfam):
    cdef long[::1] F = np.ascontiguousarray(fams, dtype=np.int64)
    cdef double[::1] S = np.ascontiguousarray(sizes, dtype=np.float64)
    cdef double[::1] acc = np.zeros(nfam + 2, dtype=np.float64)
    cdef Py_ssize_t k, m = S.shape[0]
    cdef int g, f
    cdef double total = 0.0, right
    for k in range(m):
        f = F[k]
        right = 0.0
        for g in range(f + 1, nfam + 2):
            right += acc[g]
        total += S[k] * right
        acc[f] += S[k]
    return total


def pareto_knapsack(costs, masses, budgets):
    cdef double[::1] W = np.ascontiguousarray(costs, dtype=np.float64)
    cdef double[::1] M = np.ascontiguousarray(masses, dtype=np.float64)
    cdef double[::1] Bd = np.ascontiguousarray(budgets, dtype=np.float64)
    cdef Py_ssize_t n = W.shape[0], nb = Bd.shape[0]
    cdef double cap = 0.0
    cdef Py_ssize_t k, j, i, p, q, nf, nn
    cdef double c, best, mm
    if nb:
        cap = np.max(np.asarray(Bd))
    fc = np.zeros(1)
    fm = np.zeros(1)
    for k in range(n):
        nf = fc.shape[0]
        shc = fc + W[k]
        shm = fm + M[k]
        keep = shc <= cap
        cc = np.concatenate([fc, shc[keep]])
        cm = np.concatenate([fm, shm[keep]])
        order = np.lexsort((-cm, cc))
        cc = cc[order]
        cm = cm[order]
        sel = np.empty(cc.shape[0], dtype=bool)
        best = -1.0
        for i in range(cc.shape[0]):
            mm = cm[i]
            if mm > best:
                sel[i] = True
                best = mm
            else:
                sel[i] = False
        fc = cc[sel]
        fm = cm[sel]
    out = np.zeros(nb)
    for i in range(nb):
        best = 0.0
        for j in range(fc.shape[0]):
            if fc[j] <= Bd[i] and fm[j] > best:
                best = fm[j]
        out[i] = best
    return out
