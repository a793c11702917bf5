"""Independent oracles shared by several test modules."""
import numpy as np
import sympy as sp


def subset_sums(v):
    """All 2^n subset sums, each accumulated in ascending index order."""
    s = np.zeros(1)
    for a in v:
        s = np.concatenate([s, s + a])
    return s


def brute_proxy(x, w, scales):
    """Concentration profile by enumeration: every atom is charged its
    nearest-neighbour gap and every subset of atoms is tried."""
    order = np.argsort(x, kind="stable")
    x, w = np.asarray(x)[order], np.abs(np.asarray(w))[order]
    keep = w > 0
    x, w = x[keep], w[keep]
    n = x.size
    if n == 0:
        return np.zeros(len(scales))
    if n == 1:
        cost = np.zeros(1)
    else:
        gaps = x[1:] - x[:-1]
        cost = np.array([min(gaps[k - 1] if k > 0 else np.inf, gaps[k] if k < n - 1 else np.inf)
                         for k in range(n)])
    C, M = subset_sums(cost), subset_sums(w)
    out = []
    for eta in scales:
        ok = C <= eta * (1 + 1e-12) + 1e-15
        out.append(M[ok].max())
    return np.array(out)


def sympy_scalar_order(flux_expr, u0, M):
    """pi^(k) = d^k lambda / du^k with lambda = F'; first k with a nonzero value."""
    u = sp.symbols("u")
    lam = sp.diff(flux_expr(u), u)
    for k in range(1, M + 1):
        lam = sp.diff(lam, u)
        if abs(float(lam.subs(u, u0))) > 1e-6:
            return k
    return "degenerate"


def sympy_triangular_first_order(u0, v0, M):
    """Family 1 of F = (0, (1 + v + u) v): derivatives of lambda_1 along r_1."""
    u, v = sp.symbols("u v")
    J = sp.Matrix([[0, 0], [v, 1 + 2 * v + u]])
    lam1 = 0
    assert sp.simplify(J.det()) == 0  # lambda_1 = 0 is an eigenvalue
    r1 = sp.Matrix([1 + 2 * v + u, -v])  # J r1 = 0
    assert sp.simplify(J * r1) == sp.zeros(2, 1)
    f = sp.sympify(lam1)
    for k in range(1, M + 1):
        f = sp.diff(f, u) * r1[0] + sp.diff(f, v) * r1[1]
        if abs(float(f.subs({u: u0, v: v0}))) > 1e-6:
            return k
    return "degenerate"
