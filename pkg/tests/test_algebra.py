import dataclasses

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from ftbalance import algebra
from ftbalance.errors import NonHyperbolic, OutOfDomain
from ftbalance.harness import catalog


def _strip(system, **kw):
    """Same system with analytic closures removed (numeric path only)."""
    return dataclasses.replace(system, eig=None, pi=None, **kw)


# ---- eigen ------------------------------------------------------------------------

def test_eigen_triangular_origin(tri):
    es = algebra.eigen(tri, [0.0, 0.0])
    assert np.allclose(es.lam, [0.0, 1.0], atol=1e-12)
    assert np.allclose(es.r(1), [1, 0]) and np.allclose(es.r(2), [0, 1])
    assert np.allclose(es.l(1), [1, 0]) and np.allclose(es.l(2), [0, 1])


def test_eigen_burgers(burgers):
    es = algebra.eigen(burgers, 0.7)
    assert es.lam[0] == pytest.approx(0.7)
    assert es.R[0, 0] == 1.0 and es.L[0, 0] == 1.0


def test_eigen_psystem_origin(psys):
    assert np.allclose(algebra.eigen(psys, [0, 0]).lam, [-1, 1], atol=1e-12)
    # dense eigensolver on the numeric Jacobian agrees
    num = algebra.eigen(_strip(psys, jacobian=None), [0.3, 0.1])
    v = sp.symbols("v")
    c = float(sp.sqrt(sp.diff(v + v**3, v)).subs(v, 0.3))
    assert np.allclose(num.lam, [-c, c], atol=1e-6)


def test_eigen_errors(burgers):
    with pytest.raises(OutOfDomain):
        algebra.eigen(burgers, 9.0)
    flat = algebra.SystemSpec(n=2, flux=lambda u: np.array([u[0], u[1]]), lo=np.array([-1.0, -1]),
                              hi=np.array([1.0, 1]), classes=("ld", "ld"))
    with pytest.raises(NonHyperbolic):
        algebra.eigen(flat, [0, 0])


# ---- gnl_indicator ----------------------------------------------------------------------

@pytest.mark.parametrize("u", [[0.0, 0.0], [0.4, 0.1], [1.0, -0.2]])
def test_gnl_indicator_triangular_first_family(tri, u):
    assert algebra.gnl_indicator(tri, u, 1) == pytest.approx(0.0, abs=1e-9)
    assert algebra.gnl_indicator(_strip(tri), u, 1) == pytest.approx(0.0, abs=1e-6)


def test_gnl_indicator_examples(tri, burgers):
    assert algebra.gnl_indicator(_strip(tri), [0, 0], 2) == pytest.approx(2.0, abs=1e-6)
    for u in (-1.0, 0.0, 2.5):
        assert algebra.gnl_indicator(_strip(burgers), u, 1) == pytest.approx(1.0, abs=1e-6)


# ---- nondegeneracy ------------------------------------------------------------------------

def _sympy_order(flux_expr, u0, M):
    """Scalar oracle: pi^(k) = d^k lambda / du^k with lambda = F'."""
    u = sp.symbols("u")
    lam = sp.diff(flux_expr(u), u)
    for k in range(1, M + 1):
        lam = sp.diff(lam, u)
        if abs(float(lam.subs(u, u0))) > 1e-6:
            return k
    return "degenerate"


def test_nondegeneracy_burgers(burgers):
    for u0 in (-2.0, 0.0, 1.3):
        assert algebra.nondegeneracy_order(burgers, u0, 1, 5) == 1 == _sympy_order(lambda u: u**2 / 2, u0, 5)


def test_nondegeneracy_quartic():
    q = catalog.quartic()
    assert algebra.nondegeneracy_order(q, 0.0, 1, 5) == 3 == _sympy_order(lambda u: u**4 / 4, 0.0, 5)
    # the finite-difference route agrees without the analytic closure
    assert algebra.nondegeneracy_order(_strip(q), 0.0, 1, 3) == 3
    assert algebra.nondegeneracy_order(_strip(q), 0.5, 1, 3) == 1


def test_nondegeneracy_triangular_first_family(tri):
    assert algebra.nondegeneracy_order(tri, [0.2, 0.1], 1, 5) == "degenerate"
    assert algebra.nondegeneracy_order(_strip(tri), [0.2, 0.1], 1, 3) == "degenerate"


def test_nondegeneracy_rejects_bad_order(burgers):
    with pytest.raises(ValueError):
        algebra.nondegeneracy_order(burgers, 0.0, 1, 0)


# ---- averaged eigenstructure -----------------------------------------------------------------

def test_averaged_eigen_examples(burgers, tri):
    assert algebra.averaged_eigen(burgers, [1.0], [0.0]).lam[0] == pytest.approx(0.5)
    es = algebra.averaged_eigen(tri, [0, 0], [0, 0.3])
    assert es.lam[1] == pytest.approx(1.3, abs=1e-12)
    # l~_1 is parallel to (1, 0); its scale follows from |r~_1| = 1
    assert es.l(1)[1] == 0.0
    assert float(es.l(1) @ np.array([0.0, 0.3])) == 0.0


@given(st.floats(-0.2, 1.4), st.floats(-0.25, 0.35))
def test_averaged_eigen_diagonal(tri, u, v):
    p = np.array([u, v])
    a = algebra.averaged_eigen(tri, p, p)
    b = algebra.eigen(tri, p)
    assert np.allclose(a.lam, b.lam, atol=1e-10)
    assert np.allclose(a.R, b.R, atol=1e-10)


# ---- invariants --------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["triangular_counterexample", "elasticity_damped", "arz_traffic", "granular"])
@given(data=st.data())
def test_reconstruction(name, data):
    system = catalog.catalog_system(name)
    u = np.array([data.draw(st.floats(float(a) + 1e-3, float(b) - 1e-3)) for a, b in zip(system.lo, system.hi)])
    es = algebra.eigen(system, u)
    A = algebra.jacobian(system, u)
    assert np.linalg.norm(A - es.R @ np.diag(es.lam) @ es.L) <= 1e-6 * max(np.linalg.norm(A), 1e-12)
    assert np.allclose(np.linalg.norm(es.R, axis=0), 1.0, atol=1e-10)
    assert np.allclose(es.L @ es.R, np.eye(system.n), atol=1e-8)
    assert np.all(np.diff(es.lam) > 0)
    for k, cls in enumerate(system.classes):
        if cls == algebra.GNL:
            assert algebra.gnl_indicator(system, u, k + 1) > 0


@given(st.floats(-0.2, 1.4), st.floats(-0.25, 0.35))
def test_gnl_indicator_richardson(tri, u, v):
    s = _strip(tri)
    p = np.array([u, v])
    h = 1e-6 * (1 + np.max(np.abs(p)))
    a = algebra.gnl_indicator(s, p, 2, step=h)
    b = algebra.gnl_indicator(s, p, 2, step=h / 2)
    assert abs(a - b) <= 1e-4


# ---- transversality ---------------------------------------------------------------------

def test_transversality(burgers, tri):
    r = algebra.transversality_check(burgers, 1)
    assert r.zero_points.size == 0 and not r.flagged
    q = algebra.transversality_check(catalog.quartic(), 1, grid=41)
    assert q.zero_points.size > 0 and np.allclose(q.zero_points, 0.0, atol=0.1)
    assert not q.flagged and not q.whole_box
    t = algebra.transversality_check(tri, 1, grid=9)
    assert t.whole_box and t.flagged
