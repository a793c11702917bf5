import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftbalance import algebra, riemann
from ftbalance.errors import UnclassifiedFamily
from ftbalance.harness import catalog
from ftbalance.riemann import CONTACT, RAREFACTION, SHOCK


def _rh(system, sw):
    dF = np.asarray(system.flux(sw.uR)) - np.asarray(system.flux(sw.uL))
    return float(np.linalg.norm(sw.speed * (sw.uR - sw.uL) - dF)), float(np.linalg.norm(dF))


# ---- elementary curves ------------------------------------------------------------------

def test_hugoniot_examples(burgers, tri):
    uR, sig = riemann.hugoniot_point(burgers, [1.0], 1, -1.0)
    assert uR[0] == pytest.approx(0.0, abs=1e-12) and sig == pytest.approx(0.5)
    uR, sig = riemann.hugoniot_point(tri, [0.0, 0.0], 2, -0.2)
    assert np.allclose(uR, [0.0, -0.2], atol=1e-10) and sig == pytest.approx(0.8, abs=1e-10)
    for system, u in ((burgers, [0.3]), (tri, [0.1, 0.05])):
        for i in range(1, system.n + 1):
            w, s = riemann.hugoniot_point(system, u, i, 0.0)
            assert np.array_equal(w, np.asarray(u, dtype=float))
            assert s == pytest.approx(algebra.eigenvalues(system, np.asarray(u, dtype=float))[i - 1])


@given(st.floats(-0.15, 0.25), st.floats(-0.15, 0.15), st.floats(-0.12, 0.12))
def test_hugoniot_residual_and_parameter(tri, u, v, s):
    uL = np.array([u, v])
    uR, sig = riemann.hugoniot_point(tri, uL, 2, s)
    dF = tri.flux(uR) - tri.flux(uL)
    assert np.linalg.norm(sig * (uR - uL) - dF) <= 1e-10 * (1 + np.linalg.norm(dF))
    assert float(algebra.eigen(tri, uL).l(2) @ (uR - uL)) == pytest.approx(s, abs=1e-10)


def test_rarefaction_examples(burgers, tri):
    assert riemann.rarefaction_point(burgers, [0.0], 1, 1.0)[0] == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(riemann.rarefaction_point(tri, [0.0, 0.0], 2, 0.3), [0.0, 0.3], atol=1e-10)
    assert np.array_equal(riemann.rarefaction_point(tri, [0.1, 0.0], 2, 0.0), [0.1, 0.0])


def test_rarefaction_speed_increases(psys):
    # p-system away from v = 0 is locally genuinely nonlinear
    uL = np.array([0.3, 0.05])
    lams = [algebra.eigenvalues(psys, riemann.rarefaction_point(psys, uL, 2, s))[1] for s in np.linspace(0, 0.1, 6)]
    assert np.all(np.diff(lams) != 0)
    assert np.all(np.diff(lams) > 0) or np.all(np.diff(lams) < 0)


def test_lax_curve_branches(burgers, tri):
    sw = riemann.lax_curve(burgers, [0.0], 1, 0.5)
    assert sw.kind == RAREFACTION and sw.uR[0] == pytest.approx(0.5)
    sw = riemann.lax_curve(burgers, [1.0], 1, -0.5)
    assert sw.kind == SHOCK and sw.uR[0] == pytest.approx(0.5) and sw.speed == pytest.approx(0.75)
    sw = riemann.lax_curve(tri, [0.0, 0.0], 1, 0.2)
    assert sw.kind == CONTACT and sw.speed == 0.0


def test_lax_curve_unclassified_scalar():
    with pytest.raises(UnclassifiedFamily):
        riemann.lax_curve(catalog.cubic(), [-0.5], 1, 1.0)


# ---- Riemann solver ---------------------------------------------------------------------

def test_solve_riemann_trivial_and_burgers(burgers, tri):
    fan = riemann.solve_riemann(tri, [0.1, 0.1], [0.1, 0.1])
    assert np.all(fan.sizes() == 0) and not fan.subwaves()
    fan = riemann.solve_riemann(burgers, [1.0], [-1.0])
    (sw,) = fan.subwaves()
    assert sw.kind == SHOCK and sw.speed == pytest.approx(0.0, abs=1e-12)


def test_solve_riemann_triangular_recomposition(tri):
    uL, uR = np.array([0.0, 0.0]), np.array([0.1, 0.1])
    fan = riemann.solve_riemann(tri, uL, uR)
    s = fan.sizes()
    assert s[0] != 0 and s[1] != 0
    end = riemann.compose(tri, uL, s)[-1].uR
    assert np.linalg.norm(end - uR) <= 1e-9


@given(st.floats(-0.08, 0.08), st.floats(-0.08, 0.08))
def test_round_trip(tri, s1, s2):
    uL = np.array([0.1, 0.05])
    uR = riemann.compose(tri, uL, [s1, s2])[-1].uR
    fan = riemann.solve_riemann(tri, uL, uR)
    assert np.allclose(fan.sizes(), [s1, s2], atol=1e-7)


@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_round_trip_psystem(psys, s1, s2):
    uL = np.array([0.3, 0.05])
    uR = riemann.compose(psys, uL, [s1, s2])[-1].uR
    assert np.allclose(riemann.solve_riemann(psys, uL, uR).sizes(), [s1, s2], atol=1e-7)


@pytest.mark.parametrize("name,uL,uR", [
    ("burgers", [1.0], [-0.4]),
    ("triangular_counterexample", [0.0, 0.2], [0.3, -0.1]),
    ("elasticity_damped", [0.3, 0.2], [0.35, -0.1]),
    ("arz_traffic", [0.5, 1.0], [0.4, 1.1]),
])
def test_fan_invariants(name, uL, uR):
    system = catalog.catalog_system(name)
    fan = riemann.solve_riemann(system, uL, uR)
    subs = fan.subwaves()
    assert np.linalg.norm(subs[-1].uR - np.asarray(uR)) <= 1e-9
    for sw in subs:
        if sw.kind == SHOCK:
            res, dF = _rh(system, sw)
            assert res <= 1e-9 * (1 + dF)
    for w in fan.waves:
        sp = [sw.speed for sw in w.subwaves]
        assert all(b >= a - 1e-12 for a, b in zip(sp[:-1], sp[1:]))


# ---- scalar envelope -------------------------------------------------------------------

def test_envelope_convex_rarefaction(burgers):
    fan = riemann.scalar_envelope_solve(burgers, [0.0], [1.0])
    (sw,) = fan.subwaves()
    assert sw.kind == RAREFACTION
    assert sw.lam_left == pytest.approx(0.0, abs=1e-12) and sw.lam_right == pytest.approx(1.0)
    assert not riemann.scalar_envelope_solve(burgers, [0.3], [0.3]).subwaves()


def test_envelope_cubic_tangency():
    # u^3/3 from -1 to 1: the lower envelope leaves the flux at u* = 1/2,
    # where u*^2 = (F(u*) - F(-1)) / (u* + 1)
    c = catalog.cubic()
    shock, rare = riemann.scalar_envelope_solve(c, [-1.0], [1.0]).subwaves()
    assert shock.kind == SHOCK and rare.kind == RAREFACTION
    assert shock.uR[0] == pytest.approx(0.5, abs=1e-3)
    assert shock.speed == pytest.approx(0.25, abs=1e-3)
    assert rare.lam_right == pytest.approx(1.0)


def test_envelope_quartic_concave_chord():
    q = catalog.quartic()
    (sw,) = riemann.scalar_envelope_solve(q, [1.0], [-1.0]).subwaves()
    assert sw.kind == SHOCK and sw.speed == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_envelope_matches_lax_solver(burgers, a, b):
    e = riemann.scalar_envelope_solve(burgers, [a], [b])
    s = riemann.solve_riemann(burgers, [a], [b])
    ee, ss = e.subwaves(), s.subwaves()
    assert len(ee) == len(ss)
    for x, y in zip(ee, ss):
        assert x.kind == y.kind
        assert x.speed == pytest.approx(y.speed, abs=1e-3)


# ---- discretization --------------------------------------------------------------------

def test_discretize_burgers_fan(burgers):
    fan = riemann.solve_riemann(burgers, [0.0], [1.0])
    fr = riemann.discretize_fan(fan, 0.25, burgers)
    assert [f.size for f in fr] == pytest.approx([0.25] * 4)
    assert [f.speed for f in fr] == pytest.approx([0.125, 0.375, 0.625, 0.875])
    for f in fr:
        assert max(abs(f.speed - f.lam_left), abs(f.speed - f.lam_right)) <= 2 * 0.25
    (one,) = riemann.discretize_fan(fan, 2.0, burgers)
    assert one.size == pytest.approx(1.0)


def test_discretize_shock_unchanged(burgers):
    fan = riemann.solve_riemann(burgers, [1.0], [0.0])
    (f,) = riemann.discretize_fan(fan, 0.01, burgers)
    assert f.kind == SHOCK and f.speed == pytest.approx(0.5) and f.size == pytest.approx(-1.0)


@given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.sampled_from([0.01, 0.03, 0.1]))
def test_discretize_conserves_size(tri, s1, s2, eps):
    uL = np.array([0.1, 0.0])
    uR = riemann.compose(tri, uL, [s1, s2])[-1].uR
    fan = riemann.solve_riemann(tri, uL, uR)
    fr = riemann.discretize_fan(fan, eps, tri)
    for w in fan.waves:
        tot = sum(f.size for f in fr if f.family == w.family)
        assert tot == pytest.approx(w.size, abs=1e-9)
    for f in fr:
        if f.kind == RAREFACTION:
            assert abs(f.size) <= eps * (1 + 1e-9) + 1e-12
            assert max(abs(f.speed - f.lam_left), abs(f.speed - f.lam_right)) <= 2 * eps
