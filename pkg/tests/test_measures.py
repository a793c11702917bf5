import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftbalance import measures
from ftbalance.engine import Engine, EngineConfig, Front, PiecewiseConstant
from ftbalance.fracstep import BalanceConfig, run_balance
from ftbalance.harness import catalog, data
from ftbalance.measures import AtomicMeasure1D, SpaceTimeMeasure
from ftbalance.riemann import RAREFACTION, SHOCK


def _front(fid, family, size, x, speed=0.0, kind=SHOCK, uL=(0.0,), uR=(0.0,), sig=None):
    s = speed if sig is None else sig
    return Front(fid, family, kind, size, speed, np.array(uL, dtype=float), np.array(uR, dtype=float),
                 s, s, 0, 0.0, [(0.0, x, speed)])


def _pc(xs, states):
    return PiecewiseConstant(np.array(xs, dtype=float), np.array(states, dtype=float).reshape(len(xs) + 1, -1))


def _run(system, datum, eps=0.05, T=1.0, tau=None, window=(-10.0, 10.0)):
    if tau is None and system.source is None:
        e = Engine(system, datum, EngineConfig(eps=eps, window=window))
        e.run_to(T)
        return e.trajectory()
    return run_balance(system, datum, BalanceConfig(eps=eps, tau=tau or eps, T=T, window=window, tv_check=False))


# ---- functionals --------------------------------------------------------------------------

def test_glimm_two_families():
    fr = [_front(1, 2, 0.1, -1.0), _front(0, 1, 0.2, 1.0)]
    assert measures.glimm_V(fr) == pytest.approx(0.3)
    assert measures.glimm_Q(fr, 2) == pytest.approx(0.02, abs=1e-15)
    assert measures.upsilon(fr, 2, kappa=10) == pytest.approx(0.5)


def test_glimm_non_approaching_pair_is_zero():
    fr = [_front(0, 1, 0.2, -1.0), _front(1, 2, 0.1, 1.0)]
    assert measures.glimm_Q(fr, 2) == 0.0


def test_glimm_empty_and_kappa():
    assert measures.glimm_V([]) == 0.0 and measures.glimm_Q([], 2) == 0.0
    with pytest.raises(ValueError):
        measures.upsilon([], 1, kappa=0.0)


def test_interaction_amounts():
    p = _front(0, 2, 0.1, -1.0)
    q = _front(1, 1, 0.2, 1.0)
    assert measures.interaction_amount(p, q, 2) == (pytest.approx(0.02), False)
    a = _front(0, 1, -0.2, 0.0, speed=0.9, uL=(1.0,), uR=(0.8,))
    b = _front(1, 1, -0.3, 0.1, speed=0.65, uL=(0.8,), uR=(0.5,))
    amt, ext = measures.interaction_amount(a, b, 1)
    assert amt == pytest.approx(0.015, rel=1e-12) and not ext
    assert measures.interaction_amount(_front(0, 1, 0.0, 0.0), b, 1)[0] == 0.0


def test_interaction_extension_flag():
    r = _front(0, 1, 0.05, 0.0, kind=RAREFACTION)
    s = _front(1, 1, -0.2, 0.1)
    assert measures.interaction_amount(r, s, 1)[1] is True


# ---- wave measures -----------------------------------------------------------------------

def test_wave_measure_scalar(burgers):
    m = measures.profile_wave_measure(burgers, _pc([0.0], [0.5, 0.0]), 1)
    assert m.x.tolist() == [0.0] and m.w == pytest.approx([-0.5])


def test_wave_measure_triangular(tri):
    m1 = measures.profile_wave_measure(tri, _pc([2.0], [[0, 0], [0, 0.3]]), 1)
    m2 = measures.profile_wave_measure(tri, _pc([2.0], [[0, 0], [0, 0.3]]), 2)
    assert m1.w[0] == 0.0
    assert m2.w[0] == pytest.approx(0.3, rel=1e-12)


def test_wave_measure_constant(burgers):
    assert len(measures.profile_wave_measure(burgers, PiecewiseConstant.constant([0.3]), 1)) == 0


@pytest.mark.parametrize("name", ["tri", "psys"])
@given(seed=st.integers(0, 10_000))
def test_decomposition_identity(name, seed, request):
    system = request.getfixturevalue(name)
    rng = np.random.default_rng(seed)
    c = np.array([0.05, 0.0]) if name == "tri" else np.array([0.3, 0.0])
    uL = c + rng.uniform(-0.1, 0.1, 2)
    uR = c + rng.uniform(-0.1, 0.1, 2)
    assert measures.decomposition_residual(system, uL, uR) <= 1e-8


# ---- (beta, i)-curves ----------------------------------------------------------------------

def test_persistent_shock_curve(burgers):
    tr = _run(burgers, _pc([0.0], [0.5, 0.0]), T=1.0)
    cs = measures.track_beta_discontinuities(tr, 0.4, 1)
    assert len(cs) == 1
    c = cs[0]
    assert c.termination == measures.HORIZON
    assert c.points[0][0] == 0.0 and c.points[-1][0] == pytest.approx(1.0)
    assert c.points[-1][1] == pytest.approx(0.25)


def test_weak_fronts_give_no_curves(burgers):
    d = data.random_step_datum(np.random.default_rng(1), 6, 0.2, (-1, 1), [0.0])
    tr = _run(burgers, d, T=0.5)
    assert measures.track_beta_discontinuities(tr, 1.0, 1) == []


def test_strength_floor_termination(burgers):
    # the fan 0.3 -> 2 overtakes the shock 2 -> 0.4 and erodes it below beta/4 = 0.4
    tr = _run(burgers, _pc([-0.2, 0.0], [0.3, 2.0, 0.4]), eps=0.1, T=10.0)
    cs = measures.track_beta_discontinuities(tr, 1.6, 1)
    assert len(cs) == 1
    c = cs[0]
    assert c.termination == measures.STRENGTH_FLOOR
    assert abs(c.strengths[-1]) >= 0.4 and c.max_strength == pytest.approx(1.6)
    last = tr.fronts[c.front_ids[-1]]
    assert c.points[-1][0] == pytest.approx(last.t_death)


def test_rejects_nonpositive_beta(burgers):
    tr = _run(burgers, _pc([0.0], [0.5, 0.0]), T=0.1)
    with pytest.raises(ValueError):
        measures.track_beta_discontinuities(tr, 0.0, 1)


def test_split_single_tracked_shock(burgers):
    d = _pc([-1.0, -0.5, 0.0, 0.5], [0.0, 0.02, 0.04, -0.5, -0.48])
    tr = _run(burgers, d, T=0.01)
    cs = measures.track_beta_discontinuities(tr, 0.4, 1)
    m = measures.wave_measure(burgers, tr.alive_at(0.01), 1, 0.01)
    jump, cont = measures.split_jump_cont(m, cs)
    assert np.count_nonzero(jump.w) == 1 and np.count_nonzero(cont.w) == 3
    assert np.array_equal(jump.w + cont.w, m.w)
    j0, c0 = measures.split_jump_cont(m, [])
    assert not np.any(j0.w) and np.array_equal(c0.w, m.w)


@given(st.integers(0, 10_000), st.floats(0.05, 0.5))
def test_split_reconstruction(seed, beta):
    b = catalog.burgers()
    d = data.random_step_datum(np.random.default_rng(seed), 6, 0.8, (-1, 1), [0.0])
    tr = _run(b, d, eps=0.05, T=0.5)
    cs = measures.track_beta_discontinuities(tr, beta, 1)
    for t in (0.0, 0.25, 0.5):
        m = measures.wave_measure(b, tr.alive_at(t), 1, t)
        jump, cont = measures.split_jump_cont(m, cs)
        assert np.all(np.abs(jump.w + cont.w - m.w) <= 1e-14)


def test_curve_count_bounded_under_refinement(burgers):
    d = data.random_step_datum(np.random.default_rng(7), 8, 1.0, (-1, 1), [0.0])
    counts = [len(measures.track_beta_discontinuities(_run(burgers, d, eps=e, T=1.0), 0.2, 1)) for e in (0.04, 0.02, 0.01)]
    assert max(counts) <= 2 * min(counts) + 2


# ---- space-time measures ------------------------------------------------------------------

def test_source_atoms_definition():
    atoms = measures.source_measure_atoms(0.1, 0.01, [(0.0, np.array([-0.5]))])
    assert atoms == [(0.1, 0.0, pytest.approx(0.005))]
    grid = measures.source_measure_atoms(0.1, 0.01, [], q=np.full(10, 0.1), eps=0.1, j0=-5)
    assert sum(a[2] for a in grid) == pytest.approx(0.01)
    assert measures.source_measure_atoms(0.1, 0.01, []) == []


def test_spacetime_strip_and_region():
    m = SpaceTimeMeasure.from_atoms([(0.1, 0.0, 1.0), (0.2, 1.0, 2.0), (0.3, 0.5, 4.0)])
    assert m.strip(0.1, 0.2) == 2.0 and m.strip(0.1, 0.2, left_open=False) == 3.0
    assert m.region(lambda t, x: x > 0.2) == 6.0
    with pytest.raises(ValueError):
        SpaceTimeMeasure.from_atoms([(0.0, 0.0, -1.0)])


def test_atomic_measure_ops():
    m = AtomicMeasure1D(np.array([1.0, 0.0, 2.0]), np.array([1.0, -2.0, 3.0]))
    assert m.x.tolist() == [0.0, 1.0, 2.0]
    assert m.restrict(0.5, 2.0).total() == 4.0
    assert m.positive().total() == 4.0 and m.negative().total() == 2.0
    assert m.total_variation() == 6.0


def test_homogeneous_run_ics_equals_ic(burgers):
    tr = _run(burgers, _pc([-1.0, 0.0], [0.0, 1.0, 0.0]), T=2.0)
    cm = measures.composite_measures(burgers, tr)
    assert cm.ICS.aggregated() == cm.IC.aggregated()


def test_zero_source_updates_add_definitional_atoms(burgers):
    zero = dataclasses.replace(burgers, source=lambda t, x, u: np.zeros(1))
    tr = run_balance(zero, _pc([0.0], [0.5, 0.0]), BalanceConfig(eps=0.05, tau=0.01, T=0.05))
    cm = measures.composite_measures(burgers, tr)
    assert len(cm.source) == 5
    assert cm.source.w == pytest.approx([0.005] * 5)
    assert cm.ICS.total() == pytest.approx(cm.IC.total() + 0.025)


@given(st.integers(0, 10_000))
def test_ics_below_icjs(seed):
    b = catalog.burgers(damping=0.5)
    d = data.random_step_datum(np.random.default_rng(seed), 6, 0.8, (-1, 1), [0.0])
    tr = _run(b, d, eps=0.05, T=0.5, tau=0.05)
    curves = {1: measures.track_beta_discontinuities(tr, 0.25, 1)}
    cm = measures.composite_measures(b, tr, curves)
    assert measures.atomwise_leq(cm.I, cm.IC)
    assert measures.atomwise_leq(cm.ICS, cm.ICJS)


def test_merge_balance_atom_bounded_by_interaction(burgers):
    tr = _run(burgers, _pc([-1.0, 0.0], [1.0, 0.8, 0.5]), T=10.0)
    node = next(n for n in tr.nodes if n.kind == "interaction")
    (t, x, i, mu, mj), = measures.wave_balance_atoms(burgers, tr, node)
    assert abs(mu) <= 1e-12 + 10 * node.amount
