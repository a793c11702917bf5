import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftbalance import engine, measures
from ftbalance.engine import Engine, EngineConfig, PiecewiseConstant
from ftbalance.errors import FrontExplosion, NPBudgetExceeded, OutOfDomain, TimeOutOfRange
from ftbalance.harness import catalog, data


def _pc(xs, states):
    return PiecewiseConstant(np.array(xs, dtype=float), np.array(states, dtype=float).reshape(len(xs) + 1, -1))


def _two_shocks():
    return _pc([-1.0, 0.0], [1.0, 0.0, -1.0])


def _run(system, datum, T, **cfg):
    cfg.setdefault("eps", 0.05)
    e = Engine(system, datum, EngineConfig(**cfg))
    e.run_to(T)
    return e


# ---- init -----------------------------------------------------------------------

def test_init_examples(burgers):
    e = engine.init(burgers, PiecewiseConstant.constant([0.3]), EngineConfig(eps=0.1))
    assert e.alive() == [] and engine.next_event(e) is None
    e = engine.init(burgers, _pc([0.0], [1.0, 0.0]), EngineConfig(eps=0.1))
    (f,) = e.alive()
    assert f.speed == pytest.approx(0.5)
    e = engine.init(burgers, _pc([0.0], [0.0, 1.0]), EngineConfig(eps=0.25))
    assert len(e.alive()) == 4


def test_init_rejects_states_outside_domain(burgers):
    with pytest.raises(OutOfDomain):
        engine.init(burgers, _pc([0.0], [0.0, 7.0]), EngineConfig(eps=0.1))


def test_lam_hat_exceeds_all_speeds(tri):
    e = engine.init(tri, PiecewiseConstant.constant([0.0, 0.0]), EngineConfig(eps=0.1))
    assert e.lam_hat == pytest.approx(engine.estimate_lam_hat(tri))
    assert e.lam_hat > 1.0 + 2 * 0.4 + 1.5


# ---- next_event ---------------------------------------------------------------------

def test_next_event_examples(burgers):
    e = engine.init(burgers, _pc([0.0], [1.0, 0.0]), EngineConfig(eps=0.1))
    assert engine.next_event(e) is None
    e = engine.init(burgers, _two_shocks(), EngineConfig(eps=0.1))
    ev = engine.next_event(e)
    assert ev.t == pytest.approx(1.0) and ev.x == pytest.approx(-0.5)
    frozen = catalog.frozen_scalar()
    e = engine.init(frozen, _pc([0.0, 1.0], [0.0, 1.0, 2.0]), EngineConfig(eps=0.1))
    assert engine.next_event(e) is None


# ---- resolve_interaction --------------------------------------------------------------

def test_resolve_two_shocks(burgers):
    e = engine.init(burgers, _two_shocks(), EngineConfig(eps=0.1))
    node = engine.resolve_interaction(e, engine.next_event(e))
    (f,) = e.alive()
    assert f.kind == "shock" and f.speed == pytest.approx(0.0, abs=1e-12)
    assert f.uL[0] == 1.0 and f.uR[0] == -1.0
    assert node.dQ < 0 and node.dUpsilon <= 1e-12


def test_partial_cancellation(burgers):
    e = engine.init(burgers, _pc([-1.0, 0.0], [1.0, 0.0, 0.25]), EngineConfig(eps=0.25))
    ev = engine.next_event(e)
    assert ev.t == pytest.approx(8.0 / 3.0)
    node = engine.resolve_interaction(e, ev)
    (f,) = e.alive()
    assert f.uL[0] == 1.0 and f.uR[0] == 0.25 and f.speed == pytest.approx(0.625)
    assert node.cancellation == pytest.approx(2 * 0.25)


def test_np_strength_change_is_bounded_by_amount(tri):
    rng = np.random.default_rng(3)
    seen = 0
    for _ in range(4):
        d = data.random_step_datum(rng, 6, 0.3, (-1, 1), [0.2, 0.05])
        e = _run(tri, d, 3.0, mode="simplified")
        for n in e.nodes:
            inc = [e.fronts[k] for k in n.incoming]
            if n.kind != "interaction" or not any(f.is_np for f in inc):
                continue
            np_in = sum(f.strength for f in inc if f.is_np)
            np_out = sum(e.fronts[k].strength for k in n.outgoing if e.fronts[k].is_np)
            assert abs(np_out - np_in) <= 2.0 * n.amount + 1e-15
            seen += 1
    assert seen > 0


# ---- run_to / sample ------------------------------------------------------------------------

def test_run_to_translation(burgers):
    e = _run(burgers, _pc([0.0], [1.0, 0.0]), 2.0)
    assert e.nodes[-1].kind == "birth"
    (f,) = e.alive()
    assert f.x_at(2.0) == pytest.approx(1.0)
    assert engine.sample(e, 2.0).x == pytest.approx([1.0])


def test_run_two_shocks_to_t2(burgers):
    e = _run(burgers, _two_shocks(), 2.0)
    (f,) = e.alive()
    assert f.x_at(2.0) == pytest.approx(-0.5)
    assert sum(n.kind == "interaction" for n in e.nodes) == 1


def test_sample_conventions(burgers):
    tr = _run(burgers, _two_shocks(), 2.0).trajectory()
    p0 = tr.sample(0.0)
    assert np.allclose(p0.x, [-1.0, 0.0]) and np.allclose(p0.states[:, 0], [1, 0, -1])
    at_node = tr.sample(1.0)
    assert np.allclose(at_node.x, [-0.5]) and np.allclose(at_node.states[:, 0], [1, -1])
    with pytest.raises(TimeOutOfRange):
        tr.sample(2.5)


def test_run_backwards_rejected(burgers):
    e = _run(burgers, _two_shocks(), 1.0)
    with pytest.raises(TimeOutOfRange):
        e.run_to(0.5)


def test_front_cap(burgers):
    with pytest.raises(FrontExplosion):
        engine.init(burgers, _pc([0.0], [0.0, 1.0]), EngineConfig(eps=0.01, front_cap=10))


def test_np_budget(tri):
    d = data.random_step_datum(np.random.default_rng(1), 8, 0.4, (-1, 1), [0.2, 0.05])
    with pytest.raises(NPBudgetExceeded):
        _run(tri, d, 3.0, mode="simplified", np_budget=1e-9)


# ---- invariants -------------------------------------------------------------------------------

def _random_run(system, seed, center, T=2.0, eps=0.05):
    rng = np.random.default_rng(seed)
    d = data.random_step_datum(rng, 6, 0.3, (-1.0, 1.0), center)
    return _run(system, d, T, eps=eps, window=(-10.0, 10.0)), d


@given(st.integers(0, 10_000))
def test_upsilon_nonincreasing_burgers(seed):
    e, _ = _random_run(catalog.burgers(), seed, [0.0])
    for n in e.nodes:
        if n.kind == "interaction":
            assert n.dUpsilon <= 1e-12
            if n.amount > 1e-14:
                assert n.dQ < 0


@given(st.integers(0, 10_000))
def test_upsilon_nonincreasing_triangular(seed):
    e, _ = _random_run(catalog.triangular_counterexample(), seed, [0.2, 0.05])
    for n in e.nodes:
        if n.kind == "interaction":
            assert n.dUpsilon <= 1e-12
            if n.amount > 1e-14:
                assert n.dQ < 0
    assert e.np_total <= e.config.eps


@given(st.integers(0, 10_000))
def test_incremental_functionals_match_recomputation(seed):
    e, _ = _random_run(catalog.triangular_counterexample(), seed, [0.2, 0.05])
    V, Q = e.V, e.Q
    e.recompute_functionals()
    assert V == pytest.approx(e.V, abs=1e-12) and Q == pytest.approx(e.Q, abs=1e-12)
    assert e.Q == pytest.approx(measures.glimm_Q(e.alive(), e.n), abs=1e-12)


@given(st.integers(0, 10_000))
def test_conservation(seed):
    e, d = _random_run(catalog.burgers(), seed, [0.0])
    window = e.config.window
    # far states are constant, so the window gains F(left) - F(right) per unit time
    flux = catalog.burgers().flux
    m0 = d.integral(*window) + e.t * (flux(d.states[0]) - flux(d.states[-1]))
    assert np.allclose(e.profile().integral(*window), m0, atol=1e-10)
    assert np.allclose(e.mass, m0, atol=1e-10)


@given(st.integers(0, 10_000))
def test_nodes_consistent_and_ordered(seed):
    e, _ = _random_run(catalog.triangular_counterexample(), seed, [0.2, 0.05])
    tr = e.trajectory()
    for n in tr.nodes:
        measures.check_node_consistency(tr, n)
    xs = [f.x_at(e.t) for f in e.alive()]
    assert all(b >= a - 1e-12 for a, b in zip(xs[:-1], xs[1:]))
    ts = tr.node_times()
    assert np.all(np.diff(ts) >= 0)


def test_determinism(tri):
    a, _ = _random_run(tri, 7, [0.2, 0.05])
    b, _ = _random_run(tri, 7, [0.2, 0.05])
    assert [n.to_dict() for n in a.nodes] == [n.to_dict() for n in b.nodes]


def test_front_speed_error_bound(tri):
    e, _ = _random_run(tri, 11, [0.2, 0.05])
    for f in e.fronts.values():
        if f.is_np:
            assert f.speed == e.lam_hat
        elif f.kind == "rarefaction":
            assert max(abs(f.speed - f.sig0), abs(f.speed - f.sig1)) <= 2 * e.config.eps
