"""Cantor-part diagnostics on fixed-time profiles.

A finite atomic measure has no Cantor part, so concentration is measured
at the resolution the atoms themselves define: every atom is charged the
gap to its nearest neighbour, and C_p(eta) is the largest |mu|-mass of a
set of atoms whose charges add up to at most eta. A Cantor-like cloud
keeps its mass at small eta, spread-out atoms need eta comparable to
their span.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import algebra, kernels, measures
from .engine import PiecewiseConstant
from .errors import ZeroJumpDenominator
from .measures import AtomicMeasure1D

BUDGET_REL = 1e-12
BUDGET_ABS = 1e-15


def default_scales(kmax: int = 12) -> np.ndarray:
    """eta_k = (2/3)^k for k = 0..kmax."""
    return (2.0 / 3.0) ** np.arange(kmax + 1)


@dataclass
class ConcentrationProfile:
    scales: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def at(self, eta: float) -> float:
        k = int(np.argmin(np.abs(self.scales - eta)))
        if not math.isclose(self.scales[k], eta, rel_tol=1e-9, abs_tol=1e-15):
            raise KeyError(f"scale {eta} not in profile")
        return float(self.values[k])


def atom_costs(x: np.ndarray) -> np.ndarray:
    """Nearest-neighbour gap of each atom (0 for a lone atom)."""
    n = x.size
    if n < 2:
        return np.zeros(n)
    g = np.diff(x)
    c = np.empty(n)
    c[0] = g[0]
    c[-1] = g[-1]
    c[1:-1] = np.minimum(g[:-1], g[1:])
    return c


def _merge_coincident(m: AtomicMeasure1D):
    """Atoms at the same position count as one (summed |weight|)."""
    x = m.x
    w = np.abs(m.w)
    if x.size == 0:
        return x, w
    keep = np.concatenate([[True], np.diff(x) > 0])
    idx = np.cumsum(keep) - 1
    out = np.zeros(int(idx[-1]) + 1)
    np.add.at(out, idx, w)
    return x[keep], out


def cantor_proxy(measure: AtomicMeasure1D, scales: Optional[Sequence[float]] = None) -> ConcentrationProfile:
    """Concentration profile C_p(eta) of |measure| over ``scales``."""
    sc = default_scales() if scales is None else np.asarray(scales, dtype=float)
    x, w = _merge_coincident(measure)
    nz = w > 0
    x, w = x[nz], w[nz]
    budgets = sc * (1.0 + BUDGET_REL) + BUDGET_ABS
    if x.size == 0:
        vals = np.zeros(sc.size)
    else:
        vals = np.asarray(kernels.pareto_knapsack(atom_costs(x), w, budgets), dtype=float)
    return ConcentrationProfile(sc, vals, {"t": measure.t, "atoms": int(x.size)})


# ---- i-component of D_x lambda_i ---------------------------------------------

@dataclass
class LambdaComponent:
    measure: AtomicMeasure1D
    cont: AtomicMeasure1D
    jump: AtomicMeasure1D
    flagged: List[float] = field(default_factory=list)


def lambda_component(system, fronts, i: int, curves, t: float = 0.0, strict: bool = False) -> LambdaComponent:
    """Atoms of [D_x lambda_i(u)]_i for a snapshot of fronts at time t.

    Continuous atoms: (grad lambda_i . r_i)(u_mid) * upsilon_i. Jump atoms on
    tracked curves: [lambda_i(u+) - lambda_i(u-)] |upsilon_i| / sum_k |upsilon_k|.
    A tracked jump with zero denominator is flagged (or raises with ``strict``).
    """
    on = measures.curve_front_ids(curves)
    xs, wc, wj = [], [], []
    flagged = []
    for f in fronts:
        if f.is_np:
            continue
        x = f.x_at(t)
        ups = measures.front_upsilon(system, f)
        if f.id in on:
            den = float(np.sum(np.abs(ups)))
            if den == 0.0:
                if strict:
                    raise ZeroJumpDenominator(f"no jump atoms at x={x}")
                flagged.append(x)
                continue
            li = algebra.eigenvalues(system, f.uR)[i - 1] - algebra.eigenvalues(system, f.uL)[i - 1]
            xs.append(x)
            wc.append(0.0)
            wj.append(float(li) * abs(float(ups[i - 1])) / den)
        else:
            um = 0.5 * (f.uL + f.uR)
            xs.append(x)
            wc.append(algebra.gnl_indicator(system, um, i) * float(ups[i - 1]))
            wj.append(0.0)
    xs_a = np.array(xs)
    wc_a, wj_a = np.array(wc), np.array(wj)
    return LambdaComponent(
        AtomicMeasure1D(xs_a, wc_a + wj_a, t),
        AtomicMeasure1D(xs_a, wc_a, t),
        AtomicMeasure1D(xs_a, wj_a, t),
        flagged,
    )


# ---- the counterexample experiment --------------------------------------------------

def cont_wave_measure(traj, i: int, t: float, curves) -> AtomicMeasure1D:
    fr = [f for f in traj.alive_at(t) if not f.is_np]
    ups = measures.wave_measure(traj.system, fr, i, t)
    return measures.split_jump_cont(ups, curves)[1]


def _run(system, datum: PiecewiseConstant, eps: float, tau: float, T: float, window):
    from .fracstep import BalanceConfig, run_balance

    return run_balance(system, datum, BalanceConfig(eps=eps, tau=tau, T=T, window=window, tv_check=False))


def profiles_over_time(traj, i: int, beta: float, scales, lam: bool = False) -> Dict[str, ConcentrationProfile]:
    """C_p of the continuous upsilon_i part (or of [D_x lambda_i]_i) at t0 and t_end."""
    curves = measures.track_beta_discontinuities(traj, beta, i)
    out = {}
    for key, t in (("t0", traj.t0), ("T", traj.t_end)):
        if lam:
            m = lambda_component(traj.system, traj.alive_at(t), i, curves, t).measure
        else:
            m = cont_wave_measure(traj, i, t, curves)
        out[key] = cantor_proxy(m, scales)
    return out


def counterexample_experiment(levels: int, eps: float, tau: Optional[float] = None, T: float = 1.0,
                              amplitude: float = 1.0, v_bump: float = 0.02,
                              eta_star: Optional[float] = None, scales=None) -> dict:
    """Cantor-datum runs on the triangular system and on Burgers.

    The triangular u-datum is the level-``levels`` staircase on [0, 1]; a
    small v-bump on [-0.6, -0.3] sends 2-waves through it. The Burgers
    control uses the same staircase. Levels 0 means a constant datum.
    Reports C_p at t=0 and t=T for (a) the continuous upsilon_1 part of the
    triangular run, (b) [D_x lambda_2]_2 of the triangular run and (c) the
    continuous upsilon_1 of the Burgers run.
    """
    from .harness.catalog import burgers, triangular_counterexample
    from .harness.data import bump_datum, cantor_datum, combine

    if tau is None:
        tau = eps
    sc = default_scales() if scales is None else np.asarray(scales, dtype=float)
    if eta_star is None:
        eta_star = (2.0 / 3.0) ** 6
    if eta_star not in sc:
        sc = np.sort(np.append(sc, eta_star))[::-1]
    beta = 1.01 * 4.0 * eps
    amp = amplitude if levels > 0 else 0.0
    tri = triangular_counterexample()
    u_stair = cantor_datum(levels, amp, (0.0, 1.0), background=[0.0, 0.0], component=0)
    datum_tri = combine(u_stair, bump_datum([0.0, 0.0], 1, v_bump if levels > 0 else 0.0, (-0.6, -0.3)))
    window = (-1.0, 3.0)
    tr_tri = _run(tri, datum_tri, eps, tau, T, window)
    tr_bur = _run(burgers(), cantor_datum(levels, amp, (0.0, 1.0)), eps, tau, T, window)
    a = profiles_over_time(tr_tri, 1, beta, sc)
    b = profiles_over_time(tr_tri, 2, beta, sc, lam=True)
    c = profiles_over_time(tr_bur, 1, beta, sc)

    def ratio(p):
        v0 = p["t0"].at(eta_star)
        return p["T"].at(eta_star) / v0 if v0 > 0 else 0.0

    return {
        "levels": levels, "eps": eps, "tau": tau, "T": T, "beta": beta, "eta_star": eta_star,
        "scales": sc.tolist(),
        "tri_cont_t0": a["t0"].values.tolist(), "tri_cont_T": a["T"].values.tolist(),
        "tri_lam2_t0": b["t0"].values.tolist(), "tri_lam2_T": b["T"].values.tolist(),
        "burgers_t0": c["t0"].values.tolist(), "burgers_T": c["T"].values.tolist(),
        "tri_ratio": ratio(a), "lam2_ratio": ratio(b), "burgers_ratio": ratio(c),
        "tri_nodes": len(tr_tri.nodes), "burgers_nodes": len(tr_bur.nodes),
    }
