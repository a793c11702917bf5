"""Fractional-step treatment of the source term.

Between update times the engine evolves the homogeneous system. At each
t = n tau every constant state v sitting in cell j is replaced by
v + tau g_j(t, v), where g_j is the cell average of g over
[j eps, (j + 1) eps). Fronts are then re-solved against the corrected
states and new fronts are born at cell boundaries where the corrected
state jumps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import riemann
from .algebra import SystemSpec
from .engine import BIRTH, UPDATE, Engine, EngineConfig, Front, Node, PiecewiseConstant, Trajectory
from .errors import (
    FTError,
    InconsistentNode,
    NPBudgetExceeded,
    QuadratureFailure,
    RiemannFailure,
    StateLeftDomain,
    TVBlowup,
)
from .measures import front_upsilon, source_measure_atoms
from .riemann import FrontSpec

_G8_X, _G8_W = np.polynomial.legendre.leggauss(8)
G8_NODES = 0.5 * (_G8_X + 1.0)
G8_WEIGHTS = 0.5 * _G8_W


@dataclass
class DiscretizedSource:
    """Cell averages of g on a uniform grid of width ``eps``.

    Cells j0 .. j0 + m - 1 cover the run window; outside it the edge cells
    are extended. When g does not depend on x there is no grid.
    """

    system: SystemSpec
    eps: float
    j0: int
    m: int
    q: np.ndarray
    grid: bool

    def cell(self, x: float) -> int:
        j = int(math.floor(x / self.eps))
        return min(max(j, self.j0), self.j0 + self.m - 1)

    def g(self, j: int, t: float, v: np.ndarray) -> np.ndarray:
        src = self.system.source
        if src is None:
            return np.zeros(self.system.n)
        if not self.grid:
            return np.asarray(src(t, 0.0, v), dtype=float).reshape(self.system.n)
        j = min(max(j, self.j0), self.j0 + self.m - 1)
        xs = (j + G8_NODES) * self.eps
        acc = np.zeros(self.system.n)
        for x, w in zip(xs, G8_WEIGHTS):
            acc += w * np.asarray(src(t, float(x), v), dtype=float).reshape(self.system.n)
        if not np.all(np.isfinite(acc)):
            raise QuadratureFailure(f"non-finite cell average in cell {j}")
        return acc

    def boundaries(self, a: float, b: float) -> List[int]:
        """Indices j of interior cell boundaries j*eps inside (a, b)."""
        if not self.grid:
            return []
        lo = self.j0 + 1 if a == -math.inf else max(self.j0 + 1, int(math.floor(a / self.eps)) + 1)
        hi = self.j0 + self.m - 1 if b == math.inf else min(self.j0 + self.m - 1, int(math.ceil(b / self.eps)) - 1)
        return [j for j in range(lo, hi + 1) if a < j * self.eps < b]


def discretize_source(system: SystemSpec, eps: float, window=(-10.0, 10.0)) -> DiscretizedSource:
    """Grid of cell averages on ``window``; q_j integrates alpha over cell j."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    j0 = int(math.floor(window[0] / eps))
    j1 = int(math.ceil(window[1] / eps))
    m = max(1, j1 - j0)
    q = np.zeros(m)
    if system.alpha is not None:
        for k in range(m):
            xs = (j0 + k + G8_NODES) * eps
            q[k] = eps * float(sum(w * system.alpha(float(x)) for x, w in zip(xs, G8_WEIGHTS)))
        if not np.all(np.isfinite(q)):
            raise QuadratureFailure("non-finite alpha integral")
    grid = system.source is not None and not system.source_x_independent
    return DiscretizedSource(system, eps, j0, m, q, grid)


@dataclass
class UpdateReport:
    t: float
    n: int
    tv_before: float
    tv_after: float
    q_before: float
    q_after: float
    new_front_strength: float
    max_rel_change: float
    n_births: int
    n_resolved: int


def _g_bound(system: SystemSpec, tv: float) -> float:
    return max(system.source_lip * tv + tv + system.alpha_l1, 1.0)


def _nudge_off_boundaries(engine: Engine, src: DiscretizedSource, tol: float = 1e-12) -> None:
    if not src.grid:
        return
    f = engine.head
    t = engine.t
    while f is not None:
        x = f.x_at(t)
        j = round(x / src.eps)
        if abs(x - j * src.eps) <= tol:
            f.segs.append((t, x + 1e-13, f.speed))
            f.version += 1
        f = f.next


def _update_specs(engine: Engine, f: Front, uL: np.ndarray, uR: np.ndarray, floor: float,
                  last: bool) -> Tuple[List[FrontSpec], np.ndarray]:
    """Re-solve one front across corrected states.

    Returns the specs and the state they end at. The full Riemann problem
    is solved; outgoing waves below ``floor`` are not tracked (a physical
    front always keeps its own family), so the chain may end off ``uR``.
    The caller carries that offset into the next constant state, where the
    next re-solve picks it up again. Only the rightmost front closes the
    chain, with a nonphysical front if needed.
    """
    system = engine.system
    eps = engine.config.eps
    if np.array_equal(uL, uR):
        return [], uR
    fan = riemann.solve_riemann(system, uL, uR)
    if system.n == 1:
        return riemann.discretize_fan(fan, eps, system, keep_single=(1,)), uR
    specs = riemann.discretize_fan(fan, eps, system, keep_single=range(1, system.n + 1))
    own = None if f.is_np else f.family
    kept = [sp for sp in specs if abs(sp.size) >= floor or sp.family == own]
    if len(kept) == len(specs):
        return [sp for sp in specs if abs(sp.size) > engine.config.np_drop or sp.family == own], uR
    out: List[FrontSpec] = []
    w = uL
    for sp in kept:
        sw = riemann.lax_curve(system, w, sp.family, sp.size)
        out.append(engine._spec_from_subwave(sw))
        w = sw.uR
    if last:
        if float(np.linalg.norm(uR - w)) > engine.config.np_drop or not out:
            out.append(engine._np_spec(w, uR))
        else:
            out[-1].uR = uR.copy()
        return out, uR
    return out, w


def apply_source_step(engine: Engine, n: int, tau: float, src: DiscretizedSource,
                      update_threshold: Optional[float] = None) -> UpdateReport:
    """One source update at the engine clock (expected to be n * tau)."""
    t = engine.t
    if abs(t - n * tau) > 1e-12 * max(1.0, abs(t)):
        raise ValueError(f"clock {t} is not the update time {n * tau}")
    system = engine.system
    _nudge_off_boundaries(engine, src)
    before = engine.alive()
    if update_threshold is None:
        floor = engine.config.eps * tau
    else:
        floor = update_threshold
    tv_before = engine._tv()
    q_before = engine.Q
    ups = [(f.x_at(t), front_upsilon(system, f)) for f in before]
    atoms = source_measure_atoms(t, tau, ups, src.q if src.grid or system.alpha else None,
                                 src.eps, src.j0)

    def corrected(x, v):
        j = src.cell(x)
        w = v + tau * src.g(j, t, v)
        if not system.in_domain(w):
            raise StateLeftDomain(f"corrected state {w} left the domain at x={x}")
        return w

    # corrected states per region; regions may span several cells
    old_left = [f.uL.copy() for f in before]
    old_right = [f.uR.copy() for f in before]
    xs = [f.x_at(t) for f in before]
    births = []  # (x, region, wL, wR)
    region_bounds = [-math.inf] + xs + [math.inf]
    region_states = [engine.far_left] + [f.uR for f in before]
    left_vals, right_vals = [], []
    for k, v in enumerate(region_states):
        a, b = region_bounds[k], region_bounds[k + 1]
        if src.grid:
            ja = src.cell(a) if a > -math.inf else src.j0
            jb = src.cell(b) if b < math.inf else src.j0 + src.m - 1
            ws = {j: corrected(j * src.eps + 0.5 * src.eps, v) for j in range(ja, jb + 1)}
            for j in src.boundaries(a, b):
                if not np.array_equal(ws[j - 1], ws[j]):
                    births.append((j * src.eps, k, ws[j - 1], ws[j]))
            left_vals.append(ws[ja])
            right_vals.append(ws[jb])
        else:
            w = corrected(0.0, v)
            left_vals.append(w)
            right_vals.append(w)
    engine._advance_mass(t)
    engine.far_left = left_vals[0]
    engine.far_left_log.append((t, engine.far_left.tolist()))

    marker = engine.log_node(Node(0, t, math.nan, UPDATE, [], [], mode="update"))
    marker.source_atoms = atoms
    max_rel = 0.0
    n_resolved = 0
    shift = [np.zeros(system.n) for _ in region_states]  # offsets left by untracked waves
    for k, f in enumerate(before):
        uL = right_vals[k] + shift[k]
        uR = left_vals[k + 1]
        if np.array_equal(uL, old_left[k]) and np.array_equal(uR, old_right[k]):
            continue
        try:
            specs, w = _update_specs(engine, f, uL, uR, floor, k == len(before) - 1)
        except FTError as exc:
            raise RiemannFailure(f"update re-solve at x={xs[k]}: {exc}") from exc
        shift[k + 1] = w - uR
        same = [s for s in specs if s.family == f.family]
        if same and abs(f.size) > 0:
            max_rel = max(max_rel, abs(sum(s.size for s in same) - f.size) / abs(f.size))
        new = engine.replace_block([f], specs, xs[k], marker)
        marker.parts.append((xs[k], [f.id], [g.id for g in new]))
        n_resolved += 1

    new_strength = 0.0
    n_births = 0
    for x, k, wL, wR in births:
        wL, wR = wL + shift[k], wR + shift[k]
        after = _front_before(engine, x)
        try:
            fan = riemann.solve_riemann(system, wL, wR)
        except FTError as exc:
            raise RiemannFailure(f"grid birth at x={x}: {exc}") from exc
        specs = riemann.discretize_fan(fan, engine.config.eps, system)
        node = engine.log_node(Node(0, t, x, BIRTH, [], [], mode="accurate"))
        new = engine.replace_block([], specs, x, node, after=after)
        new_strength += sum(g.strength for g in new)
        n_births += 1
    _check_chain(engine)
    engine.recompute_functionals()
    engine.mass = engine.profile().integral(*engine.config.window).astype(float)
    engine._mass_t = t
    tv_after = engine._tv()
    marker.dQ = engine.Q - q_before
    marker.dUpsilon = engine.V + engine.config.kappa * engine.Q - (
        sum(g.strength for g in before) + engine.config.kappa * q_before)
    marker.dV = engine.V - sum(g.strength for g in before)
    engine.rebuild_queue()
    if engine.np_total > engine.config.np_budget * (1 + 1e-12):
        raise NPBudgetExceeded(f"nonphysical strength {engine.np_total:.3e} after update at t={t}")
    engine._record()
    return UpdateReport(t, n, tv_before, tv_after, q_before, engine.Q, new_strength, max_rel,
                        n_births, n_resolved)


def _front_before(engine: Engine, x: float) -> Optional[Front]:
    f = engine.head
    last = None
    while f is not None and f.x_at(engine.t) < x:
        last = f
        f = f.next
    return last


def _check_chain(engine: Engine, tol: float = 1e-12) -> None:
    f = engine.head
    left = engine.far_left
    while f is not None:
        if float(np.max(np.abs(f.uL - left))) > tol * (1.0 + float(np.max(np.abs(left)))):
            raise InconsistentNode(f"state mismatch at front {f.id} after update at t={engine.t}")
        left = f.uR
        f = f.next
    engine.far_right = left


@dataclass
class BalanceConfig:
    eps: float
    tau: float
    T: float
    beta: Optional[float] = None
    window: tuple = (-10.0, 10.0)
    update_threshold: Optional[float] = None
    tv_check: bool = True
    engine: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.tau <= self.eps):
            raise ValueError("need 0 < tau <= eps")
        if self.T < 0:
            raise ValueError("horizon must be nonnegative")


def beta_from_relation(eps: float, tau: float, alpha_l1: float, tv_cap: float, factor: float = 1.01) -> float:
    """Smallest admissible beta scaled by ``factor``: beta > 4(1+|alpha|)(eps + tau*TVcap)."""
    return factor * 4.0 * (1.0 + alpha_l1) * (eps + tau * tv_cap)


def run_balance(system: SystemSpec, datum: PiecewiseConstant, config: BalanceConfig) -> Trajectory:
    """Front tracking with source updates at t = n tau up to the horizon T.

    When the system has no source the update steps are skipped, so the node
    log coincides with the homogeneous engine run.
    """
    ecfg = EngineConfig(eps=config.eps, window=tuple(config.window), **config.engine)
    engine = Engine(system, datum, ecfg)
    src = discretize_source(system, config.eps, config.window)
    tv0 = engine._tv()
    reports: List[UpdateReport] = []
    G = _g_bound(system, max(tv0, 1e-300))
    n_steps = int(math.floor(config.T / config.tau + 1e-9))
    has_source = system.source is not None
    for n in range(1, n_steps + 1):
        tn = n * config.tau
        engine.run_to(tn)
        if has_source:
            rep = apply_source_step(engine, n, config.tau, src, config.update_threshold)
            reports.append(rep)
        if config.tv_check:
            tv = engine._tv()
            if tv > tv0 + G * tn + 1e-9:
                raise TVBlowup(f"TV {tv:.6g} exceeds {tv0:.6g} + G t = {tv0 + G * tn:.6g} at t={tn}")
    engine.run_to(config.T)
    engine._record()
    traj = engine.trajectory()
    traj.meta.update(
        {
            "eps": config.eps,
            "tau": config.tau,
            "T": config.T,
            "beta": config.beta,
            "G": G,
            "tv0": tv0,
            "alpha_l1": system.alpha_l1,
            "q": src.q.tolist() if src.grid else [],
            "updates": [rep.__dict__ for rep in reports],
            "lam_hat": engine.lam_hat,
            "np_created_total": engine.np_created_total,
        }
    )
    return traj
