"""Event-driven epsilon front tracking for the homogeneous system.

Fronts live in a doubly linked list in spatial order. Pairwise collision
times sit in a binary heap keyed by (t, x, family, id); entries carry the
version counters of both fronts so stale predictions are skipped lazily.

At a collision the incoming pair is replaced either by the discretized
solution of the Riemann problem across both (accurate mode) or, when the
interaction amount is below ``rho``, by the incoming families' waves plus
one nonphysical front travelling at ``lam_hat`` (simplified mode). Every
node is logged together with the changes of V, Q and V + kappa Q.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import algebra, kernels, riemann
from .algebra import SystemSpec, as_state
from .errors import (
    FrontExplosion,
    InconsistentNode,
    NPBudgetExceeded,
    OutOfDomain,
    RiemannFailure,
    TimeOutOfRange,
    FTError,
)
from .measures import cancellation_amount, glimm_Q, interaction_amount
from .riemann import CONTACT, NONPHYSICAL, RAREFACTION, SHOCK, FrontSpec

INTERACTION = "interaction"
UPDATE = "update"
BIRTH = "birth"


@dataclass
class PiecewiseConstant:
    """Profile with ``states[k]`` on (x_{k-1}, x_k); len(states) = len(x) + 1."""

    x: np.ndarray
    states: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        st = np.asarray(self.states, dtype=float)
        if st.ndim == 1:
            st = st.reshape(-1, 1)
        self.states = st
        if self.states.shape[0] != self.x.size + 1:
            raise ValueError("need one more state than breakpoints")
        if self.x.size > 1 and np.any(np.diff(self.x) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def total_variation(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.states, axis=0), axis=1)))

    def __call__(self, x: float) -> np.ndarray:
        """Right-continuous value at x."""
        k = int(np.searchsorted(self.x, x, side="right"))
        return self.states[k]

    def integral(self, a: float, b: float) -> np.ndarray:
        edges = np.concatenate([[a], np.clip(self.x, a, b), [b]])
        return np.diff(edges) @ self.states

    @staticmethod
    def constant(state) -> "PiecewiseConstant":
        st = np.atleast_1d(np.asarray(state, dtype=float))
        return PiecewiseConstant(np.zeros(0), st.reshape(1, -1))


@dataclass
class Front:
    id: int
    family: int
    kind: str
    size: float
    speed: float
    uL: np.ndarray
    uR: np.ndarray
    sig0: float
    sig1: float
    birth: int
    t_birth: float
    segs: List[Tuple[float, float, float]]
    death: Optional[int] = None
    t_death: float = math.inf
    prev: Optional["Front"] = field(default=None, repr=False, compare=False)
    next: Optional["Front"] = field(default=None, repr=False, compare=False)
    version: int = 0
    upsilon: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def is_np(self) -> bool:
        return self.kind == NONPHYSICAL

    @property
    def strength(self) -> float:
        return abs(self.size)

    def x_at(self, t: float) -> float:
        seg = self.segs[-1]
        if t < seg[0]:
            for seg in reversed(self.segs):
                if seg[0] <= t:
                    break
        return seg[1] + seg[2] * (t - seg[0])

    def speed_at(self, t: float) -> float:
        seg = self.segs[0]
        for s in self.segs:
            if s[0] <= t:
                seg = s
        return seg[2]

    def alive_at(self, t: float) -> bool:
        return self.t_birth <= t < self.t_death


@dataclass
class Node:
    id: int
    t: float
    x: float
    kind: str
    incoming: List[int]
    outgoing: List[int]
    mode: str = ""
    amount: float = 0.0
    cancellation: float = 0.0
    extension: bool = False
    dV: float = 0.0
    dQ: float = 0.0
    dUpsilon: float = 0.0
    np_created: float = 0.0
    parts: List[Tuple[float, List[int], List[int]]] = field(default_factory=list)
    source_atoms: List[Tuple[float, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "t": self.t,
            "x": self.x,
            "kind": self.kind,
            "incoming": list(self.incoming),
            "outgoing": list(self.outgoing),
            "mode": self.mode,
            "amount": self.amount,
            "cancellation": self.cancellation,
            "extension": self.extension,
            "dV": self.dV,
            "dQ": self.dQ,
            "dUpsilon": self.dUpsilon,
            "np_created": self.np_created,
        }
        if self.parts:
            d["parts"] = [[x, list(i), list(o)] for x, i, o in self.parts]
        if self.source_atoms:
            d["source_atoms"] = [list(a) for a in self.source_atoms]
        return d


@dataclass
class EngineConfig:
    eps: float
    rho: Optional[float] = None
    lam_hat: Optional[float] = None
    kappa: float = 10.0
    front_cap: int = 1_000_000
    np_drop: float = 1e-12
    np_budget: Optional[float] = None
    simul_tol: float = 1e-12
    perturb: float = 1e-13
    mode: Optional[str] = None
    approaching_only: bool = False
    window: Tuple[float, float] = (-10.0, 10.0)

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.rho is None:
            self.rho = self.eps**3
        if self.np_budget is None:
            self.np_budget = self.eps


@dataclass(order=True)
class Event:
    t: float
    x: float
    family: int
    left_id: int
    right_id: int = field(compare=False)
    vl: int = field(compare=False, default=0)
    vr: int = field(compare=False, default=0)


def estimate_lam_hat(system: SystemSpec, per_axis: int = 9) -> float:
    """max lambda over a sample grid of the domain box, plus one."""
    axes = [np.linspace(system.lo[k], system.hi[k], per_axis) for k in range(system.n)]
    best = -math.inf
    for pt in itertools.product(*axes):
        lam = algebra.eigenvalues(system, np.array(pt))
        best = max(best, float(np.max(lam)))
    return best + 1.0


class Engine:
    """Owns the front list, event queue and node log of one run."""

    def __init__(self, system: SystemSpec, datum: PiecewiseConstant, config: EngineConfig):
        self.system = system
        self.config = config
        self.n = system.n
        self.np_family = system.n + 1
        if config.lam_hat is None:
            config.lam_hat = estimate_lam_hat(system)
        self.lam_hat = float(config.lam_hat)
        self.t = float(datum.t)
        self.t0 = self.t
        self.head: Optional[Front] = None
        self.tail: Optional[Front] = None
        self.fronts: Dict[int, Front] = {}
        self.nodes: List[Node] = []
        self.heap: list = []
        self.n_alive = 0
        self.np_total = 0.0
        self.np_created_total = 0.0
        self.V = 0.0
        self.Q = 0.0
        self.series: List[dict] = []
        self._ids = itertools.count()
        self.far_left = datum.states[0].copy()
        self.far_right = datum.states[-1].copy()
        self.far_left_log: List[Tuple[float, List[float]]] = [(self.t, self.far_left.tolist())]
        self.mass = datum.integral(*config.window).astype(float)
        self._mass_t = self.t
        self._build(datum)

    # ---- construction -------------------------------------------------
    def _new_front(self, spec: FrontSpec, t: float, x: float, node_id: int) -> Front:
        fid = next(self._ids)
        if spec.kind == NONPHYSICAL:
            speed = self.lam_hat
        else:
            speed = float(spec.speed)
        f = Front(
            id=fid,
            family=spec.family,
            kind=spec.kind,
            size=float(spec.size),
            speed=speed,
            uL=np.array(spec.uL, dtype=float),
            uR=np.array(spec.uR, dtype=float),
            sig0=float(spec.sig0),
            sig1=float(spec.sig1),
            birth=node_id,
            t_birth=t,
            segs=[(t, x, speed)],
        )
        self.fronts[fid] = f
        return f

    def _np_spec(self, uL: np.ndarray, uR: np.ndarray) -> FrontSpec:
        st = float(np.linalg.norm(uR - uL))
        return FrontSpec(self.np_family, NONPHYSICAL, st, self.lam_hat, uL, uR,
                         self.lam_hat, self.lam_hat, self.lam_hat, self.lam_hat)

    def _riemann_specs(self, uL, uR, keep_single=()) -> List[FrontSpec]:
        fan = riemann.solve_riemann(self.system, uL, uR)
        return riemann.discretize_fan(fan, self.config.eps, self.system, keep_single)

    def _build(self, datum: PiecewiseConstant) -> None:
        for s in datum.states:
            if not self.system.in_domain(s):
                raise OutOfDomain(f"datum state {s} outside the domain")
        prev = None
        for k, x in enumerate(datum.x):
            uL, uR = datum.states[k], datum.states[k + 1]
            if np.array_equal(uL, uR):
                continue
            try:
                specs = self._riemann_specs(uL, uR)
            except FTError as exc:
                raise RiemannFailure(f"Riemann problem at x={x}: {exc}") from exc
            node = Node(len(self.nodes), self.t, float(x), BIRTH, [], [], mode="accurate")
            self.nodes.append(node)
            for sp in specs:
                f = self._new_front(sp, self.t, float(x), node.id)
                self._link_after(prev, f)
                prev = f
                node.outgoing.append(f.id)
        self.recompute_functionals()
        for node in self.nodes:
            node.dV = 0.0
        f = self.head
        while f is not None and f.next is not None:
            self._schedule(f, f.next)
            f = f.next
        self._record()

    # ---- linked list ----------------------------------------------------
    def _link_after(self, prev: Optional[Front], f: Front) -> None:
        nxt = self.head if prev is None else prev.next
        f.prev = prev
        f.next = nxt
        if prev is None:
            self.head = f
        else:
            prev.next = f
        if nxt is None:
            self.tail = f
        else:
            nxt.prev = f
        self.n_alive += 1
        if f.is_np:
            self.np_total += f.strength
        if self.n_alive > self.config.front_cap:
            tail = [n.to_dict() for n in self.nodes[-5:]]
            raise FrontExplosion(f"front count {self.n_alive} exceeds cap; last nodes: {tail}")

    def _unlink(self, f: Front) -> None:
        if f.prev is None:
            self.head = f.next
        else:
            f.prev.next = f.next
        if f.next is None:
            self.tail = f.prev
        else:
            f.next.prev = f.prev
        f.prev = f.next = None
        f.version += 1
        self.n_alive -= 1
        if f.is_np:
            self.np_total -= f.strength

    def alive(self) -> List[Front]:
        out = []
        f = self.head
        while f is not None:
            out.append(f)
            f = f.next
        return out

    # ---- events ---------------------------------------------------------
    def _collision(self, p: Front, q: Front) -> Optional[Tuple[float, float]]:
        sp, sq = p.speed, q.speed
        if sp <= sq:
            return None
        tp, xp, _ = p.segs[-1]
        tq, xq, _ = q.segs[-1]
        tc = (xq - xp + sp * tp - sq * tq) / (sp - sq)
        if tc < self.t:
            tc = self.t
        return tc, xp + sp * (tc - tp)

    def _schedule(self, p: Front, q: Front) -> None:
        hit = self._collision(p, q)
        if hit is None:
            return
        tc, xc = hit
        tol = self.config.simul_tol * max(1.0, abs(tc))
        for a, b, other in ((p.prev, p, q), (q, q.next, p)):
            if a is None or b is None:
                continue
            h2 = self._collision(a, b)
            if h2 is not None and abs(h2[0] - tc) <= tol and abs(h2[1] - xc) <= tol:
                # keep exactly two incoming fronts: nudge the front not shared
                self._perturb(other)
                hit = self._collision(p, q)
                if hit is None:
                    return
                tc, xc = hit
                break
        ev = Event(tc, xc, min(p.family, q.family), p.id, q.id, p.version, q.version)
        heapq.heappush(self.heap, ev)

    def _perturb(self, f: Front) -> None:
        t = self.t
        x = f.x_at(t)
        f.speed += self.config.perturb
        f.segs.append((t, x, f.speed))
        f.version += 1

    def _valid(self, ev: Event) -> bool:
        p = self.fronts.get(ev.left_id)
        q = self.fronts.get(ev.right_id)
        return (
            p is not None
            and q is not None
            and p.death is None
            and q.death is None
            and p.next is q
            and p.version == ev.vl
            and q.version == ev.vr
        )

    def next_event(self, horizon: float = math.inf) -> Optional[Event]:
        """Earliest valid collision at or before ``horizon``, or None."""
        while self.heap:
            ev = self.heap[0]
            if not self._valid(ev):
                heapq.heappop(self.heap)
                continue
            if ev.t > horizon:
                return None
            return ev
        return None

    # ---- functionals ----------------------------------------------------
    def q_of(self, fronts: Sequence[Front]) -> float:
        return glimm_Q(fronts, self.n, self.config.approaching_only)

    def recompute_functionals(self) -> None:
        fr = self.alive()
        self.V = float(sum(f.strength for f in fr))
        self.Q = self.q_of(fr)
        self.np_total = float(sum(f.strength for f in fr if f.is_np))

    def _delta_q(self, left: Optional[Front], right: Optional[Front],
                 removed: Sequence[Front], added: Sequence[Front]) -> float:
        """Change of Q when the consecutive block ``removed`` between ``left``
        and ``right`` is replaced by ``added``."""
        nf = self.n + 2
        Ls = np.zeros(nf)
        Rs = np.zeros(nf)
        others: Dict[int, list] = {k: [] for k in range(1, self.n + 1)}
        f = left
        while f is not None:
            Ls[f.family] += f.strength
            if f.family <= self.n:
                others[f.family].append((f, True))
            f = f.prev
        f = right
        while f is not None:
            Rs[f.family] += f.strength
            if f.family <= self.n:
                others[f.family].append((f, False))
            f = f.next
        approaching = self.config.approaching_only

        def cross(block: Sequence[Front]) -> float:
            tot = 0.0
            for b in block:
                hi = float(np.sum(Ls[b.family + 1:]))
                lo = float(np.sum(Rs[:b.family]))
                tot += b.strength * (hi + lo)
                if b.family <= self.n and others[b.family]:
                    ot = others[b.family]
                    if approaching:
                        # only pairs whose left member is faster
                        for o, lft in ot:
                            pair_app = (o.speed > b.speed) if lft else (b.speed > o.speed)
                            if pair_app:
                                tot += 0.5 * kernels.pair_integral(
                                    b.strength, b.sig0, b.sig1, o.strength, o.sig0, o.sig1)
                    else:
                        tot += 0.5 * kernels.pair_sum(
                            b.strength, b.sig0, b.sig1,
                            np.array([o.strength for o, _ in ot]),
                            np.array([o.sig0 for o, _ in ot]),
                            np.array([o.sig1 for o, _ in ot]),
                        )
            return tot

        return cross(added) - cross(removed) + self.q_of(added) - self.q_of(removed)

    # ---- node resolution --------------------------------------------------
    def _splice(self, left: Optional[Front], right: Optional[Front], removed: List[Front],
                specs: List[FrontSpec], t: float, x: float, node: Node,
                track_q: bool = True) -> List[Front]:
        dq = 0.0
        new = [self._new_front(sp, t, x, node.id) for sp in specs]
        if track_q:
            dq = self._delta_q(left, right, removed, new)
        dv = sum(f.strength for f in new) - sum(f.strength for f in removed)
        for f in removed:
            self._unlink(f)
            f.death = node.id
            f.t_death = t
        prev = left
        for f in new:
            self._link_after(prev, f)
            prev = f
        node.incoming.extend(f.id for f in removed)
        node.outgoing.extend(f.id for f in new)
        node.dV += dv
        node.dQ += dq
        node.dUpsilon = node.dV + self.config.kappa * node.dQ
        self.V += dv
        self.Q += dq
        # rescheduling
        chain = ([left] if left is not None else []) + new + ([right] if right is not None else [])
        for a, b in zip(chain[:-1], chain[1:]):
            self._schedule(a, b)
        return new

    def _advance_mass(self, t: float) -> None:
        if t == self._mass_t:
            return
        rate = np.zeros(self.n)
        f = self.head
        while f is not None:
            rate += f.speed * (f.uL - f.uR)
            f = f.next
        self.mass = self.mass + rate * (t - self._mass_t)
        self._mass_t = t

    def _simplified_specs(self, p: Front, q: Front) -> List[FrontSpec]:
        uL, uR = p.uL, q.uR
        specs: List[FrontSpec] = []
        if p.is_np and q.is_np:
            return [self._np_spec(uL, uR)]
        if p.is_np or q.is_np:
            phys = q if p.is_np else p
            sw = riemann.lax_curve(self.system, uL, phys.family, phys.size)
            specs.append(self._spec_from_subwave(sw))
            u = sw.uR
        elif p.family == q.family:
            sw = riemann.lax_curve(self.system, uL, p.family, p.size + q.size)
            specs.append(self._spec_from_subwave(sw))
            u = sw.uR
        else:
            sw1 = riemann.lax_curve(self.system, uL, q.family, q.size)
            sw2 = riemann.lax_curve(self.system, sw1.uR, p.family, p.size)
            specs.extend([self._spec_from_subwave(sw1), self._spec_from_subwave(sw2)])
            u = sw2.uR
        specs = [s for s in specs if abs(s.size) > self.config.np_drop]
        res = float(np.linalg.norm(uR - u))
        if res > self.config.np_drop:
            specs.append(self._np_spec(u, uR))
        elif specs:
            specs[-1].uR = uR.copy()
        return specs

    @staticmethod
    def _spec_from_subwave(sw: riemann.SubWave) -> FrontSpec:
        if sw.kind == SHOCK:
            return FrontSpec(sw.family, SHOCK, sw.size, sw.speed, sw.uL, sw.uR, sw.speed, sw.speed,
                             sw.lam_left, sw.lam_right)
        if sw.kind == CONTACT:
            return FrontSpec(sw.family, CONTACT, sw.size, sw.speed, sw.uL, sw.uR, sw.speed, sw.speed,
                             sw.lam_left, sw.lam_right)
        return FrontSpec(sw.family, RAREFACTION, sw.size, sw.speed, sw.uL, sw.uR, sw.lam_left,
                         sw.lam_right, sw.lam_left, sw.lam_right)

    def choose_mode(self, p: Front, q: Front, amount: float) -> str:
        if self.config.mode is not None:
            return self.config.mode
        if p.is_np or q.is_np:
            return "simplified"
        return "simplified" if amount < self.config.rho else "accurate"

    def resolve_interaction(self, ev: Event, mode: Optional[str] = None) -> Node:
        if not self._valid(ev):
            raise InconsistentNode(f"stale event {ev}")
        p = self.fronts[ev.left_id]
        q = self.fronts[ev.right_id]
        self._advance_mass(ev.t)
        self.t = ev.t
        amount, ext = interaction_amount(p, q, self.n)
        mode = mode or self.choose_mode(p, q, amount)
        if p.is_np or q.is_np:
            mode = "simplified"
        try:
            if mode == "simplified":
                specs = self._simplified_specs(p, q)
            else:
                keep = {f.family for f in (p, q) if f.kind == RAREFACTION}
                specs = self._riemann_specs(p.uL, q.uR, keep_single=keep)
        except FTError as exc:
            raise RiemannFailure(f"interaction at t={ev.t}, x={ev.x}: {exc}") from exc
        node = Node(len(self.nodes), ev.t, ev.x, INTERACTION, [], [], mode=mode,
                    amount=amount, cancellation=cancellation_amount([p, q]), extension=ext)
        self.nodes.append(node)
        np_before = self.np_total
        self._splice(p.prev, q.next, [p, q], specs, ev.t, ev.x, node)
        node.np_created = max(0.0, self.np_total - np_before)
        self.np_created_total += node.np_created
        if self.np_total > self.config.np_budget * (1 + 1e-12):
            raise NPBudgetExceeded(
                f"nonphysical strength {self.np_total:.3e} exceeds {self.config.np_budget:.3e} "
                f"at node {node.to_dict()}"
            )
        self._record()
        return node

    # ---- external updates (used by fracstep) -------------------------------
    def replace_block(self, removed: List[Front], specs: List[FrontSpec], x: float, node: Node,
                      after: Optional[Front] = None, track_q: bool = False) -> List[Front]:
        """Replace a consecutive block of fronts (or insert after ``after``
        when ``removed`` is empty) by fronts built from ``specs``."""
        if removed:
            left, right = removed[0].prev, removed[-1].next
        else:
            left = after
            right = self.head if after is None else after.next
        return self._splice(left, right, removed, specs, self.t, x, node, track_q=track_q)

    def log_node(self, node: Node) -> Node:
        node.id = len(self.nodes)
        self.nodes.append(node)
        return node

    def rebuild_queue(self) -> None:
        self.heap = []
        f = self.head
        while f is not None and f.next is not None:
            self._schedule(f, f.next)
            f = f.next

    # ---- driver ------------------------------------------------------------
    def _tv(self) -> float:
        tv = 0.0
        f = self.head
        while f is not None:
            tv += float(np.linalg.norm(f.uR - f.uL))
            f = f.next
        return tv

    def _record(self) -> None:
        self._advance_mass(self.t)
        self.series.append(
            {
                "t": self.t,
                "V": self.V,
                "Q": self.Q,
                "Upsilon": self.V + self.config.kappa * self.Q,
                "TV": self._tv(),
                "mass": self.mass.copy(),
                "n_fronts": self.n_alive,
                "np_strength": self.np_total,
            }
        )

    def run_to(self, t_target: float) -> "Engine":
        if t_target < self.t:
            raise TimeOutOfRange(f"target {t_target} before clock {self.t}")
        while True:
            ev = self.next_event(t_target)
            if ev is None:
                break
            heapq.heappop(self.heap)
            self.resolve_interaction(ev)
        self._advance_mass(t_target)
        self.t = t_target
        return self

    # ---- sampling -----------------------------------------------------------
    def profile(self) -> PiecewiseConstant:
        return sample_fronts(self.alive(), self.t, self.far_left)

    def trajectory(self) -> "Trajectory":
        return Trajectory(self.system, self.config, self.fronts, self.nodes, self.series,
                          self.t0, self.t, self.far_left_log, self.lam_hat)


def sample_fronts(fronts: Sequence[Front], t: float, far_left: np.ndarray) -> PiecewiseConstant:
    xs: List[float] = []
    states = [np.array(far_left, dtype=float)]
    for f in fronts:
        x = f.x_at(t)
        if xs and x <= xs[-1]:
            states[-1] = f.uR.copy()
            continue
        if np.array_equal(f.uL, f.uR):
            continue
        xs.append(x)
        states.append(f.uR.copy())
    return PiecewiseConstant(np.array(xs), np.array(states), t)


class Trajectory:
    """Complete history of one run: every front ever created, the node log
    and the functional series."""

    def __init__(self, system, config, fronts, nodes, series, t0, t_end, far_left_log, lam_hat):
        self.system = system
        self.config = config
        self.fronts: Dict[int, Front] = fronts
        self.nodes: List[Node] = nodes
        self.series = series
        self.t0 = t0
        self.t_end = t_end
        self.far_left_log = far_left_log
        self.lam_hat = lam_hat
        self.meta: dict = {}
        self._epochs = None

    @property
    def epochs(self) -> np.ndarray:
        if self._epochs is None:
            ts = sorted({self.t0, self.t_end, *(n.t for n in self.nodes)})
            self._epochs = np.array(ts)
        return self._epochs

    def far_left_at(self, t: float) -> np.ndarray:
        st = self.far_left_log[0][1]
        for tt, s in self.far_left_log:
            if tt <= t:
                st = s
        return np.array(st)

    def alive_at(self, t: float) -> List[Front]:
        """Fronts alive at t (right-continuous), in spatial order."""
        fr = [f for f in self.fronts.values() if f.alive_at(t)]
        fr.sort(key=lambda f: (f.x_at(t), f.speed, f.id))
        return fr

    def sample(self, t: float) -> PiecewiseConstant:
        if t < self.t0 - 1e-15 or t > self.t_end + 1e-15:
            raise TimeOutOfRange(f"t={t} outside [{self.t0}, {self.t_end}]")
        return sample_fronts(self.alive_at(t), t, self.far_left_at(t))

    def node_times(self) -> np.ndarray:
        return np.array([n.t for n in self.nodes])


# ---- functional interface -------------------------------------------------

def init(system: SystemSpec, datum: PiecewiseConstant, config: EngineConfig) -> Engine:
    return Engine(system, datum, config)


def next_event(state: Engine, horizon: float = math.inf) -> Optional[Event]:
    return state.next_event(horizon)


def resolve_interaction(state: Engine, event: Event, mode: Optional[str] = None) -> Node:
    if state.heap and state.heap[0] is event:
        heapq.heappop(state.heap)
    return state.resolve_interaction(event, mode)


def run_to(state: Engine, t_target: float) -> Engine:
    return state.run_to(t_target)


def sample(obj, t: float) -> PiecewiseConstant:
    if isinstance(obj, Engine):
        if abs(t - obj.t) > 1e-15:
            return obj.trajectory().sample(t)
        return obj.profile()
    return obj.sample(t)
