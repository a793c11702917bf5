"""Glimm functionals, interaction amounts and the measures built on a run.

Fronts are anything with the attributes of :class:`ftbalance.engine.Front`;
a *snapshot* is a spatially ordered sequence of such fronts. Wave measures
project each jump on the averaged left eigenvectors,

    upsilon_i = l~_i(uL, uR) . (uR - uL),

and split into a jump part (fronts on tracked (beta, i)-curves) and a
continuous remainder. Space-time measures are kept as plain atom lists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import algebra, kernels
from .errors import InconsistentNode
from .riemann import NONPHYSICAL, SHOCK

STRENGTH_FLOOR = "strength-floor"
CANCELLED = "cancelled"
MERGED = "merged"
HORIZON = "horizon"


# ---- 1D and space-time atomic measures ----------------------------------

@dataclass
class AtomicMeasure1D:
    x: np.ndarray
    w: np.ndarray
    t: float = 0.0
    ids: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.w = np.asarray(self.w, dtype=float).reshape(-1)
        if self.ids is not None:
            self.ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        if self.x.size != self.w.size:
            raise ValueError("positions and weights differ in length")
        if self.x.size > 1 and np.any(np.diff(self.x) < 0):
            order = np.argsort(self.x, kind="stable")
            self.x, self.w = self.x[order], self.w[order]
            if self.ids is not None:
                self.ids = self.ids[order]

    def __len__(self) -> int:
        return self.x.size

    def _take(self, mask) -> "AtomicMeasure1D":
        return AtomicMeasure1D(self.x[mask], self.w[mask], self.t,
                               None if self.ids is None else self.ids[mask])

    def restrict(self, a: float, b: float) -> "AtomicMeasure1D":
        return self._take((self.x >= a) & (self.x <= b))

    def restrict_union(self, intervals: Sequence[Tuple[float, float]]) -> "AtomicMeasure1D":
        mask = np.zeros(self.x.size, dtype=bool)
        for a, b in intervals:
            mask |= (self.x >= a) & (self.x <= b)
        return self._take(mask)

    def positive(self) -> "AtomicMeasure1D":
        return AtomicMeasure1D(self.x, np.maximum(self.w, 0.0), self.t, self.ids)

    def negative(self) -> "AtomicMeasure1D":
        return AtomicMeasure1D(self.x, np.maximum(-self.w, 0.0), self.t, self.ids)

    def total(self) -> float:
        return float(np.sum(self.w))

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.w)))

    def __add__(self, other: "AtomicMeasure1D") -> "AtomicMeasure1D":
        ids = None
        if self.ids is not None and other.ids is not None:
            ids = np.concatenate([self.ids, other.ids])
        return AtomicMeasure1D(np.concatenate([self.x, other.x]), np.concatenate([self.w, other.w]),
                               self.t, ids)


@dataclass
class SpaceTimeMeasure:
    t: np.ndarray
    x: np.ndarray
    w: np.ndarray
    kind: str = ""

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.w = np.asarray(self.w, dtype=float).reshape(-1)
        if np.any(self.w < 0):
            raise ValueError("space-time measures are nonnegative")

    @staticmethod
    def from_atoms(atoms: Iterable[Tuple[float, float, float]], kind: str = "") -> "SpaceTimeMeasure":
        a = list(atoms)
        if not a:
            return SpaceTimeMeasure(np.zeros(0), np.zeros(0), np.zeros(0), kind)
        arr = np.array(a, dtype=float)
        return SpaceTimeMeasure(arr[:, 0], arr[:, 1], arr[:, 2], kind)

    def __len__(self) -> int:
        return self.t.size

    def total(self) -> float:
        return float(np.sum(self.w))

    def strip(self, t1: float, t2: float, left_open: bool = True) -> float:
        """Mass on (t1, t2] x R (or [t1, t2] when ``left_open`` is False)."""
        lo = self.t > t1 if left_open else self.t >= t1
        return float(np.sum(self.w[lo & (self.t <= t2)]))

    def region(self, contains) -> float:
        """Mass of the atoms for which ``contains(t, x)`` is true."""
        m = 0.0
        for t, x, w in zip(self.t, self.x, self.w):
            if w and contains(t, x):
                m += w
        return m

    def __add__(self, other: "SpaceTimeMeasure") -> "SpaceTimeMeasure":
        return SpaceTimeMeasure(np.concatenate([self.t, other.t]), np.concatenate([self.x, other.x]),
                                np.concatenate([self.w, other.w]), self.kind)

    def aggregated(self) -> Dict[Tuple[float, float], float]:
        out: Dict[Tuple[float, float], float] = {}
        for t, x, w in zip(self.t, self.x, self.w):
            out[(t, x)] = out.get((t, x), 0.0) + w
        return out


# ---- Glimm functionals ----------------------------------------------------

def glimm_V(fronts: Sequence) -> float:
    return float(sum(abs(f.size) for f in fronts))


def glimm_Q(fronts: Sequence, n: int, approaching_only: bool = False) -> float:
    """Interaction potential of a spatially ordered snapshot.

    Linear part: |s'||s''| over pairs whose left member belongs to a higher
    family (nonphysical fronts count as family n + 1). Quadratic part: the
    same-family double integral of |sigma(tau') - sigma(tau'')| with sigma
    affine between each front's ``sig0`` and ``sig1``; with
    ``approaching_only`` it is restricted to approaching pairs.
    """
    fams = np.array([f.family for f in fronts], dtype=np.int64)
    sizes = np.array([abs(f.size) for f in fronts])
    total = float(kernels.linear_term(fams, sizes, n + 1)) if len(fronts) else 0.0
    for fam in range(1, n + 1):
        sel = [f for f in fronts if f.family == fam]
        if not sel:
            continue
        a = np.array([abs(f.size) for f in sel])
        s0 = np.array([f.sig0 for f in sel])
        s1 = np.array([f.sig1 for f in sel])
        if approaching_only:
            total += 0.5 * kernels.approaching_quadratic(a, s0, s1, np.array([f.speed for f in sel]))
        else:
            total += 0.25 * kernels.quadratic_full(a, s0, s1)
    return float(total)


def upsilon(fronts: Sequence, n: int, kappa: float = 10.0, approaching_only: bool = False) -> float:
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return glimm_V(fronts) + kappa * glimm_Q(fronts, n, approaching_only)


def interaction_amount(p, q, n: int) -> Tuple[float, bool]:
    """Amount of interaction of two colliding fronts and an extension flag.

    Distinct families: |s'||s''|. Same family, two shocks of equal sign:
    |s'||s''| times the difference of their speeds. Any other same-family
    pair uses |s'||s''| and is flagged as an extension.
    """
    a = abs(p.size) * abs(q.size)
    if a == 0.0:
        return 0.0, False
    if p.family != q.family or p.family > n:
        return a, False
    if p.kind == SHOCK and q.kind == SHOCK and p.size * q.size > 0:
        return a * abs(p.speed - q.speed), False
    return a, True


def cancellation_amount(fronts: Sequence) -> float:
    """Sum over physical families of sum|s| - |sum s| for the given fronts."""
    by: Dict[int, List[float]] = {}
    for f in fronts:
        if f.kind == NONPHYSICAL:
            continue
        by.setdefault(f.family, []).append(f.size)
    return float(sum(sum(abs(s) for s in v) - abs(sum(v)) for v in by.values()))


# ---- wave measures -------------------------------------------------------

def jump_upsilon(system, uL, uR) -> np.ndarray:
    """Vector (upsilon_1, ..., upsilon_N) of a single jump."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    du = uR - uL
    if system.n == 1:
        es = algebra.eigen(system, 0.5 * (uL + uR), check=False)
        return es.L @ du
    es = algebra.averaged_eigen(system, uL, uR)
    return es.L @ du


def front_upsilon(system, front) -> np.ndarray:
    if front.upsilon is None:
        front.upsilon = jump_upsilon(system, front.uL, front.uR)
    return front.upsilon


def wave_measure(system, fronts: Sequence, i: int, t: float = 0.0) -> AtomicMeasure1D:
    """upsilon_i of a front snapshot at time t; atoms carry the front ids."""
    xs, ws, ids = [], [], []
    for f in fronts:
        xs.append(f.x_at(t))
        ws.append(float(front_upsilon(system, f)[i - 1]))
        ids.append(f.id)
    return AtomicMeasure1D(np.array(xs), np.array(ws), t, np.array(ids, dtype=np.int64))


def profile_wave_measure(system, profile, i: int) -> AtomicMeasure1D:
    """upsilon_i of a piecewise-constant profile (one atom per breakpoint)."""
    ws = [float(jump_upsilon(system, profile.states[k], profile.states[k + 1])[i - 1])
          for k in range(profile.x.size)]
    return AtomicMeasure1D(profile.x.copy(), np.array(ws), profile.t)


def decomposition_residual(system, uL, uR) -> float:
    """|sum_i upsilon_i r~_i - (uR - uL)| for one jump."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    if system.n == 1:
        es = algebra.eigen(system, 0.5 * (uL + uR), check=False)
    else:
        es = algebra.averaged_eigen(system, uL, uR)
    ups = es.L @ (uR - uL)
    return float(np.linalg.norm(es.R @ ups - (uR - uL)))


# ---- node decomposition --------------------------------------------------

def node_parts(node) -> List[Tuple[float, List[int], List[int]]]:
    """Spatially localized pieces of a node: interactions and births are a
    single piece, update markers carry one piece per re-solved front."""
    if node.parts:
        return [(x, list(i), list(o)) for x, i, o in node.parts]
    return [(node.x, list(node.incoming), list(node.outgoing))]


# ---- (beta, i)-discontinuity curves ----------------------------------------

@dataclass
class DiscontinuityCurve:
    family: int
    front_ids: List[int]
    points: List[Tuple[float, float]]
    strengths: List[float]
    termination: str
    maximal: bool = True
    leftmost: bool = True

    @property
    def max_strength(self) -> float:
        return max(abs(s) for s in self.strengths) if self.strengths else 0.0

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "front_ids": list(self.front_ids),
            "points": [list(p) for p in self.points],
            "strengths": list(self.strengths),
            "termination": self.termination,
            "maximal": self.maximal,
            "leftmost": self.leftmost,
        }


def _front_speed_key(f, t):
    return (f.speed, f.id)


def track_beta_discontinuities(traj, beta: float, i: int) -> List[DiscontinuityCurve]:
    """Maximal leftmost chains of i-fronts with |s| >= beta/4 throughout and
    |s| >= beta somewhere.

    At a node the chain continues into the leftmost admissible outgoing
    i-front. When several admissible chains enter the same node only the
    leftmost one continues; the others end as ``merged``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    floor = beta / 4.0
    fronts = traj.fronts
    adm = {fid for fid, f in fronts.items() if f.family == i and abs(f.size) >= floor}
    succ: Dict[int, int] = {}
    ends: Dict[int, str] = {}
    has_pred = set()
    # death piece of each front
    for node in traj.nodes:
        for x, inc, out in node_parts(node):
            inc_adm = [fid for fid in inc if fid in adm]
            if not inc_adm:
                continue
            t = node.t
            inc_adm.sort(key=inc.index)
            out_i = [fronts[fid] for fid in out if fronts[fid].family == i]
            out_adm = [f for f in out_i if f.id in adm]
            if out_adm:
                nxt = min(out_adm, key=lambda f: _front_speed_key(f, t))
                succ[inc_adm[0]] = nxt.id
                has_pred.add(nxt.id)
                for other in inc_adm[1:]:
                    ends[other] = MERGED
            else:
                reason = STRENGTH_FLOOR if out_i else CANCELLED
                for fid in inc_adm:
                    ends[fid] = reason
    curves: List[DiscontinuityCurve] = []
    for fid in sorted(adm, key=lambda k: (fronts[k].t_birth, fronts[k].x_at(fronts[k].t_birth), k)):
        if fid in has_pred:
            continue
        chain = [fid]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        strengths = [fronts[k].size for k in chain]
        if max(abs(s) for s in strengths) < beta:
            continue
        last = fronts[chain[-1]]
        if last.death is None or last.t_death > traj.t_end:
            reason = HORIZON
        else:
            reason = ends.get(last.id, CANCELLED)
        pts: List[Tuple[float, float]] = []
        for k in chain:
            f = fronts[k]
            for (ts, xs, _) in f.segs:
                if not pts or ts > pts[-1][0]:
                    pts.append((ts, xs))
        t_end = min(last.t_death, traj.t_end)
        pts.append((t_end, last.x_at(t_end)))
        curves.append(DiscontinuityCurve(i, chain, pts, strengths, reason))
    return curves


def curve_front_ids(curves: Sequence[DiscontinuityCurve]) -> set:
    out = set()
    for c in curves:
        out.update(c.front_ids)
    return out


def split_jump_cont(measure: AtomicMeasure1D, curves: Sequence[DiscontinuityCurve]):
    """Atoms carried by fronts on the curves form the jump part, the rest
    the continuous part; both share the positions of ``measure``."""
    if measure.ids is None:
        raise ValueError("measure atoms need front ids")
    on = curve_front_ids(curves)
    mask = np.array([k in on for k in measure.ids], dtype=bool)
    jump = AtomicMeasure1D(measure.x, np.where(mask, measure.w, 0.0), measure.t, measure.ids)
    cont = AtomicMeasure1D(measure.x, np.where(mask, 0.0, measure.w), measure.t, measure.ids)
    return jump, cont


# ---- space-time measures from a trajectory ---------------------------------

def interaction_measures(traj) -> Tuple[SpaceTimeMeasure, SpaceTimeMeasure]:
    """mu^I and mu^IC atoms at interaction nodes."""
    I_atoms, IC_atoms = [], []
    for node in traj.nodes:
        if node.kind != "interaction":
            continue
        I_atoms.append((node.t, node.x, node.amount))
        IC_atoms.append((node.t, node.x, node.amount + node.cancellation))
    return SpaceTimeMeasure.from_atoms(I_atoms, "I"), SpaceTimeMeasure.from_atoms(IC_atoms, "IC")


def source_measure_atoms(t: float, tau: float, upsilons: Sequence[Tuple[float, np.ndarray]],
                         q: Optional[np.ndarray] = None, eps: Optional[float] = None,
                         j0: int = 0) -> List[Tuple[float, float, float]]:
    """Atoms of the source measure emitted at one update time.

    ``upsilons`` lists (x, upsilon-vector) of the fronts just before the
    update; each contributes tau * sum_i |upsilon_i| at its position. Cell
    j (absolute index j0 + k) contributes q_j tau at (t, j eps).
    """
    atoms = []
    for x, ups in upsilons:
        m = tau * float(np.sum(np.abs(ups)))
        if m > 0.0:
            atoms.append((t, float(x), m))
    if q is not None and eps is not None:
        for k, qj in enumerate(q):
            if qj > 0.0:
                atoms.append((t, (j0 + k) * eps, tau * float(qj)))
    return atoms


def source_measure(traj) -> SpaceTimeMeasure:
    atoms = []
    for node in traj.nodes:
        atoms.extend(node.source_atoms)
    return SpaceTimeMeasure.from_atoms(atoms, "source")


def wave_balance_atoms(system, traj, node, jump_ids: Optional[Dict[int, set]] = None):
    """Per-family atoms of mu_i and mu_i^jump at one node.

    Returns a list of (t, x, i, mu_i, mu_i_jump). Both atoms are outgoing
    minus incoming upsilon_i; the jump atom only counts fronts lying on
    tracked (beta, i)-curves, which reproduces the terminal / birth /
    triple-point / continuation cases.
    """
    out = []
    fr = traj.fronts
    for x, inc, outg in node_parts(node):
        for i in range(1, system.n + 1):
            ups_in = [float(front_upsilon(system, fr[k])[i - 1]) for k in inc]
            ups_out = [float(front_upsilon(system, fr[k])[i - 1]) for k in outg]
            mu = sum(ups_out) - sum(ups_in)
            mj = 0.0
            if jump_ids is not None and i in jump_ids:
                J = jump_ids[i]
                mj = (sum(u for k, u in zip(outg, ups_out) if k in J)
                      - sum(u for k, u in zip(inc, ups_in) if k in J))
            out.append((node.t, x, i, mu, mj))
    return out


def balance_nodes(traj):
    """Nodes that carry wave-balance atoms (initial births excluded)."""
    return [n for n in traj.nodes if not (n.kind == "birth" and n.t <= traj.t0)]


def wave_balance_measures(system, traj, curves_by_family: Optional[Dict[int, list]] = None):
    """All atoms of mu_i and mu_i^jump as a list of (t, x, i, mu, mu_jump)."""
    jump_ids = None
    if curves_by_family is not None:
        jump_ids = {i: curve_front_ids(c) for i, c in curves_by_family.items()}
    atoms = []
    for node in balance_nodes(traj):
        atoms.extend(wave_balance_atoms(system, traj, node, jump_ids))
    return atoms


@dataclass
class CompositeMeasures:
    I: SpaceTimeMeasure
    IC: SpaceTimeMeasure
    source: SpaceTimeMeasure
    jump_abs: SpaceTimeMeasure
    ICS: SpaceTimeMeasure
    ICJS: SpaceTimeMeasure
    balance_atoms: list = field(default_factory=list)


def composite_measures(system, traj, curves_by_family: Optional[Dict[int, list]] = None) -> CompositeMeasures:
    """mu^ICS = mu^IC + mu^source and mu^ICJS = mu^IC + sum_i |mu_i^jump| + mu^source."""
    mI, mIC = interaction_measures(traj)
    msrc = source_measure(traj)
    bal = wave_balance_measures(system, traj, curves_by_family)
    jabs = SpaceTimeMeasure.from_atoms([(t, x, abs(mj)) for t, x, i, mu, mj in bal if mj != 0.0], "jump")
    ics = mIC + msrc
    ics.kind = "ICS"
    icjs = mIC + jabs + msrc
    icjs.kind = "ICJS"
    return CompositeMeasures(mI, mIC, msrc, jabs, ics, icjs, bal)


def atomwise_leq(a: SpaceTimeMeasure, b: SpaceTimeMeasure, tol: float = 1e-14) -> bool:
    A = a.aggregated()
    B = b.aggregated()
    return all(w <= B.get(k, 0.0) + tol for k, w in A.items())


def q_negative_variation(traj, t1: float, t2: float) -> float:
    """Negative variation of t -> Q(t) on (t1, t2] from the functional series."""
    ser = traj.series
    tv = 0.0
    for a, b in zip(ser[:-1], ser[1:]):
        if t1 < b["t"] <= t2:
            tv += max(0.0, a["Q"] - b["Q"])
    return tv


def check_node_consistency(traj, node, tol: float = 1e-8) -> None:
    """Incoming and outgoing fronts of each piece must connect the same
    outer states."""
    fr = traj.fronts
    for x, inc, out in node_parts(node):
        if not inc or not out:
            continue
        a = fr[inc[0]].uL
        b = fr[out[0]].uL
        if node.kind != "update" and np.linalg.norm(a - b) > tol:
            raise InconsistentNode(f"left states differ at node {node.id}")
        if node.kind != "update" and np.linalg.norm(fr[inc[-1]].uR - fr[out[-1]].uR) > tol:
            raise InconsistentNode(f"right states differ at node {node.id}")
