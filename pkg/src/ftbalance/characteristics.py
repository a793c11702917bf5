"""Generalized characteristics of a front-tracking trajectory and the
balance / Oleinik diagnostics built on them.

A trajectory is piecewise constant in x and piecewise linear in t between
node times (epochs), so characteristics are computed exactly as polygonal
chains: inside a constant region a curve moves with lambda_i(u), on a front
it either follows the front or leaves it, always taking the leftmost
admissible alternative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import algebra, measures
from .errors import LeftDomainOfComputation

POS_TOL = 1e-10
SPEED_TOL = 1e-12
MAX_STEPS = 1_000_000


# ---- epoch frames ------------------------------------------------------------

class _Frame:
    """Alive fronts of one epoch: positions x0 + s (t - t0), states between."""

    def __init__(self, traj, k: int, i: int):
        ep = traj.epochs
        self.t0 = float(ep[k])
        self.t1 = float(ep[k + 1]) if k + 1 < ep.size else float(ep[k])
        self.fronts = traj.alive_at(self.t0)
        self.x0 = np.array([f.x_at(self.t0) for f in self.fronts])
        self.s = np.array([f.speed_at(self.t0) for f in self.fronts])
        self.states = [traj.far_left_at(self.t0)] + [f.uR for f in self.fronts]
        self._lam: Dict[int, float] = {}
        self._system = traj.system
        self._i = i

    def lam(self, g: int) -> float:
        v = self._lam.get(g)
        if v is None:
            v = float(algebra.eigenvalues(self._system, self.states[g])[self._i - 1])
            self._lam[g] = v
        return v

    def positions(self, t: float) -> np.ndarray:
        return self.x0 + self.s * (t - self.t0)


class _Sweep:
    def __init__(self, traj, i: int):
        self.traj = traj
        self.ep = traj.epochs
        self.i = i
        self.frames: Dict[int, _Frame] = {}

    def index(self, t: float) -> int:
        k = int(np.searchsorted(self.ep, t, side="right")) - 1
        return min(max(k, 0), max(self.ep.size - 2, 0))

    def frame(self, k: int) -> _Frame:
        fr = self.frames.get(k)
        if fr is None:
            fr = _Frame(self.traj, k, self.i)
            self.frames[k] = fr
        return fr


def _sweep(traj, i: int) -> _Sweep:
    cache = traj.__dict__.setdefault("_char_sweeps", {})
    sw = cache.get(i)
    if sw is None or sw.ep is not traj.epochs:
        sw = _Sweep(traj, i)
        cache[i] = sw
    return sw


# ---- curves -------------------------------------------------------------------

@dataclass
class CharacteristicCurve:
    """Polygonal generalized i-characteristic.

    ``segs[k] = (t_start, t_end, speed, front_id)``; front_id is None while
    the curve runs through a constant region.
    """

    family: int
    t: np.ndarray
    x: np.ndarray
    segs: List[Tuple[float, float, float, Optional[int]]] = field(default_factory=list)

    def at(self, t: float) -> float:
        return float(np.interp(t, self.t, self.x))

    def segment(self, t: float):
        for seg in self.segs:
            if seg[0] <= t < seg[1]:
                return seg
        return self.segs[-1] if self.segs else None

    def speed(self, t: float) -> float:
        seg = self.segment(t)
        return 0.0 if seg is None else seg[2]

    def front_at(self, t: float) -> Optional[int]:
        seg = self.segment(t)
        return None if seg is None else seg[3]


def _fan(X: np.ndarray, x: float) -> Tuple[int, int]:
    """Index range [j0, j1) of fronts sitting at x; j0 == j1 if none."""
    tol = POS_TOL * (1.0 + abs(x))
    j0 = int(np.searchsorted(X, x - tol, side="left"))
    j1 = int(np.searchsorted(X, x + tol, side="right"))
    return j0, j1


def _decide(fr: _Frame, X: np.ndarray, x: float):
    """Leftmost admissible motion from x: ('gap', g, speed) or ('front', j, speed)."""
    j0, j1 = _fan(X, x)
    if j0 == j1:
        g = j0
        return "gap", g, fr.lam(g)
    opts = []
    for g in range(j0, j1 + 1):
        lo = fr.s[g - 1] if g > j0 else -math.inf
        hi = fr.s[g] if g < j1 else math.inf
        lg = fr.lam(g)
        if lo + SPEED_TOL < lg < hi - SPEED_TOL:
            opts.append((lg, 0, "gap", g))
    for j in range(j0, j1):
        if fr.fronts[j].is_np:
            continue
        a, b = fr.lam(j), fr.lam(j + 1)
        if min(a, b) - SPEED_TOL <= fr.s[j] <= max(a, b) + SPEED_TOL:
            opts.append((fr.s[j], 1, "front", j))
    if not opts:
        # no strictly admissible choice: follow the physical front whose speed
        # is closest to the characteristic interval
        best = None
        for j in range(j0, j1):
            if fr.fronts[j].is_np:
                continue
            a, b = fr.lam(j), fr.lam(j + 1)
            d = max(min(a, b) - fr.s[j], fr.s[j] - max(a, b), 0.0)
            if best is None or d < best[0]:
                best = (d, j)
        if best is None:
            return "gap", j0, fr.lam(j0)
        return "front", best[1], fr.s[best[1]]
    opts.sort(key=lambda o: (o[0], o[1]))
    sp, _, kind, idx = opts[0]
    return kind, idx, sp


def leftmost_characteristic(traj, t0: float, x0: float, i: int, t_end: Optional[float] = None,
                            max_dt: Optional[float] = None) -> CharacteristicCurve:
    """Leftmost generalized i-characteristic through (t0, x0) up to ``t_end``."""
    if t_end is None:
        t_end = traj.t_end
    lo, hi = traj.t0 - 1e-15, traj.t_end + 1e-15
    if not (lo <= t0 <= hi) or not (lo <= t_end <= hi) or t_end < t0:
        raise LeftDomainOfComputation(f"[{t0}, {t_end}] not inside [{traj.t0}, {traj.t_end}]")
    sw = _sweep(traj, i)
    t, x = float(t0), float(x0)
    ts, xs = [t], [x]
    segs: List[Tuple[float, float, float, Optional[int]]] = []
    steps = 0
    while t < t_end - 1e-15:
        steps += 1
        if steps > MAX_STEPS:
            raise RuntimeError("characteristic tracing did not terminate")
        k = sw.index(t)
        fr = sw.frame(k)
        t_next = min(fr.t1, t_end) if fr.t1 > t else t_end
        X = fr.positions(t)
        kind, idx, v = _decide(fr, X, x)
        if kind == "front":
            f = fr.fronts[idx]
            x_new = float(fr.x0[idx] + fr.s[idx] * (t_next - fr.t0))
            segs.append((t, t_next, float(fr.s[idx]), f.id))
            t, x = t_next, x_new
        else:
            g = idx
            dt = t_next - t
            L, R = g - 1, g
            if L >= 0 and fr.s[L] > v:
                d = (x - X[L]) / (fr.s[L] - v)
                dt = min(dt, max(d, 0.0))
            if R < X.size and v > fr.s[R]:
                d = (X[R] - x) / (v - fr.s[R])
                dt = min(dt, max(d, 0.0))
            if dt <= 0.0:
                # touching a front that the fan test missed by rounding: snap
                j = L if L >= 0 and abs(X[L] - x) <= abs(X[R] - x if R < X.size else math.inf) else R
                x = float(X[j])
                continue
            t_new = t + dt
            segs.append((t, t_new, float(v), None))
            t, x = t_new, x + v * dt
        if segs and segs[-1][1] - segs[-1][0] > 0 and max_dt:
            a = segs[-1][0]
            n_sub = int(math.ceil((t - a) / max_dt))
            for m in range(1, n_sub):
                tm = a + m * (t - a) / n_sub
                ts.append(tm)
                xs.append(xs[-1] + segs[-1][2] * (tm - ts[-2]))
        ts.append(t)
        xs.append(x)
    return CharacteristicCurve(i, np.array(ts), np.array(xs), segs)


# ---- characteristic regions -----------------------------------------------------

@dataclass
class CharacteristicRegion:
    """Region {(r, x): s < r <= t, x in J(r)} bounded by leftmost characteristics."""

    family: int
    s: float
    t: float
    curves: List[Tuple[CharacteristicCurve, CharacteristicCurve]]

    @property
    def k(self) -> int:
        return len(self.curves)

    def intervals(self, r: float) -> List[Tuple[float, float]]:
        """The k sections [a_m(r), b_m(r)], unmerged."""
        return [(a.at(r), b.at(r)) for a, b in self.curves]

    def sections(self, r: float) -> List[Tuple[float, float]]:
        """J(r) as a union of disjoint closed intervals; adjacent pieces merge."""
        out: List[List[float]] = []
        for a, b in self.intervals(r):
            if out and a <= out[-1][1] + POS_TOL * (1.0 + abs(a)):
                out[-1][1] = max(out[-1][1], b)
            else:
                out.append([a, b])
        return [(a, b) for a, b in out]

    def length(self, r: float) -> float:
        return float(sum(b - a for a, b in self.sections(r)))

    def contains(self, r: float, x: float) -> bool:
        if not (self.s < r <= self.t):
            return False
        tol = POS_TOL * (1.0 + abs(x))
        return any(a - tol <= x <= b + tol for a, b in self.sections(r))


def build_region(traj, i: int, intervals: Sequence[Tuple[float, float]], s: float, t: float,
                 max_dt: Optional[float] = None) -> CharacteristicRegion:
    """Characteristic region of the disjoint ordered ``intervals`` taken at time s."""
    iv = [(float(a), float(b)) for a, b in intervals]
    for (a, b) in iv:
        if a > b:
            raise ValueError(f"empty interval [{a}, {b}]")
    for (_, b), (a2, _) in zip(iv[:-1], iv[1:]):
        if not b < a2:
            raise ValueError("intervals must be disjoint and ordered")
    curves = []
    for a, b in iv:
        ca = leftmost_characteristic(traj, s, a, i, t, max_dt)
        cb = ca if b == a else leftmost_characteristic(traj, s, b, i, t, max_dt)
        curves.append((ca, cb))
    return CharacteristicRegion(i, float(s), float(t), curves)


# ---- wave-measure helpers ---------------------------------------------------------

def physical_wave_measure(traj, i: int, t: float) -> measures.AtomicMeasure1D:
    """upsilon_i at time t built from the physical fronts only."""
    fr = [f for f in traj.alive_at(t) if not f.is_np]
    return measures.wave_measure(traj.system, fr, i, t)


def _split(traj, i, t, curves):
    ups = physical_wave_measure(traj, i, t)
    jump, cont = measures.split_jump_cont(ups, curves)
    return ups, jump, cont


def _eps_of(traj) -> float:
    return float(traj.meta.get("eps", traj.config.eps))


def default_beta(traj) -> float:
    """beta from the relation beta > 4(1 + |alpha|)(eps + tau TVcap)."""
    b = traj.meta.get("beta")
    if b:
        return float(b)
    eps = _eps_of(traj)
    tau = float(traj.meta.get("tau", 0.0))
    tv_cap = max((row["TV"] for row in traj.series), default=0.0)
    return 1.01 * 4.0 * (1.0 + traj.system.alpha_l1) * (eps + tau * tv_cap)


def _prepare(traj, i, beta, curves, meas):
    if beta is None:
        beta = default_beta(traj)
    if curves is None:
        curves = measures.track_beta_discontinuities(traj, beta, i)
    if meas is None:
        meas = measures.composite_measures(traj.system, traj, {i: curves})
    return beta, curves, meas


# ---- balance on a region -------------------------------------------------------------

@dataclass
class BalanceReport:
    family: int
    s: float
    t: float
    k: int
    beta: float
    eps: float
    delta_cont: float
    delta_all: float
    ics: float
    icjs: float
    c_upper: float
    c_lower: float
    c_all: float
    C: Optional[float] = None
    margins: Dict[str, float] = field(default_factory=dict)
    violations: List[str] = field(default_factory=list)

    @property
    def min_C(self) -> float:
        return max(self.c_upper, self.c_lower, self.c_all)

    @property
    def passed(self) -> bool:
        return not self.violations


def _ratio(num: float, den: float) -> float:
    if num <= 0.0:
        return 0.0
    return num / den if den > 0.0 else math.inf


def region_balance_check(traj, region: CharacteristicRegion, beta: Optional[float] = None,
                         C: Optional[float] = None, curves=None, meas=None) -> BalanceReport:
    """Continuous and full wave balances of family i on a characteristic region.

    Upper:  D_cont <= C (mu^ICJS(A) + eps)
    Lower:  D_cont >= -C (mu^ICS(A) + k beta)
    Full:   D_all  <= C (mu^ICS(A) + eps)
    The smallest C satisfying each inequality is reported; when C is given
    the margins are reported and failures listed.
    """
    i = region.family
    beta, curves, meas = _prepare(traj, i, beta, curves, meas)
    eps = _eps_of(traj)
    s, t = region.s, region.t
    ups_t, _, cont_t = _split(traj, i, t, curves)
    ups_s, _, cont_s = _split(traj, i, s, curves)
    Jt, Js = region.sections(t), region.sections(s)
    d_cont = cont_t.restrict_union(Jt).total() - cont_s.restrict_union(Js).total()
    d_all = ups_t.restrict_union(Jt).total() - ups_s.restrict_union(Js).total()
    ics = meas.ICS.region(region.contains)
    icjs = meas.ICJS.region(region.contains)
    k = region.k
    rep = BalanceReport(
        i, s, t, k, beta, eps, d_cont, d_all, ics, icjs,
        _ratio(d_cont, icjs + eps), _ratio(-d_cont, ics + k * beta), _ratio(d_all, ics + eps),
    )
    if C is not None:
        rep.C = C
        rep.margins = {
            "upper": C * (icjs + eps) - d_cont,
            "lower": d_cont + C * (ics + k * beta),
            "all": C * (ics + eps) - d_all,
        }
        rep.violations = [name for name, m in rep.margins.items() if m < 0.0]
    return rep


# ---- Oleinik-type estimates -------------------------------------------------------------

@dataclass
class OleinikReport:
    family: int
    s: float
    t: float
    k: int
    length: float
    beta: float
    pos_mass: float
    neg_cont_mass: float
    ics_mass: float
    icjs_mass: float
    c_pos: float
    c_neg: float
    C: Optional[float] = None
    violations: List[str] = field(default_factory=list)

    @property
    def min_passing_C(self) -> float:
        return max(self.c_pos, self.c_neg)

    @property
    def passed(self) -> bool:
        return not self.violations

    def row(self) -> dict:
        return {
            "s": self.s, "t": self.t, "k": self.k, "|J|": self.length,
            "pos_mass": self.pos_mass, "neg_cont_mass": self.neg_cont_mass,
            "ics_mass": self.ics_mass, "icjs_mass": self.icjs_mass,
            "min_passing_C": self.min_passing_C,
        }


def oleinik_check(traj, i: int, J: Sequence[Tuple[float, float]], s: float, t: float,
                  C: Optional[float] = None, beta: Optional[float] = None, curves=None,
                  meas=None) -> OleinikReport:
    """Finite-nu Oleinik-type estimates on a union J of k closed intervals.

    pos:  [upsilon_i(t)](J)        <= C (|J|/(t-s) + mu^ICS([s,t]xR) + k beta)
    neg: -[upsilon_i^cont(s)](J)   <= C (|J|/(t-s) + mu^ICJS([s,t]xR) + k beta)
    """
    if not (0.0 <= s < t):
        raise ValueError("need 0 <= s < t")
    beta, curves, meas = _prepare(traj, i, beta, curves, meas)
    J = [(float(a), float(b)) for a, b in J]
    k = len(J)
    length = float(sum(b - a for a, b in J))
    ups_t, _, _ = _split(traj, i, t, curves)
    _, _, cont_s = _split(traj, i, s, curves)
    pos = ups_t.restrict_union(J).total()
    neg = -cont_s.restrict_union(J).total()
    ics = meas.ICS.strip(s, t, left_open=False)
    icjs = meas.ICJS.strip(s, t, left_open=False)
    base = length / (t - s) + k * beta
    rep = OleinikReport(i, s, t, k, length, beta, pos, neg, ics, icjs,
                        _ratio(pos, base + ics), _ratio(neg, base + icjs))
    if C is not None:
        rep.C = C
        if pos > C * (base + ics):
            rep.violations.append("pos")
        if neg > C * (base + icjs):
            rep.violations.append("neg")
    return rep


def calibrate_constant(reports: Sequence, safety: float = 1.0) -> float:
    """Freeze a constant from a training batch: the largest required C."""
    vals = [r.min_C if hasattr(r, "min_C") else r.min_passing_C for r in reports]
    vals = [v for v in vals if math.isfinite(v)]
    return safety * max(vals, default=0.0)


# ---- decay functional -----------------------------------------------------------------

def phi_weight(j: int, i: int, x: float, a: float, b: float) -> float:
    """Weight of a family-j wave at x relative to the interval [a, b).

    Faster families (j > i) count once they have entered from the left and
    fully once past b; slower families the mirror image. Weights are
    continuous as a wave crosses a or b.
    """
    if x < a:
        return 1.0 if j < i else 0.0
    if x >= b:
        return 1.0 if j > i else 0.0
    z = b - a
    return (b - x) / z if j < i else (x - a) / z


@dataclass
class PhiReport:
    family: int
    times: np.ndarray
    phi: np.ndarray
    phi_dot: np.ndarray
    z: np.ndarray
    z_dot: np.ndarray
    xi: np.ndarray
    ups_I: np.ndarray
    residual: np.ndarray
    jump_times: np.ndarray
    jumps: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0


def _phi_terms(traj, i, fronts, t, a, b, a_dot, b_dot):
    phi = 0.0
    phi_dot = 0.0
    z = b - a
    for f in fronts:
        if f.is_np or f.family == i:
            continue
        x = f.x_at(t)
        w = abs(f.size)
        phi += phi_weight(f.family, i, x, a, b) * w
        if a <= x < b and z > 0:
            xd = f.speed_at(t)
            zd = b_dot - a_dot
            if f.family < i:
                rd = ((b_dot - xd) * z - (b - x) * zd) / (z * z)
            else:
                rd = ((xd - a_dot) * z - (x - a) * zd) / (z * z)
            phi_dot += rd * w
    return phi, phi_dot


def decay_functional_phi(traj, i: int, a_curve: CharacteristicCurve, b_curve: CharacteristicCurve,
                         times: Optional[Sequence[float]] = None) -> PhiReport:
    """Phi(t) along the interval I(t) = [a(t), b(t)] and the residual
    |z' + xi - upsilon_i(I)| - Phi' z at sample times away from nodes."""
    system = traj.system
    s = max(a_curve.t[0], b_curve.t[0])
    e = min(a_curve.t[-1], b_curve.t[-1])
    ep = traj.epochs
    if times is None:
        cuts = np.unique(np.concatenate([[s, e], ep[(ep > s) & (ep < e)]]))
        times = 0.5 * (cuts[:-1] + cuts[1:])
    times = np.asarray(times, dtype=float)
    rows = []
    for t in times:
        a, b = a_curve.at(t), b_curve.at(t)
        ad, bd = a_curve.speed(t), b_curve.speed(t)
        fronts = traj.alive_at(t)
        phi, phid = _phi_terms(traj, i, fronts, t, a, b, ad, bd)
        prof = traj.sample(t)
        lam = lambda u: float(algebra.eigenvalues(system, u)[i - 1])
        tol = POS_TOL * (1.0 + abs(a))
        ua = prof(a - tol - 1e-12)
        ub = prof(b + POS_TOL * (1.0 + abs(b)) + 1e-12)
        xi = (ad - lam(ua)) + (lam(ub) - bd)
        ups = physical_wave_measure(traj, i, t).restrict(a - tol, b + POS_TOL * (1.0 + abs(b)))
        ups_I = ups.total()
        z = b - a
        res = abs((bd - ad) + xi - ups_I) - phid * z
        rows.append((t, phi, phid, z, bd - ad, xi, ups_I, res))
    arr = np.array(rows, dtype=float).reshape(-1, 8)
    jt, jv = [], []
    for tn in ep[(ep > s) & (ep <= e)]:
        a, b = a_curve.at(tn), b_curve.at(tn)
        before = [f for f in traj.fronts.values() if f.t_birth < tn <= f.t_death]
        after = traj.alive_at(tn)
        p0, _ = _phi_terms(traj, i, before, tn, a, b, 0.0, 0.0)
        p1, _ = _phi_terms(traj, i, after, tn, a, b, 0.0, 0.0)
        jt.append(tn)
        jv.append(p1 - p0)
    return PhiReport(i, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4], arr[:, 5],
                     arr[:, 6], arr[:, 7], np.array(jt), np.array(jv))
