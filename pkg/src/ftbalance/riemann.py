"""Elementary curves, Rankine-Hugoniot shocks and the Riemann solver.

Wave curves T_i[uL](s) are parameterized by s = l_i(uL).(u - uL). For a
genuinely nonlinear family the rarefaction branch is s >= 0 and the shock
branch s < 0; a linearly degenerate family follows its integral curve as a
contact. The full Riemann problem is solved by a quasi-Newton iteration on
the composite map s -> T_N(s_N) o ... o T_1(s_1)[uL]. Scalar problems with a
non-convex flux go through the convex/concave envelope construction.

Functions
---------
hugoniot_point, rarefaction_point, contact_point, lax_curve, compose,
solve_riemann, scalar_envelope_solve, discretize_fan
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
from scipy import optimize

from . import algebra
from .algebra import GNL, LD, UNCLASSIFIED, SystemSpec, as_state, eigen, eigenvalues
from .errors import (
    CurveLeftDomain,
    FTError,
    GridTooCoarse,
    NewtonDiverged,
    OutOfDomain,
    UnclassifiedFamily,
)

NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
RK_STEPS_PER_RADIUS = 32
CURVE_RADIUS = 1.0
SOLVE_TOL = 1e-12
ENVELOPE_SAMPLES_PER_UNIT = 4096
ENVELOPE_MIN_POINTS = 65
ZERO_SIZE = 1e-15
HUGONIOT_LINEAR = 1e-9

SHOCK = "shock"
RAREFACTION = "rarefaction"
CONTACT = "contact"
NONPHYSICAL = "np"


@dataclass
class SubWave:
    """One elementary piece of a wave fan.

    For a shock or contact ``speed`` is its propagation speed; for a
    rarefaction slice the speeds fill ``[lam_left, lam_right]``.
    """

    kind: str
    family: int
    uL: np.ndarray
    uR: np.ndarray
    size: float
    speed: float
    lam_left: float
    lam_right: float


@dataclass
class FamilyWave:
    family: int
    size: float
    state: np.ndarray
    subwaves: List[SubWave] = field(default_factory=list)


@dataclass
class WaveFan:
    uL: np.ndarray
    uR: np.ndarray
    waves: List[FamilyWave]

    def sizes(self) -> np.ndarray:
        return np.array([w.size for w in self.waves])

    def subwaves(self) -> List[SubWave]:
        return [sw for w in self.waves for sw in w.subwaves]


@dataclass
class FrontSpec:
    """A front produced by :func:`discretize_fan`, not yet placed in space.

    ``sig0``/``sig1`` bound the speed profile the interaction potential
    assigns along the front: the lambda-range for a rarefaction slice, the
    constant propagation speed for shocks and contacts.
    """

    family: int
    kind: str
    size: float
    speed: float
    uL: np.ndarray
    uR: np.ndarray
    sig0: float
    sig1: float
    lam_left: float = 0.0
    lam_right: float = 0.0


def _lam(system: SystemSpec, u: np.ndarray, i: int) -> float:
    return float(eigenvalues(system, u)[i - 1])


def _flux(system: SystemSpec, u: np.ndarray) -> np.ndarray:
    return np.asarray(system.flux(u), dtype=float).reshape(system.n)


def _ensure_domain(system: SystemSpec, u: np.ndarray) -> None:
    if not system.in_domain(u):
        raise CurveLeftDomain(f"curve left the domain at {u}")


def hugoniot_point(system: SystemSpec, uL, i: int, s: float):
    """Point of the i-th Hugoniot locus with l_i(uL).(uR-uL) = s.

    Returns ``(uR, sigma)``. The unknown is written as uR = uL + s w, which
    keeps the Newton system regular as s -> 0.
    """
    uL = as_state(uL, system.n)
    es = eigen(system, uL)
    lam = float(es.lam[i - 1])
    if s == 0.0:
        return uL.copy(), lam
    if system.n == 1:
        du = s / float(es.L[0, 0])
        uR = uL + du
        _ensure_domain(system, uR)
        sig = float((_flux(system, uR) - _flux(system, uL))[0] / du)
        return uR, sig
    if abs(s) <= HUGONIOT_LINEAR:
        # the scaled residual loses all digits here; the tangent is exact to O(s^2)
        uR = uL + s * es.r(i)
        _ensure_domain(system, uR)
        return uR, float(eigenvalues(system, 0.5 * (uL + uR))[i - 1])
    n = system.n
    l = es.l(i)
    w = es.r(i).copy()
    sig = lam
    FL = _flux(system, uL)
    I = np.eye(n)

    def resid(w_, sig_):
        u = uL + s * w_
        return np.concatenate([(_flux(system, u) - FL) / s - sig_ * w_, [l @ w_ - 1.0]])

    G = resid(w, sig)
    res = float(np.linalg.norm(G))
    # rounding in (F(u) - F(uL)) / s puts a floor under the residual
    floor = 64.0 * np.finfo(float).eps * (1.0 + float(np.linalg.norm(FL))) / abs(s)
    polish = 1  # one extra step past tolerance takes the point to rounding level
    for _ in range(NEWTON_MAXIT):
        if res <= NEWTON_TOL * (1.0 + abs(sig)) + floor:
            if polish == 0 or res <= floor:
                break
            polish -= 1
        u = uL + s * w
        J = np.zeros((n + 1, n + 1))
        J[:n, :n] = algebra.jacobian(system, u) - sig * I
        J[:n, n] = -w
        J[n, :n] = l
        try:
            delta = np.linalg.solve(J, -G)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular Hugoniot Jacobian at s={s}") from exc
        t = 1.0
        while True:
            w_t = w + t * delta[:n]
            sig_t = sig + t * delta[n]
            G_t = resid(w_t, sig_t)
            res_t = float(np.linalg.norm(G_t))
            if res_t < res or t < 1e-4:
                break
            t *= 0.5
        if polish == 0 and not res_t < res:
            break
        w, sig, G, res = w_t, sig_t, G_t, res_t
    if res > 1e3 * NEWTON_TOL * (1.0 + abs(sig)) + floor:
        raise NewtonDiverged(f"Hugoniot Newton did not converge (res={res:.3e}) at s={s}")
    uR = uL + s * w
    _ensure_domain(system, uR)
    return uR, float(sig)


def _integral_curve(system: SystemSpec, uL: np.ndarray, i: int, s: float) -> np.ndarray:
    """RK4 on du/dtau = r_i(u) / (l_i(uL).r_i(u)), tau in [0, s]."""
    es0 = eigen(system, uL)
    if system.n == 1:
        return uL + s / float(es0.L[0, 0])
    l0 = es0.l(i)
    nsteps = max(1, int(math.ceil(RK_STEPS_PER_RADIUS * abs(s) / CURVE_RADIUS)))
    h = s / nsteps

    def f(u):
        r = eigen(system, u, check=False).r(i)
        d = float(l0 @ r)
        if abs(d) < 1e-8:
            raise CurveLeftDomain("integral curve parameter degenerates")
        return r / d

    u = uL.copy()
    for _ in range(nsteps):
        k1 = f(u)
        k2 = f(u + 0.5 * h * k1)
        k3 = f(u + 0.5 * h * k2)
        k4 = f(u + h * k3)
        u = u + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    _ensure_domain(system, u)
    return u


def rarefaction_point(system: SystemSpec, uL, i: int, s: float) -> np.ndarray:
    """End state of the i-rarefaction curve from uL with parameter s."""
    uL = as_state(uL, system.n)
    if s == 0.0:
        return uL.copy()
    return _integral_curve(system, uL, i, s)


def contact_point(system: SystemSpec, uL, i: int, s: float) -> np.ndarray:
    """End state of the i-contact curve (integral curve of r_i)."""
    return rarefaction_point(system, uL, i, s)


def _branch(system: SystemSpec, uL: np.ndarray, i: int, s: float) -> str:
    cls = system.classes[i - 1]
    if cls == LD:
        return CONTACT
    if cls == GNL:
        return RAREFACTION if s >= 0 else SHOCK
    if system.n == 1:
        raise UnclassifiedFamily("scalar unclassified flux: use scalar_envelope_solve")
    g = algebra.gnl_indicator(system, uL, i)
    if abs(g) <= 1e-10:
        raise UnclassifiedFamily(f"family {i} is not genuinely nonlinear at {uL}")
    return RAREFACTION if s * g >= 0 else SHOCK


def lax_curve(system: SystemSpec, uL, i: int, s: float) -> SubWave:
    """Point T_i[uL](s) of the i-th Lax curve as a :class:`SubWave`.

    For families declared unclassified in systems with N > 1 the branch is
    chosen from the local sign of grad(lambda_i).r_i at uL; a curve that
    crosses the inflection locus is rejected.
    """
    uL = as_state(uL, system.n)
    kind = _branch(system, uL, i, s)
    lamL = _lam(system, uL, i)
    if s == 0.0:
        return SubWave(kind, i, uL.copy(), uL.copy(), 0.0, lamL, lamL, lamL)
    if kind == SHOCK:
        uR, sig = hugoniot_point(system, uL, i, s)
        lamR = _lam(system, uR, i)
        out = SubWave(SHOCK, i, uL, uR, s, sig, lamL, lamR)
    else:
        uR = rarefaction_point(system, uL, i, s)
        lamR = _lam(system, uR, i)
        if kind == CONTACT:
            out = SubWave(CONTACT, i, uL, uR, s, 0.5 * (lamL + lamR), lamL, lamR)
        else:
            out = SubWave(RAREFACTION, i, uL, uR, s, 0.5 * (lamL + lamR), lamL, lamR)
    if system.classes[i - 1] == UNCLASSIFIED:
        gR = algebra.gnl_indicator(system, out.uR, i)
        gL = algebra.gnl_indicator(system, uL, i)
        if gR * gL <= 0:
            raise UnclassifiedFamily(f"family {i} curve crosses the inflection locus")
    return out


def compose(system: SystemSpec, uL, sizes: Iterable[float]) -> List[SubWave]:
    """Chain T_1(s_1), ..., T_N(s_N) from uL; returns one SubWave per family."""
    u = as_state(uL, system.n)
    out = []
    for k, s in enumerate(sizes, start=1):
        sw = lax_curve(system, u, k, float(s))
        out.append(sw)
        u = sw.uR
    return out


def _fan_from_subwaves(uL: np.ndarray, uR: np.ndarray, subs: List[SubWave]) -> WaveFan:
    waves = []
    for sw in subs:
        pieces = [] if abs(sw.size) <= ZERO_SIZE else [sw]
        waves.append(FamilyWave(sw.family, sw.size if pieces else 0.0, sw.uR, pieces))
    if waves:
        waves[-1].state = uR.copy()
        if waves[-1].subwaves:
            waves[-1].subwaves[-1].uR = uR.copy()
    return WaveFan(uL.copy(), uR.copy(), waves)


def _empty_fan(system: SystemSpec, u: np.ndarray) -> WaveFan:
    return WaveFan(u.copy(), u.copy(), [FamilyWave(k, 0.0, u.copy(), []) for k in range(1, system.n + 1)])


def solve_riemann(system: SystemSpec, uL, uR, tol: float = SOLVE_TOL) -> WaveFan:
    """Solve the Riemann problem (uL, uR) into a wave fan.

    Sizes solve Phi(s)[uL] = uR by Broyden iterations started from the left
    eigenvectors at the midpoint, with a finite-difference Newton fallback.
    """
    uL = as_state(uL, system.n)
    uR = as_state(uR, system.n)
    for u in (uL, uR):
        if not system.in_domain(u):
            raise OutOfDomain(f"Riemann state {u} outside the domain")
    if np.array_equal(uL, uR):
        return _empty_fan(system, uL)
    if system.n == 1:
        cls = system.classes[0]
        if cls == UNCLASSIFIED:
            return scalar_envelope_solve(system, uL, uR)
        s = float(eigen(system, uL).L[0, 0] * (uR - uL)[0])
        return _fan_from_subwaves(uL, uR, [lax_curve(system, uL, 1, s)])
    mid = eigen(system, 0.5 * (uL + uR), check=False)
    s = mid.L @ (uR - uL)
    B = mid.R.copy()
    scale = 1.0 + float(np.linalg.norm(uR))

    def resid(sz):
        subs = compose(system, uL, sz)
        return subs[-1].uR - uR, subs

    def polish(s, f, subs, B):
        # a few more quasi-Newton steps, kept only while the residual shrinks
        r = float(np.linalg.norm(f))
        for _ in range(3):
            if r == 0.0:
                break
            try:
                ds = -np.linalg.solve(B, f)
                f_new, subs_new = resid(s + ds)
            except (FTError, np.linalg.LinAlgError):
                break
            r_new = float(np.linalg.norm(f_new))
            if not r_new < r:
                break
            df = f_new - f
            B = B + np.outer(df - B @ ds, ds) / float(ds @ ds)
            s, f, subs, r = s + ds, f_new, subs_new, r_new
        return _fan_from_subwaves(uL, uR, subs)

    f, subs = resid(s)
    for _ in range(40):
        if np.linalg.norm(f) <= tol * scale:
            return polish(s, f, subs, B)
        ds = -np.linalg.solve(B, f)
        s_new = s + ds
        f_new, subs_new = resid(s_new)
        df = f_new - f
        B = B + np.outer(df - B @ ds, ds) / float(ds @ ds)
        s, f, subs = s_new, f_new, subs_new
    J = B
    for _ in range(NEWTON_MAXIT):
        if np.linalg.norm(f) <= tol * scale:
            return polish(s, f, subs, J)
        J = np.empty((system.n, system.n))
        for k in range(system.n):
            h = 1e-7 * (1.0 + abs(s[k]))
            e = np.zeros(system.n)
            e[k] = h
            J[:, k] = (resid(s + e)[0] - f) / h
        s = s - np.linalg.solve(J, f)
        f, subs = resid(s)
    if np.linalg.norm(f) <= 1e3 * tol * scale:
        return _fan_from_subwaves(uL, uR, subs)
    raise NewtonDiverged(f"Riemann solver did not converge for {uL} -> {uR}")


def _flux_scalar(flux, u: float) -> float:
    return float(np.asarray(flux(np.array([u]))).reshape(-1)[0])


def _hull(us: np.ndarray, fs: np.ndarray, lower: bool) -> List[int]:
    idx: List[int] = []
    for j in range(len(us)):
        while len(idx) >= 2:
            a, b = idx[-2], idx[-1]
            cross = (us[b] - us[a]) * (fs[j] - fs[a]) - (fs[b] - fs[a]) * (us[j] - us[a])
            if (lower and cross <= 0) or (not lower and cross >= 0):
                idx.pop()
            else:
                break
        idx.append(j)
    return idx


def scalar_envelope_solve(system, uL, uR, samples_per_unit: int = ENVELOPE_SAMPLES_PER_UNIT) -> WaveFan:
    """Scalar Riemann solver from the convex (uL < uR) or concave (uL > uR)
    envelope of the sampled flux.

    ``system`` is a scalar :class:`SystemSpec` or a bare flux callable.
    Envelope edges spanning a single sample interval form rarefaction
    slices; longer edges are shocks. Tangency points between a shock and a
    rarefaction are refined by root finding.
    """
    if isinstance(system, SystemSpec):
        if system.n != 1:
            raise ValueError("scalar_envelope_solve needs N = 1")
        flux = system.flux
        dflux = lambda u: float(algebra.jacobian(system, np.array([u]))[0, 0])
        ell = float(eigen(system, as_state(uL, 1), check=False).L[0, 0])
    else:
        flux = system
        dflux = lambda u: (_flux_scalar(flux, u + 1e-6) - _flux_scalar(flux, u - 1e-6)) / 2e-6
        ell = 1.0
    a = float(np.asarray(uL).reshape(-1)[0])
    b = float(np.asarray(uR).reshape(-1)[0])
    uLv, uRv = np.array([a]), np.array([b])
    if abs(ell * (b - a)) <= ZERO_SIZE:
        return WaveFan(uLv.copy(), uRv.copy(), [FamilyWave(1, ell * (b - a), uRv.copy(), [])])
    lo, hi = min(a, b), max(a, b)
    npts = max(ENVELOPE_MIN_POINTS, int(math.ceil(samples_per_unit * (hi - lo))) + 1)
    us = np.linspace(lo, hi, npts)
    fs = np.array([_flux_scalar(flux, u) for u in us])
    lower = a < b
    idx = _hull(us, fs, lower)
    if not lower:
        idx = idx[::-1]
    verts = [float(us[j]) for j in idx]
    fverts = [float(fs[j]) for j in idx]
    kinds = []
    for k in range(len(idx) - 1):
        kinds.append(RAREFACTION if abs(idx[k + 1] - idx[k]) == 1 else SHOCK)
    # refine tangency points between a shock edge and a rarefaction slice
    h = (hi - lo) / (npts - 1)
    for k in range(len(kinds)):
        if kinds[k] != SHOCK:
            continue
        left_tan = k > 0 and kinds[k - 1] == RAREFACTION
        right_tan = k + 1 < len(kinds) and kinds[k + 1] == RAREFACTION
        if left_tan == right_tan:
            continue
        vt = k if left_tan else k + 1
        vo = k + 1 if left_tan else k
        u_o, f_o = verts[vo], fverts[vo]
        phi = lambda u: dflux(u) * (u - u_o) - (_flux_scalar(flux, u) - f_o)
        x0 = verts[vt]
        lo_b, hi_b = max(lo, x0 - 2 * h), min(hi, x0 + 2 * h)
        if (lo_b - u_o) * (hi_b - u_o) <= 0:
            continue
        try:
            if phi(lo_b) * phi(hi_b) < 0:
                ut = optimize.brentq(phi, lo_b, hi_b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                verts[vt] = ut
                fverts[vt] = _flux_scalar(flux, ut)
        except ValueError:
            pass
    subs: List[SubWave] = []
    k = 0
    while k < len(kinds):
        if kinds[k] == SHOCK:
            ua, ub = verts[k], verts[k + 1]
            sp = (fverts[k + 1] - fverts[k]) / (ub - ua)
            subs.append(
                SubWave(SHOCK, 1, np.array([ua]), np.array([ub]), ell * (ub - ua), sp, dflux(ua), dflux(ub))
            )
            k += 1
        else:
            j = k
            while j < len(kinds) and kinds[j] == RAREFACTION:
                j += 1
            ua, ub = verts[k], verts[j]
            la, lb = dflux(ua), dflux(ub)
            subs.append(
                SubWave(RAREFACTION, 1, np.array([ua]), np.array([ub]), ell * (ub - ua), 0.5 * (la + lb), la, lb)
            )
            k = j
    subs[0].uL = uLv.copy()
    subs[-1].uR = uRv.copy()
    prev = -math.inf
    for sw in subs:
        lo_sp = sw.speed if sw.kind == SHOCK else sw.lam_left
        hi_sp = sw.speed if sw.kind == SHOCK else sw.lam_right
        if lo_sp < prev - 1e-9 * (1 + abs(prev)):
            raise GridTooCoarse("envelope speeds are not monotone")
        prev = hi_sp
    return WaveFan(uLv.copy(), uRv.copy(), [FamilyWave(1, ell * (b - a), uRv.copy(), subs)])


def _split_rarefaction(system: Optional[SystemSpec], sw: SubWave, n: int) -> List[FrontSpec]:
    out = []
    if n == 1:
        return [FrontSpec(sw.family, RAREFACTION, sw.size, 0.5 * (sw.lam_left + sw.lam_right),
                          sw.uL, sw.uR, sw.lam_left, sw.lam_right, sw.lam_left, sw.lam_right)]
    if system is None or system.n == 1:
        states = [sw.uL + (sw.uR - sw.uL) * (j / n) for j in range(n + 1)]
        states[-1] = sw.uR
        span = float((sw.uR - sw.uL)[0])
        for j in range(n):
            a, b = states[j], states[j + 1]
            if system is not None:
                la = _lam(system, a, sw.family)
                lb = _lam(system, b, sw.family)
            else:
                la = sw.lam_left + (sw.lam_right - sw.lam_left) * j / n
                lb = sw.lam_left + (sw.lam_right - sw.lam_left) * (j + 1) / n
            size = sw.size * float((b - a)[0]) / span
            out.append(FrontSpec(sw.family, RAREFACTION, size, 0.5 * (la + lb), a, b, la, lb, la, lb))
        return out
    i = sw.family
    states = [sw.uL] + [rarefaction_point(system, sw.uL, i, sw.size * j / n) for j in range(1, n)] + [sw.uR]
    lams = [_lam(system, u, i) for u in states]
    for j in range(n):
        a, b = states[j], states[j + 1]
        size = float(eigen(system, a, check=False).l(i) @ (b - a))
        out.append(FrontSpec(i, RAREFACTION, size, 0.5 * (lams[j] + lams[j + 1]), a, b,
                             lams[j], lams[j + 1], lams[j], lams[j + 1]))
    return out


def discretize_fan(fan: WaveFan, eps: float, system: Optional[SystemSpec] = None,
                   keep_single: Iterable[int] = ()) -> List[FrontSpec]:
    """Turn a wave fan into fronts ordered left to right.

    Shocks and contacts stay single fronts at their exact speed; each
    rarefaction slice of size s becomes ceil(|s|/eps) fronts moving at the
    midpoint of their characteristic-speed range. Families listed in
    ``keep_single`` keep their rarefactions as one front.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    keep = set(keep_single)
    fronts: List[FrontSpec] = []
    for w in fan.waves:
        for sw in w.subwaves:
            if sw.kind == RAREFACTION:
                n = 1 if sw.family in keep else max(1, int(math.ceil(abs(sw.size) / eps - 1e-12)))
                fronts.extend(_split_rarefaction(system, sw, n))
            elif sw.kind == SHOCK:
                fronts.append(FrontSpec(sw.family, SHOCK, sw.size, sw.speed, sw.uL, sw.uR,
                                        sw.speed, sw.speed, sw.lam_left, sw.lam_right))
            else:
                fronts.append(FrontSpec(sw.family, CONTACT, sw.size, sw.speed, sw.uL, sw.uR,
                                        sw.speed, sw.speed, sw.lam_left, sw.lam_right))
    return fronts
