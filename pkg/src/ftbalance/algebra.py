"""Eigenstructure and nonlinearity classification for conservative systems.

A system u_t + F(u)_x = g(t, x, u) is described by a :class:`SystemSpec`.
Families are indexed from 1 to N in every public function, matching the
usual notation; arrays are indexed from 0 internally.

Functions
---------
eigen, eigenvalues, jacobian, gnl_indicator, nondegeneracy_order,
averaged_matrix, averaged_eigen, transversality_check
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .errors import DerivativeNoise, NonHyperbolic, OutOfDomain

GNL = "gnl"
LD = "ld"
UNCLASSIFIED = "unclassified"

FD_REL_STEP = 1e-6
GAP_REL = 1e-8
DOMAIN_TOL = 1e-12

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
GL16_NODES = 0.5 * (_GL_X + 1.0)
GL16_WEIGHTS = 0.5 * _GL_W


@dataclass(frozen=True)
class SystemSpec:
    """A strictly hyperbolic system of balance laws on a box.

    Parameters
    ----------
    n : int
        Number of equations.
    flux : callable
        F(u) for a state of shape (n,).
    lo, hi : array_like
        Corners of the domain box.
    classes : tuple of str
        Per-family class: ``"gnl"``, ``"ld"`` or ``"unclassified"``.
    jacobian : callable, optional
        Analytic DF(u).
    source : callable, optional
        g(t, x, u); absent means g = 0.
    alpha : callable, optional
        Integrable bound on the x-variation of g.
    alpha_l1 : float
        L1 norm of ``alpha``.
    source_lip : float
        Lipschitz bound of g in u on the box (recorded, not enforced).
    source_x_independent : bool
        True when g does not depend on x.
    eig : callable, optional
        Analytic eigenstructure ``u -> (lam, R, L)`` already oriented.
    pi : callable, optional
        Analytic iterated derivatives ``(u, i, k) -> pi_i^(k)(u)``.
    """

    n: int
    flux: Callable[[np.ndarray], np.ndarray]
    lo: np.ndarray
    hi: np.ndarray
    classes: tuple
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    source: Optional[Callable[[float, float, np.ndarray], np.ndarray]] = None
    alpha: Optional[Callable[[float], float]] = None
    alpha_l1: float = 0.0
    source_lip: float = 0.0
    source_x_independent: bool = True
    eig: Optional[Callable] = None
    pi: Optional[Callable[[np.ndarray, int, int], float]] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def in_domain(self, u: np.ndarray, tol: float = DOMAIN_TOL) -> bool:
        return bool(np.all(u >= self.lo - tol) and np.all(u <= self.hi + tol))


@dataclass(frozen=True)
class EigenStructure:
    """Eigenvalues (increasing), right eigenvectors as columns of ``R`` and
    left eigenvectors as rows of ``L`` with ``L @ R = I``."""

    lam: np.ndarray
    R: np.ndarray
    L: np.ndarray

    def r(self, i: int) -> np.ndarray:
        return self.R[:, i - 1]

    def l(self, i: int) -> np.ndarray:
        return self.L[i - 1, :]


def as_state(u, n: Optional[int] = None) -> np.ndarray:
    a = np.atleast_1d(np.asarray(u, dtype=float))
    if n is not None and a.shape != (n,):
        raise ValueError(f"state must have shape ({n},), got {a.shape}")
    return a


def check_domain(system: SystemSpec, u: np.ndarray) -> None:
    if not system.in_domain(u):
        raise OutOfDomain(f"state {u} outside box [{system.lo}, {system.hi}]")


def _fd_step(u: np.ndarray) -> float:
    return FD_REL_STEP * (1.0 + float(np.max(np.abs(u))))


def jacobian(system: SystemSpec, u: np.ndarray) -> np.ndarray:
    """DF(u), analytic when supplied, otherwise central differences."""
    if system.jacobian is not None:
        return np.asarray(system.jacobian(u), dtype=float).reshape(system.n, system.n)
    n = system.n
    h = _fd_step(u)
    J = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        J[:, k] = (np.asarray(system.flux(u + e)) - np.asarray(system.flux(u - e))) / (2 * h)
    return J


def _sorted_eig(A: np.ndarray):
    w, V = np.linalg.eig(A)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.max(np.abs(w.imag)) > 1e-10 * scale:
        raise NonHyperbolic(f"complex eigenvalues {w}")
    order = np.argsort(w.real)
    lam = w.real[order]
    R = V.real[:, order]
    return lam, R


def _check_gap(lam: np.ndarray, gap_rel: float = GAP_REL) -> None:
    if lam.size < 2:
        return
    thr = gap_rel * float(np.max(np.abs(lam)))
    gaps = np.diff(lam)
    if np.any(gaps <= thr) or np.all(lam == 0.0):
        raise NonHyperbolic(f"eigenvalue gap {gaps.min():.3e} below threshold {thr:.3e}")


def _first_component_positive(R: np.ndarray) -> np.ndarray:
    R = R.copy()
    for k in range(R.shape[1]):
        col = R[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            R[:, k] = -col
    return R


def eigenvalues(system: SystemSpec, u: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of DF(u) (no domain check)."""
    if system.eig is not None:
        return np.asarray(system.eig(u)[0], dtype=float)
    if system.n == 1:
        return jacobian(system, u).reshape(1)
    return _sorted_eig(jacobian(system, u))[0]


def _structure_from_matrix(A: np.ndarray, gap_rel: float = GAP_REL):
    lam, R = _sorted_eig(A)
    _check_gap(lam, gap_rel)
    R = R / np.linalg.norm(R, axis=0)
    R = _first_component_positive(R)
    return lam, R


def eigen(system: SystemSpec, u, check: bool = True, gap_rel: float = GAP_REL) -> EigenStructure:
    """Eigenstructure of DF(u) with the package's orientation convention.

    Genuinely nonlinear families are oriented so that the directional
    derivative of their eigenvalue along r_i is positive; all other
    families get their first nonzero component positive.
    """
    u = as_state(u, system.n)
    if check:
        check_domain(system, u)
    if system.eig is not None:
        lam, R, L = system.eig(u)
        return EigenStructure(np.asarray(lam, float), np.asarray(R, float), np.asarray(L, float))
    lam, R = _structure_from_matrix(jacobian(system, u), gap_rel)
    for k, cls in enumerate(system.classes):
        if cls == GNL:
            r = R[:, k]
            h = _fd_step(u)
            d = eigenvalues(system, u + h * r)[k] - eigenvalues(system, u - h * r)[k]
            if d < 0:
                R[:, k] = -r
    L = np.linalg.inv(R)
    return EigenStructure(lam, R, L)


def gnl_indicator(system: SystemSpec, u, i: int, step: Optional[float] = None) -> float:
    """Return grad(lambda_i) . r_i at u."""
    u = as_state(u, system.n)
    if system.pi is not None and step is None:
        check_domain(system, u)
        return float(system.pi(u, i, 1))
    es = eigen(system, u)
    r = es.r(i)
    h = _fd_step(u) if step is None else step
    return float(
        (eigenvalues(system, u + h * r)[i - 1] - eigenvalues(system, u - h * r)[i - 1]) / (2 * h)
    )


def _integral_curve_values(system: SystemSpec, u: np.ndarray, i: int, h: float, m: int) -> np.ndarray:
    """lambda_i along the unit-speed integral curve of r_i at s = j*h, |j| <= m."""

    def field_at(w):
        return eigen(system, w, check=False).r(i)

    vals = {0: float(eigenvalues(system, u)[i - 1])}
    for sign in (1.0, -1.0):
        w = u.copy()
        dt = sign * h
        for j in range(1, m + 1):
            for _ in range(4):
                q = dt / 4
                k1 = field_at(w)
                k2 = field_at(w + 0.5 * q * k1)
                k3 = field_at(w + 0.5 * q * k2)
                k4 = field_at(w + q * k3)
                w = w + q * (k1 + 2 * k2 + 2 * k3 + k4) / 6
            vals[int(sign) * j] = float(eigenvalues(system, w)[i - 1])
    return np.array([vals[j] for j in range(-m, m + 1)])


def _stencil_derivative(f: np.ndarray, h: float, k: int) -> float:
    # f holds samples at j = -3..3
    fm3, fm2, fm1, f0, f1, f2, f3 = f
    if k == 1:
        return (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h)
    if k == 2:
        return (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    if k == 3:
        return (-f3 + 8 * f2 - 13 * f1 + 13 * fm1 - 8 * fm2 + fm3) / (8 * h ** 3)
    raise DerivativeNoise(f"numerical derivative of order {k} not supported")


def pi_numeric(system: SystemSpec, u, i: int, k: int, h: Optional[float] = None) -> float:
    """pi_i^(k)(u) as the k-th derivative of lambda_i along the curve of r_i.

    The recursion pi^(k+1) = grad(pi^(k)) . r_i is the k-th derivative of
    s -> lambda_i(gamma(s)) with gamma' = r_i(gamma), which is what is
    differentiated here. Orders above 3 raise :class:`DerivativeNoise`.
    """
    if k > 3:
        raise DerivativeNoise("orders above 3 need analytic derivatives")
    u = as_state(u, system.n)
    base = 1e-2 * (1.0 + float(np.max(np.abs(u)))) if h is None else h
    d1 = _stencil_derivative(_integral_curve_values(system, u, i, base, 3), base, k)
    d2 = _stencil_derivative(_integral_curve_values(system, u, i, base / 2, 3), base / 2, k)
    if abs(d1 - d2) > 1e-4 * (1.0 + abs(d2)):
        raise DerivativeNoise(f"order-{k} derivative unstable: {d1} vs {d2}")
    return d2


def nondegeneracy_order(system: SystemSpec, u, i: int, M: int, tol: float = 1e-6) -> Union[int, str]:
    """Smallest k <= M with |pi_i^(k)(u)| > tol, or ``"degenerate"``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    u = as_state(u, system.n)
    check_domain(system, u)
    for k in range(1, M + 1):
        if system.pi is not None:
            v = float(system.pi(u, i, k))
        else:
            v = pi_numeric(system, u, i, k)
        if abs(v) > tol:
            return k
    return "degenerate"


def averaged_matrix(system: SystemSpec, uL, uR) -> np.ndarray:
    """16-point Gauss-Legendre value of the integral of DF over the segment."""
    uL = as_state(uL, system.n)
    uR = as_state(uR, system.n)
    A = np.zeros((system.n, system.n))
    for th, w in zip(GL16_NODES, GL16_WEIGHTS):
        A += w * jacobian(system, th * uL + (1.0 - th) * uR)
    return A


def averaged_eigen(system: SystemSpec, uL, uR) -> EigenStructure:
    """Eigenstructure of the averaged matrix.

    Right eigenvectors are unit vectors oriented to have a positive inner
    product with r_i at the midpoint, so the result reduces to
    :func:`eigen` when uL = uR.
    """
    uL = as_state(uL, system.n)
    uR = as_state(uR, system.n)
    mid = 0.5 * (uL + uR)
    ref = eigen(system, mid, check=False)
    if system.n == 1:
        A = averaged_matrix(system, uL, uR)
        lam = A.reshape(1)
        return EigenStructure(lam, ref.R.copy(), ref.L.copy())
    lam, R = _structure_from_matrix(averaged_matrix(system, uL, uR))
    for k in range(system.n):
        if float(R[:, k] @ ref.R[:, k]) < 0:
            R[:, k] = -R[:, k]
    return EigenStructure(lam, R, np.linalg.inv(R))


@dataclass
class TransversalityReport:
    family: int
    zero_points: np.ndarray
    angles_deg: np.ndarray
    min_angle_deg: float
    whole_box: bool
    flagged: bool
    tol_deg: float


def _grid_axes(system: SystemSpec, grid) -> list:
    if isinstance(grid, int):
        return [np.linspace(system.lo[k], system.hi[k], grid) for k in range(system.n)]
    return [np.asarray(g, dtype=float) for g in grid]


def transversality_check(
    system: SystemSpec, i: int, grid: Union[int, Sequence] = 41, tol: float = 1e-8, tol_deg: float = 5.0
) -> TransversalityReport:
    """Locate the zero set of grad(lambda_i).r_i on a grid and measure how
    transversal r_i is to it.

    Zeros are found along every grid line, from sign changes and from
    near-zero local minima of the absolute value. The angle between r_i
    and the zero set is 90 degrees for isolated points in one dimension;
    in higher dimension it is taken from the gradient of the indicator.
    """
    axes = _grid_axes(system, grid)
    ind = lambda w: gnl_indicator(system, w, i)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.array([ind(p) for p in pts]).reshape(mesh[0].shape)
    if np.all(np.abs(vals) <= tol):
        return TransversalityReport(i, pts, np.zeros(0), 0.0, True, True, tol_deg)
    zeros = []
    for d in range(system.n):
        ax = axes[d]
        moved = np.moveaxis(vals, d, -1)
        other_idx = np.ndindex(moved.shape[:-1])
        for idx in other_idx:
            line = moved[idx]
            base_point = np.array(
                [axes[k][idx[k if k < d else k - 1]] if k != d else 0.0 for k in range(system.n)]
            )

            def along(s, bp=base_point, dd=d):
                w = bp.copy()
                w[dd] = s
                return ind(w)

            for j in range(len(ax) - 1):
                a, b = line[j], line[j + 1]
                if a == 0.0:
                    s0 = ax[j]
                elif a * b < 0:
                    s0 = optimize.brentq(along, ax[j], ax[j + 1], xtol=1e-14)
                else:
                    continue
                p = base_point.copy()
                p[d] = s0
                zeros.append(p)
            if line[-1] == 0.0:
                p = base_point.copy()
                p[d] = ax[-1]
                zeros.append(p)
            absl = np.abs(line)
            for j in range(1, len(ax) - 1):
                if absl[j] <= absl[j - 1] and absl[j] <= absl[j + 1] and line[j - 1] * line[j + 1] > 0:
                    res = optimize.minimize_scalar(
                        lambda s: abs(along(s)), bounds=(ax[j - 1], ax[j + 1]), method="bounded",
                        options={"xatol": 1e-12},
                    )
                    if abs(res.fun) <= tol:
                        p = base_point.copy()
                        p[d] = res.x
                        zeros.append(p)
    if not zeros:
        return TransversalityReport(i, np.zeros((0, system.n)), np.zeros(0), 90.0, False, False, tol_deg)
    Z = np.unique(np.round(np.array(zeros), 9), axis=0)
    angles = []
    for p in Z:
        if system.n == 1:
            angles.append(90.0)
            continue
        h = 1e-5 * (1.0 + float(np.max(np.abs(p))))
        grad = np.array(
            [(ind(p + h * e) - ind(p - h * e)) / (2 * h) for e in np.eye(system.n)]
        )
        gn = np.linalg.norm(grad)
        if gn < 1e-8:
            angles.append(0.0)
            continue
        r = eigen(system, p, check=False).r(i)
        angles.append(float(np.degrees(np.arcsin(min(1.0, abs(grad @ r) / gn)))))
    angles = np.array(angles)
    mn = float(angles.min())
    return TransversalityReport(i, Z, angles, mn, False, mn < tol_deg, tol_deg)
