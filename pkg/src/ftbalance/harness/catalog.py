"""Catalog of ready-made systems.

Each entry returns a fully wired :class:`~ftbalance.algebra.SystemSpec`
with analytic flux, Jacobian and, where cheap, analytic eigenstructure.
"""
from __future__ import annotations

import numpy as np

from ..algebra import GNL, LD, UNCLASSIFIED, SystemSpec
from ..errors import UnknownSystem


def _arr(*xs):
    return np.array(xs, dtype=float)


def burgers(damping: float = 0.0, lo: float = -5.0, hi: float = 5.0) -> SystemSpec:
    """u_t + (u^2/2)_x = -damping * u."""
    a = float(damping)
    src = None
    if a != 0.0:
        src = lambda t, x, u: -a * u
    return SystemSpec(
        n=1,
        flux=lambda u: 0.5 * u * u,
        lo=_arr(lo),
        hi=_arr(hi),
        classes=(GNL,),
        jacobian=lambda u: np.array([[u[0]]]),
        source=src,
        source_lip=abs(a),
        eig=lambda u: (np.array([u[0]]), np.ones((1, 1)), np.ones((1, 1))),
        pi=lambda u, i, k: 1.0 if k == 1 else 0.0,
        name="burgers",
        params={"damping": a},
    )


def _quartic_pi(u, i, k):
    x = u[0]
    return {1: 3 * x * x, 2: 6 * x, 3: 6.0}.get(k, 0.0)


def quartic(lo: float = -2.0, hi: float = 2.0) -> SystemSpec:
    """u_t + (u^4/4)_x = 0; the inflection at u = 0 makes it unclassified."""
    return SystemSpec(
        n=1,
        flux=lambda u: 0.25 * u**4,
        lo=_arr(lo),
        hi=_arr(hi),
        classes=(UNCLASSIFIED,),
        jacobian=lambda u: np.array([[u[0] ** 3]]),
        eig=lambda u: (np.array([u[0] ** 3]), np.ones((1, 1)), np.ones((1, 1))),
        pi=_quartic_pi,
        name="quartic",
    )


def elasticity_damped(a: float = 0.5, c3: float = 1.0) -> SystemSpec:
    """State (v, u): v_t - u_x = 0, u_t - sigma(v)_x = -a u with
    sigma(v) = v + c3 v^3. Both fields fail genuine nonlinearity on v = 0."""
    a = float(a)
    c3 = float(c3)

    def sigma(v):
        return v + c3 * v**3

    def dsigma(v):
        return 1.0 + 3.0 * c3 * v * v

    def eig(u):
        c = np.sqrt(dsigma(u[0]))
        nrm = np.sqrt(1.0 + c * c)
        R = np.array([[1.0, 1.0], [c, -c]]) / nrm
        L = np.array([[c, 1.0], [c, -1.0]]) * (nrm / (2 * c))
        return np.array([-c, c]), R, L

    return SystemSpec(
        n=2,
        flux=lambda u: np.array([-u[1], -sigma(u[0])]),
        lo=_arr(-1.0, -2.0),
        hi=_arr(1.0, 2.0),
        classes=(UNCLASSIFIED, UNCLASSIFIED),
        jacobian=lambda u: np.array([[0.0, -1.0], [-dsigma(u[0]), 0.0]]),
        source=lambda t, x, u: np.array([0.0, -a * u[1]]),
        source_lip=abs(a),
        eig=eig,
        name="elasticity_damped",
        params={"a": a, "c3": c3},
    )


def granular() -> SystemSpec:
    """State (h, p): h_t + (h p)_x = (p - 1) h, p_t + ((p - 1) h)_x = 0."""
    return SystemSpec(
        n=2,
        flux=lambda u: np.array([u[0] * u[1], (u[1] - 1.0) * u[0]]),
        lo=_arr(0.05, 1.0),
        hi=_arr(0.3, 2.0),
        classes=(UNCLASSIFIED, UNCLASSIFIED),
        jacobian=lambda u: np.array([[u[1], u[0]], [u[1] - 1.0, u[0]]]),
        source=lambda t, x, u: np.array([(u[1] - 1.0) * u[0], 0.0]),
        source_lip=2.0,
        name="granular",
    )


def arz_traffic(rho_max: float = 1.0, q_star: float = 0.5) -> SystemSpec:
    """State (rho, q) with v = (1/rho - 1/rho_max) q:
    rho_t + (rho v)_x = 0, q_t + ((q - q_star) v)_x = 0."""
    rM = float(rho_max)
    qs = float(q_star)

    def speed(u):
        return (1.0 / u[0] - 1.0 / rM) * u[1]

    def flux(u):
        v = speed(u)
        return np.array([u[0] * v, (u[1] - qs) * v])

    def jac(u):
        rho, q = u
        return np.array(
            [
                [-q / rM, 1.0 - rho / rM],
                [-(q - qs) * q / rho**2, (2 * q - qs) * (1.0 / rho - 1.0 / rM)],
            ]
        )

    return SystemSpec(
        n=2,
        flux=flux,
        lo=_arr(0.2 * rM, 0.6),
        hi=_arr(0.8 * rM, 1.5),
        classes=(GNL, LD),
        jacobian=jac,
        name="arz_traffic",
        params={"rho_max": rM, "q_star": qs},
    )


def _tri_eig(u):
    c = 1.0 + 2.0 * u[1] + u[0]
    v = u[1]
    nrm = np.hypot(c, v)
    r1 = np.array([c, -v]) / nrm
    R = np.column_stack([r1, [0.0, 1.0]])
    L = np.array([[1.0 / r1[0], 0.0], [v / c, 1.0]])
    return np.array([0.0, c]), R, L


def _tri_pi(u, i, k):
    if i == 1:
        return 0.0
    return 2.0 if k == 1 else 0.0


def triangular_counterexample() -> SystemSpec:
    """State (u, v): u_t = 0, v_t + ((1 + v + u) v)_x = 0."""
    return SystemSpec(
        n=2,
        flux=lambda u: np.array([0.0, (1.0 + u[1] + u[0]) * u[1]]),
        lo=_arr(-0.2, -0.3),
        hi=_arr(1.5, 0.4),
        classes=(LD, GNL),
        jacobian=lambda u: np.array([[0.0, 0.0], [u[1], 1.0 + 2.0 * u[1] + u[0]]]),
        eig=_tri_eig,
        pi=_tri_pi,
        name="triangular_counterexample",
    )


def cubic(lo: float = -2.0, hi: float = 2.0) -> SystemSpec:
    """u_t + (u^3/3)_x = 0; inflection at u = 0."""
    return SystemSpec(
        n=1,
        flux=lambda u: u**3 / 3.0,
        lo=_arr(lo),
        hi=_arr(hi),
        classes=(UNCLASSIFIED,),
        jacobian=lambda u: np.array([[u[0] ** 2]]),
        eig=lambda u: (np.array([u[0] ** 2]), np.ones((1, 1)), np.ones((1, 1))),
        pi=lambda u, i, k: {1: 2 * u[0], 2: 2.0}.get(k, 0.0),
        name="cubic",
    )


def frozen_scalar(lo: float = -5.0, hi: float = 5.0) -> SystemSpec:
    """u_t = 0; nothing moves. Used as a degenerate control."""
    return SystemSpec(
        n=1,
        flux=lambda u: np.zeros(1),
        lo=_arr(lo),
        hi=_arr(hi),
        classes=(LD,),
        jacobian=lambda u: np.zeros((1, 1)),
        eig=lambda u: (np.zeros(1), np.ones((1, 1)), np.ones((1, 1))),
        pi=lambda u, i, k: 0.0,
        name="frozen_scalar",
    )


CATALOG = {
    "burgers": burgers,
    "quartic": quartic,
    "elasticity_damped": elasticity_damped,
    "granular": granular,
    "arz_traffic": arz_traffic,
    "triangular_counterexample": triangular_counterexample,
    "cubic": cubic,
    "frozen_scalar": frozen_scalar,
}


def catalog_ids():
    return sorted(CATALOG)


def catalog_system(system_id: str, params: dict = None) -> SystemSpec:
    try:
        ctor = CATALOG[system_id]
    except KeyError:
        raise UnknownSystem(f"unknown system {system_id!r}; known: {catalog_ids()}") from None
    return ctor(**(params or {}))
