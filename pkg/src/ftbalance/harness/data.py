"""Initial-data generators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..engine import PiecewiseConstant


def cantor_points(n: int) -> np.ndarray:
    """Jump positions of the level-n Cantor approximant on [0, 1].

    These are the 2^n endpoints of the middle thirds removed at stage n
    (n=2 gives {1, 2, 7, 8}/9). Level 0 is the midpoint.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    if n == 0:
        return np.array([0.5])
    # left ends of the stage-(n-1) intervals, in units of 3^-(n-1)
    lefts = [0]
    for _ in range(n - 1):
        lefts = [3 * a for a in lefts] + [3 * a + 2 for a in lefts]
    lefts.sort()
    unit = 3.0 ** (-n)
    pts = []
    for a in lefts:
        pts.append((3 * a + 1) * unit)
        pts.append((3 * a + 2) * unit)
    return np.array(pts)


def cantor_datum(n: int, amplitude: float = 1.0, window: Tuple[float, float] = (0.0, 1.0),
                 background: Optional[Sequence[float]] = None, component: int = 0) -> PiecewiseConstant:
    """Level-n Cantor staircase: 2^n upward jumps of amplitude 2^-n.

    For systems pass the constant ``background`` state; the staircase is
    added to its ``component``.
    """
    a, b = window
    base = np.zeros(1) if background is None else np.asarray(background, dtype=float)
    if amplitude == 0.0:
        return PiecewiseConstant.constant(base)
    x = a + (b - a) * cantor_points(n)
    m = x.size
    states = np.repeat(base[None, :], m + 1, axis=0)
    states[:, component] += amplitude * np.arange(m + 1) / m
    return PiecewiseConstant(x, states)


def step_datum(uL, uR, x: float = 0.0) -> PiecewiseConstant:
    uL = np.atleast_1d(np.asarray(uL, dtype=float))
    uR = np.atleast_1d(np.asarray(uR, dtype=float))
    return PiecewiseConstant(np.array([x]), np.array([uL, uR]))


def random_step_datum(rng: np.random.Generator, n_jumps: int, tv: float,
                      window: Tuple[float, float] = (-1.0, 1.0),
                      center: Optional[Sequence[float]] = None,
                      directions: Optional[np.ndarray] = None) -> PiecewiseConstant:
    """Random piecewise-constant datum with total variation ``tv``.

    Jump vectors have random signs and magnitudes summing to ``tv``; for
    systems they point along random unit ``directions`` (default: random).
    """
    c = np.zeros(1) if center is None else np.asarray(center, dtype=float)
    n = c.size
    x = np.sort(rng.uniform(window[0], window[1], n_jumps))
    mags = rng.uniform(0.2, 1.0, n_jumps)
    mags *= tv / mags.sum()
    if directions is None:
        d = rng.normal(size=(n_jumps, n))
    else:
        d = np.asarray(directions, dtype=float).reshape(n_jumps, n)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    jumps = d * mags[:, None]
    states = np.vstack([np.zeros(n), np.cumsum(jumps, axis=0)])
    states += c - states.mean(axis=0)
    return PiecewiseConstant(x, states)


@dataclass
class PiecewiseLinear:
    """Continuous scalar function, linear between knots, zero outside."""

    x: np.ndarray
    y: np.ndarray

    def __call__(self, z):
        return np.interp(z, self.x, self.y, left=0.0, right=0.0)

    def integral(self) -> float:
        return float(np.sum(0.5 * (self.y[1:] + self.y[:-1]) * np.diff(self.x)))

    def total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.y))) + abs(self.y[0]) + abs(self.y[-1]))


def random_compact_pl(rng: np.random.Generator, tv: float, support: Tuple[float, float] = (-1.0, 1.0),
                      n_kinks: int = 6) -> PiecewiseLinear:
    """Random compactly supported continuous piecewise-linear function of given TV."""
    a, b = support
    x = np.concatenate([[a], np.sort(rng.uniform(a, b, n_kinks)), [b]])
    y = np.concatenate([[0.0], rng.normal(size=n_kinks), [0.0]])
    cur = float(np.sum(np.abs(np.diff(y))))
    y *= tv / cur
    return PiecewiseLinear(x, y)


def quantize_levels(f: PiecewiseLinear, eps: float) -> PiecewiseConstant:
    """eps * floor(f / eps): jumps exactly where f crosses a multiple of eps.

    The result is monotone in f, has TV <= TV(f) and every jump has size eps.
    """
    xs, states = [], [0.0]
    for k in range(f.x.size - 1):
        x0, x1 = f.x[k], f.x[k + 1]
        y0, y1 = f.y[k], f.y[k + 1]
        l0, l1 = math.floor(y0 / eps), math.floor(y1 / eps)
        if l0 == l1 or x1 == x0:
            continue
        if l1 > l0:
            levels = [(m, m) for m in range(l0 + 1, l1 + 1)]
        else:
            levels = [(m, m - 1) for m in range(l0, l1, -1)]
        for m, new in levels:
            xc = x0 + (m * eps - y0) / (y1 - y0) * (x1 - x0)
            xs.append(xc)
            states.append(new * eps)
    if not xs:
        return PiecewiseConstant.constant([0.0])
    return PiecewiseConstant(np.array(xs), np.array(states)[:, None])


def bump_datum(background: Sequence[float], component: int, height: float,
               interval: Tuple[float, float]) -> PiecewiseConstant:
    """Constant background with ``height`` added to one component on an interval."""
    base = np.asarray(background, dtype=float)
    top = base.copy()
    top[component] += height
    return PiecewiseConstant(np.array(interval, dtype=float), np.array([base, top, base]))


def combine(p: PiecewiseConstant, q: PiecewiseConstant) -> PiecewiseConstant:
    """Sum of two piecewise-constant profiles (far-left states added)."""
    xs = np.unique(np.concatenate([p.x, q.x]))
    states = [p.states[0] + q.states[0]]
    for x in xs:
        states.append(p(x) + q(x))
    return PiecewiseConstant(xs, np.array(states))
