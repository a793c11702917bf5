"""Run configuration: flat ``key=value`` text, one key per line.

Lines starting with ``#`` and blank lines are ignored. ``system.<name>``
keys are forwarded to the catalog constructor and ``datum.<name>`` keys to
the datum generator; both are checked against what those accept.
"""
from __future__ import annotations

import hashlib
import inspect
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..engine import PiecewiseConstant, estimate_lam_hat
from ..errors import ConfigError
from . import catalog, data

TOP_KEYS = {
    "system": str,
    "eps": float,
    "tau": float,
    "beta": float,
    "kappa": float,
    "lam_hat": float,
    "T": float,
    "window": "pair",
    "datum": str,
    "output": str,
    "seed": int,
    "mode": str,
    "rho": float,
    "update_threshold": float,
    "approaching_only": bool,
    "np_budget": float,
    "front_cap": int,
    "snapshots": "floats",
    "C": float,
}

DATUM_KEYS = {
    "constant": {"state": "floats"},
    "step": {"uL": "floats", "uR": "floats", "x": float},
    "cantor": {"level": int, "amplitude": float, "a": float, "b": float, "background": "floats",
               "component": int},
    "random_steps": {"n_jumps": int, "tv": float, "a": float, "b": float, "center": "floats"},
    "random_pl": {"tv": float, "a": float, "b": float, "n_kinks": int},
    "bump": {"background": "floats", "component": int, "height": float, "a": float, "b": float},
    "steps": {"x": "floats", "states": "floats"},
}

MODES = (None, "auto", "accurate", "simplified")


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> List[float]:
    return [float(p) for p in s.replace(";", ",").split(",") if p.strip()]


def _convert(kind, raw: str):
    if kind is bool:
        return _parse_bool(raw)
    if kind == "floats":
        return _floats(raw)
    if kind == "pair":
        v = _floats(raw)
        if len(v) != 2 or not v[0] < v[1]:
            raise ValueError(f"expected 'a,b' with a<b, got {raw!r}")
        return tuple(v)
    return kind(raw)


def _coerce_param(raw: str):
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    try:
        return _parse_bool(raw)
    except ValueError:
        return raw


@dataclass
class RunConfig:
    system: str
    eps: float
    T: float
    tau: Optional[float] = None
    beta: Optional[float] = None
    kappa: float = 10.0
    lam_hat: Optional[float] = None
    window: Tuple[float, float] = (-10.0, 10.0)
    datum: str = "step"
    output: Optional[str] = None
    seed: int = 0
    mode: Optional[str] = None
    rho: Optional[float] = None
    update_threshold: Optional[float] = None
    approaching_only: bool = False
    np_budget: Optional[float] = None
    front_cap: int = 1_000_000
    snapshots: List[float] = field(default_factory=list)
    C: Optional[float] = None
    system_params: Dict[str, object] = field(default_factory=dict)
    datum_params: Dict[str, object] = field(default_factory=dict)
    source_text: str = ""

    # ---- derived --------------------------------------------------------------
    def build_system(self):
        return catalog.catalog_system(self.system, self.system_params)

    def build_datum(self, system=None) -> PiecewiseConstant:
        system = system or self.build_system()
        return make_datum(self.datum, self.datum_params, system.n, self.seed, self.eps)

    def canonical(self) -> str:
        """Sorted key=value echo; identical configs give identical text."""
        lines = []
        for k in TOP_KEYS:
            v = getattr(self, k)
            if v is None or (k == "snapshots" and not v):
                continue
            lines.append(f"{k}={_fmt(v)}")
        for k, v in sorted(self.system_params.items()):
            lines.append(f"system.{k}={_fmt(v)}")
        for k, v in sorted(self.datum_params.items()):
            lines.append(f"datum.{k}={_fmt(v)}")
        return "\n".join(sorted(lines)) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()[:16]

    def with_eps(self, eps: float, tau: Optional[float] = None) -> "RunConfig":
        from dataclasses import replace

        return replace(self, eps=eps, tau=tau, beta=None if self.beta is None else self.beta * eps / self.eps)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(float(x)) for x in v)
    return str(v)


def parse_config(text: str) -> RunConfig:
    vals: Dict[str, object] = {}
    sys_params: Dict[str, object] = {}
    datum_params: Dict[str, str] = {}
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, raw = (p.strip() for p in s.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key.startswith("system."):
            sys_params[key[7:]] = _coerce_param(raw)
        elif key.startswith("datum."):
            datum_params[key[6:]] = raw
        elif key in TOP_KEYS:
            try:
                vals[key] = _convert(TOP_KEYS[key], raw)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key}: {exc}") from None
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    for req in ("system", "eps", "T"):
        if req not in vals:
            raise ConfigError(f"missing required key {req!r}")
    cfg = RunConfig(**vals)
    cfg.source_text = text
    if cfg.system not in catalog.catalog_ids():
        raise ConfigError(f"unknown system {cfg.system!r}")
    ctor = catalog.CATALOG[cfg.system]
    accepted = set(inspect.signature(ctor).parameters)
    bad = set(sys_params) - accepted
    if bad:
        raise ConfigError(f"unknown system parameters {sorted(bad)} for {cfg.system}")
    cfg.system_params = sys_params
    if cfg.datum not in DATUM_KEYS:
        raise ConfigError(f"unknown datum {cfg.datum!r}")
    spec = DATUM_KEYS[cfg.datum]
    conv = {}
    for k, raw in datum_params.items():
        if k not in spec:
            raise ConfigError(f"unknown key datum.{k} for datum={cfg.datum}")
        try:
            conv[k] = _convert(spec[k], raw)
        except ValueError as exc:
            raise ConfigError(f"datum.{k}: {exc}") from None
    cfg.datum_params = conv
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of auto, accurate, simplified")
    validate(cfg)
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate(cfg: RunConfig, system=None, datum: Optional[PiecewiseConstant] = None) -> None:
    """0 < tau <= eps, beta above the relation bound and lam_hat above every sampled speed."""
    if not cfg.eps > 0:
        raise ConfigError("eps must be positive")
    tau = cfg.eps if cfg.tau is None else cfg.tau
    if not (0 < tau <= cfg.eps):
        raise ConfigError("need 0 < tau <= eps")
    if cfg.T < 0:
        raise ConfigError("T must be nonnegative")
    if cfg.beta is None and cfg.lam_hat is None:
        return
    system = system or cfg.build_system()
    if cfg.lam_hat is not None:
        top = estimate_lam_hat(system) - 1.0
        if not cfg.lam_hat > top:
            raise ConfigError(f"lam_hat={cfg.lam_hat} must exceed the sampled max speed {top}")
    if cfg.beta is not None:
        datum = datum or cfg.build_datum(system)
        bound = beta_bound(system, datum, cfg.eps, tau, cfg.T)
        if not cfg.beta > bound:
            raise ConfigError(f"beta={cfg.beta} must exceed 4(1+|alpha|)(eps+tau TVcap) = {bound}")


def beta_bound(system, datum: PiecewiseConstant, eps: float, tau: float, T: float) -> float:
    from ..fracstep import _g_bound

    tv0 = datum.total_variation()
    tv_cap = tv0 + _g_bound(system, max(tv0, 1e-300)) * T if system.source is not None else tv0
    return 4.0 * (1.0 + system.alpha_l1) * (eps + tau * tv_cap)


def make_datum(kind: str, p: dict, n: int, seed: int, eps: float) -> PiecewiseConstant:
    rng = np.random.default_rng(seed)
    if kind == "constant":
        st = p.get("state", [0.0] * n)
        return PiecewiseConstant.constant(_vec(st, n))
    if kind == "step":
        return data.step_datum(_vec(p.get("uL", [1.0] * n), n), _vec(p.get("uR", [0.0] * n), n), p.get("x", 0.0))
    if kind == "cantor":
        bg = p.get("background")
        return data.cantor_datum(p.get("level", 4), p.get("amplitude", 1.0), (p.get("a", 0.0), p.get("b", 1.0)),
                                 None if bg is None else _vec(bg, n), p.get("component", 0))
    if kind == "random_steps":
        c = p.get("center")
        return data.random_step_datum(rng, p.get("n_jumps", 8), p.get("tv", 0.5), (p.get("a", -1.0), p.get("b", 1.0)),
                                      None if c is None else _vec(c, n))
    if kind == "random_pl":
        if n != 1:
            raise ConfigError("random_pl is scalar only")
        f = data.random_compact_pl(rng, p.get("tv", 0.5), (p.get("a", -1.0), p.get("b", 1.0)), p.get("n_kinks", 6))
        return data.quantize_levels(f, eps)
    if kind == "bump":
        return data.bump_datum(_vec(p.get("background", [0.0] * n), n), p.get("component", 0), p.get("height", 0.1),
                               (p.get("a", 0.0), p.get("b", 1.0)))
    if kind == "steps":
        xs = p.get("x", [])
        st = np.asarray(p.get("states", []), dtype=float).reshape(len(xs) + 1, n)
        return PiecewiseConstant(np.asarray(xs, dtype=float), st)
    raise ConfigError(f"unknown datum {kind!r}")


def _vec(v, n: int) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size != n:
        raise ConfigError(f"state {list(a)} has {a.size} components, system has {n}")
    return a
