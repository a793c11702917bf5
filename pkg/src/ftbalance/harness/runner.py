"""run / sweep / diagnose / export on top of the library."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .. import algebra, characteristics, measures, sbv
from ..algebra import GNL
from ..engine import Trajectory
from ..fracstep import BalanceConfig, run_balance
from ..riemann import CONTACT, RAREFACTION, SHOCK
from . import data
from .config import RunConfig
from .io import dumps, fmt_time, load_trajectory, profile_rows, write_csv, write_trajectory

RH_TOL = 1e-9


@dataclass
class Outcome:
    """Result of a harness command: files written and assertion failures."""

    outdir: str
    files: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)
    report: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


# ---- run ------------------------------------------------------------------------

def simulate(cfg: RunConfig) -> Trajectory:
    system = cfg.build_system()
    datum = cfg.build_datum(system)
    engine = {"kappa": cfg.kappa, "front_cap": cfg.front_cap, "approaching_only": cfg.approaching_only}
    for k in ("lam_hat", "rho", "np_budget"):
        if getattr(cfg, k) is not None:
            engine[k] = getattr(cfg, k)
    if cfg.mode not in (None, "auto"):
        engine["mode"] = cfg.mode
    bc = BalanceConfig(eps=cfg.eps, tau=cfg.tau or cfg.eps, T=cfg.T, beta=cfg.beta, window=cfg.window,
                       update_threshold=cfg.update_threshold, engine=engine)
    traj = run_balance(system, datum, bc)
    traj.meta["exact_mass"] = exact_mass(cfg, system, datum).tolist()
    return traj


def exact_mass(cfg: RunConfig, system, datum) -> np.ndarray:
    """Integral of the exact datum over the window (before any quantization)."""
    if cfg.datum == "random_pl":
        p = cfg.datum_params
        rng = np.random.default_rng(cfg.seed)
        f = data.random_compact_pl(rng, p.get("tv", 0.5), (p.get("a", -1.0), p.get("b", 1.0)), p.get("n_kinks", 6))
        return np.array([f.integral() + 0.0])
    return datum.integral(*cfg.window)


def rh_violations(traj: Trajectory, tol: float = RH_TOL) -> List[str]:
    """Shock fronts obey Rankine-Hugoniot; rarefaction/contact speeds are within
    2 eps of lambda_k at both end states."""
    out = []
    system = traj.system
    eps = traj.config.eps
    for f in traj.fronts.values():
        if f.is_np:
            continue
        if f.kind == SHOCK:
            dF = system.flux(f.uR) - system.flux(f.uL)
            r = float(np.linalg.norm(f.speed * (f.uR - f.uL) - dF))
            if r > tol * (1.0 + float(np.linalg.norm(dF))):
                out.append(f"front {f.id}: RH residual {r:.3e}")
        elif f.kind in (RAREFACTION, CONTACT):
            k = f.family - 1
            for u in (f.uL, f.uR):
                lam = float(algebra.eigenvalues(system, u)[k])
                if abs(f.speed - lam) > 2.0 * eps:
                    out.append(f"front {f.id}: speed {f.speed:.6g} vs lambda {lam:.6g}")
    return out


def consistency_violations(traj: Trajectory) -> List[str]:
    out = []
    for node in traj.nodes:
        try:
            measures.check_node_consistency(traj, node)
        except Exception as exc:  # reported, not raised
            out.append(f"node {node.id}: {exc}")
    return out


def run(cfg: RunConfig, outdir: Optional[str] = None) -> Outcome:
    outdir = outdir or cfg.output or os.path.join("runs", cfg.hash())
    traj = simulate(cfg)
    write_trajectory(traj, cfg, outdir)
    v = consistency_violations(traj) + rh_violations(traj)
    return Outcome(outdir, sorted(os.listdir(outdir)), v, {"nodes": len(traj.nodes), "fronts": len(traj.fronts)})


# ---- sweep ------------------------------------------------------------------------

def sweep(cfg: RunConfig, levels: int, outdir: Optional[str] = None) -> Outcome:
    """Runs at eps / 2^j (tau scaled alike) for j < levels and a refinement report."""
    outdir = outdir or os.path.join(cfg.output or "runs", f"sweep_{cfg.hash()}")
    os.makedirs(outdir, exist_ok=True)
    rows = []
    violations = []
    tau0 = cfg.tau or cfg.eps
    for j in range(levels):
        c = cfg.with_eps(cfg.eps / 2**j, tau0 / 2**j)
        traj = simulate(c)
        m0 = np.asarray(traj.meta["exact_mass"])
        defect = float(np.max(np.abs(np.asarray(traj.series[-1]["mass"]) - m0)))
        rh = rh_violations(traj)
        cm = measures.composite_measures(traj.system, traj)
        prof = sbv.cantor_proxy(characteristics.physical_wave_measure(traj, 1, traj.t_end))
        ol = None
        if traj.t_end > traj.t0 and traj.system.classes[0] == GNL:
            a, b = cfg.window
            ol = characteristics.oleinik_check(traj, 1, [(a, b)], traj.t0, traj.t_end).min_passing_C
        rows.append({
            "eps": c.eps, "tau": c.tau, "nodes": len(traj.nodes), "fronts": len(traj.fronts),
            "mass_defect": defect, "rh_violations": len(rh), "IC_mass": cm.IC.total(),
            "source_mass": cm.source.total(), "oleinik_C": ol, "cp": prof.values.tolist(),
        })
        violations += [f"eps={c.eps}: {m}" for m in rh]
    if cfg.system == "burgers":
        for a, b in zip(rows[:-1], rows[1:]):
            if a["mass_defect"] > 1e-12 and a["mass_defect"] < 1.5 * b["mass_defect"]:
                violations.append(f"mass defect {a['mass_defect']:.3e} -> {b['mass_defect']:.3e} (< 1.5x)")
    write_csv(os.path.join(outdir, "sweep.csv"),
              ["eps", "tau", "nodes", "fronts", "mass_defect", "rh_violations", "IC_mass", "source_mass", "oleinik_C"],
              [[r["eps"], r["tau"], r["nodes"], r["fronts"], r["mass_defect"], r["rh_violations"], r["IC_mass"],
                r["source_mass"], "" if r["oleinik_C"] is None else r["oleinik_C"]] for r in rows])
    with open(os.path.join(outdir, "sweep.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps({"config_hash": cfg.hash(), "rows": rows}) + "\n")
    return Outcome(outdir, ["sweep.csv", "sweep.json"], violations, {"rows": rows})


# ---- diagnose ------------------------------------------------------------------------

def random_regions(traj: Trajectory, rng: np.random.Generator, count: int, window, max_k: int = 2):
    """Random (s, t, intervals) triples inside the run."""
    out = []
    t0, t1 = traj.t0, traj.t_end
    a, b = window
    for _ in range(count):
        s = float(rng.uniform(t0, t0 + 0.5 * (t1 - t0)))
        t = float(rng.uniform(s + 0.1 * (t1 - s), t1))
        k = int(rng.integers(1, max_k + 1))
        pts = np.sort(rng.uniform(a, b, 2 * k))
        out.append((s, t, [(float(pts[2 * m]), float(pts[2 * m + 1])) for m in range(k)]))
    return out


def gnl_families(system) -> List[int]:
    return [k + 1 for k, c in enumerate(system.classes) if c == GNL]


def balance_diagnostic(traj: Trajectory, cfg: RunConfig, count: int = 20, window=None):
    """Balance checks on random regions; C is fitted on the first half and
    asserted (twice the fitted value unless ``cfg.C`` is set) on the rest."""
    rng = np.random.default_rng(cfg.seed)
    window = window or _active_window(traj)
    rows, reports = [], []
    for i in gnl_families(traj.system):
        curves = measures.track_beta_discontinuities(traj, characteristics.default_beta(traj), i)
        meas = measures.composite_measures(traj.system, traj, {i: curves})
        for s, t, J in random_regions(traj, rng, count, window):
            reg = characteristics.build_region(traj, i, J, s, t)
            reports.append(characteristics.region_balance_check(traj, reg, curves=curves, meas=meas))
    half = len(reports) // 2
    C_fit = characteristics.calibrate_constant(reports[:half])
    C = cfg.C if cfg.C is not None else 2.0 * max(C_fit, 1.0)
    violations = []
    for r in reports[half:]:
        for name, m in (("upper", C * (r.icjs + r.eps) - r.delta_cont),
                        ("lower", r.delta_cont + C * (r.ics + r.k * r.beta)),
                        ("all", C * (r.ics + r.eps) - r.delta_all)):
            if m < 0:
                violations.append(f"balance {name} on [{r.s:.4g},{r.t:.4g}] margin {m:.3e}")
    for r in reports:
        rows.append([r.family, r.s, r.t, r.k, r.delta_cont, r.delta_all, r.ics, r.icjs, r.min_C])
    return rows, violations, {"C_fit": C_fit, "C_assert": C}


def _active_window(traj: Trajectory):
    xs = [f.x_at(traj.t0) for f in traj.alive_at(traj.t0)] + [f.x_at(traj.t_end) for f in traj.alive_at(traj.t_end)]
    if not xs:
        return (-1.0, 1.0)
    a, b = min(xs), max(xs)
    pad = 0.1 * max(b - a, 1.0)
    return (a - pad, b + pad)


def oleinik_diagnostic(traj: Trajectory, cfg: RunConfig, count: int = 10):
    rng = np.random.default_rng(cfg.seed + 1)
    window = _active_window(traj)
    rows, violations = [], []
    for i in gnl_families(traj.system):
        curves = measures.track_beta_discontinuities(traj, characteristics.default_beta(traj), i)
        meas = measures.composite_measures(traj.system, traj, {i: curves})
        for s, t, J in random_regions(traj, rng, count, window):
            rep = characteristics.oleinik_check(traj, i, J, s, t, C=cfg.C, curves=curves, meas=meas)
            r = rep.row()
            rows.append([r["s"], r["t"], r["k"], r["|J|"], r["pos_mass"], r["neg_cont_mass"], r["ics_mass"],
                         r["icjs_mass"], r["min_passing_C"]])
            violations += [f"oleinik {v} on [{s:.4g},{t:.4g}]" for v in rep.violations]
    return rows, violations


def diagnose(traj_dir: str, check: str = "all") -> Outcome:
    traj, cfg = load_trajectory(traj_dir)
    out = Outcome(traj_dir)
    if check in ("balance", "all"):
        rows, v, info = balance_diagnostic(traj, cfg)
        write_csv(os.path.join(traj_dir, "balance.csv"),
                  ["family", "s", "t", "k", "delta_cont", "delta_all", "ics", "icjs", "min_C"], rows)
        out.files.append("balance.csv")
        out.violations += v
        out.report["balance"] = info
    if check in ("oleinik", "all"):
        rows, v = oleinik_diagnostic(traj, cfg)
        write_csv(os.path.join(traj_dir, "oleinik.csv"),
                  ["s", "t", "k", "|J|", "pos_mass", "neg_cont_mass", "ics_mass", "icjs_mass", "min_passing_C"], rows)
        out.files.append("oleinik.csv")
        out.violations += v
    if check in ("sbv", "all"):
        beta = characteristics.default_beta(traj)
        rep = {}
        for i in range(1, traj.system.n + 1):
            p = sbv.profiles_over_time(traj, i, beta, sbv.default_scales())
            rep[f"i{i}"] = {"scales": p["t0"].scales, "t0": p["t0"].values, "T": p["T"].values}
        with open(os.path.join(traj_dir, "sbv.json"), "w", encoding="utf-8") as fh:
            fh.write(dumps(rep) + "\n")
        out.files.append("sbv.json")
    return out


# ---- export ------------------------------------------------------------------------

def export(traj_dir: str, at: float, what: str) -> Outcome:
    traj, cfg = load_trajectory(traj_dir)
    out = Outcome(traj_dir)
    tag = fmt_time(at)
    if what == "profile":
        name = f"profile_t{tag}.csv"
        write_csv(os.path.join(traj_dir, name), *profile_rows(traj.sample(at)))
    elif what == "waves":
        name = f"waves_t{tag}.csv"
        beta = characteristics.default_beta(traj)
        rows = []
        for i in range(1, traj.system.n + 1):
            curves = measures.track_beta_discontinuities(traj, beta, i)
            ups = characteristics.physical_wave_measure(traj, i, at)
            jump, cont = measures.split_jump_cont(ups, curves)
            for x, wj, wc in zip(ups.x, jump.w, cont.w):
                rows.append([x, i, wj + wc, "jump" if wj != 0.0 else "cont"])
        write_csv(os.path.join(traj_dir, name), ["x", "family", "weight", "part"], rows)
    elif what == "measures":
        name = f"measures_t{tag}.csv"
        from .io import measure_rows

        beta = characteristics.default_beta(traj)
        curves = {i: measures.track_beta_discontinuities(traj, beta, i) for i in range(1, traj.system.n + 1)}
        header, rows = measure_rows(traj, curves)
        write_csv(os.path.join(traj_dir, name), header, [r for r in rows if r[0] <= at])
    else:
        raise ValueError(f"unknown export {what!r}")
    out.files.append(name)
    return out
