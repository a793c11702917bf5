"""Trajectory persistence and CSV/JSON export.

Floats go to CSV as 17-significant-digit decimals and to JSON through
``repr``, so every value reads back bit-exactly. Nothing time- or
machine-dependent is written, which keeps repeated runs byte-identical.
"""
from __future__ import annotations

import csv
import json
import math
import os
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .. import measures
from ..engine import EngineConfig, Front, Node, PiecewiseConstant, Trajectory
from ..errors import IoError, SchemaMismatch
from .config import RunConfig, parse_config

SCHEMA = 1
FILES = ("config.txt", "meta.json", "functionals.csv", "nodes.jsonl", "fronts.jsonl")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % (float(v) + 0.0)
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def _f(v) -> float:
    if v is None:
        return math.inf
    if isinstance(v, str):
        return float(v)
    return float(v)


# ---- writers ------------------------------------------------------------------

def functionals_rows(traj: Trajectory):
    n = traj.system.n
    header = ["t", "V", "Q", "Upsilon", "TV"] + [f"mass_{k + 1}" for k in range(n)] + ["n_fronts", "np_strength"]
    rows = []
    for r in traj.series:
        rows.append([r["t"], r["V"], r["Q"], r["Upsilon"], r["TV"], *np.asarray(r["mass"]).tolist(),
                     int(r["n_fronts"]), r["np_strength"]])
    return header, rows


def front_dict(f: Front) -> dict:
    return {
        "id": f.id, "family": f.family, "kind": f.kind, "size": f.size, "speed": f.speed,
        "uL": f.uL.tolist(), "uR": f.uR.tolist(), "sig0": f.sig0, "sig1": f.sig1,
        "birth": f.birth, "t_birth": f.t_birth, "segs": [list(s) for s in f.segs],
        "death": f.death, "t_death": None if math.isinf(f.t_death) else f.t_death,
    }


def measure_rows(traj: Trajectory, curves_by_family: Dict[int, list]):
    cm = measures.composite_measures(traj.system, traj, curves_by_family)
    rows = []
    for m, kind in ((cm.I, "I"), (cm.IC, "IC"), (cm.source, "source")):
        for t, x, w in zip(m.t, m.x, m.w):
            rows.append([t, x, kind, 0, w])
    for t, x, i, mu, mj in cm.balance_atoms:
        rows.append([t, x, "mu", i, mu])
        if mj != 0.0:
            rows.append([t, x, "mu_jump", i, mj])
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return ["t", "x", "kind", "family", "weight"], rows


def profile_rows(p: PiecewiseConstant):
    header = ["x"] + [f"u_{k + 1}" for k in range(p.n)]
    rows = [[-math.inf, *p.states[0].tolist()]]
    for x, st in zip(p.x, p.states[1:]):
        rows.append([x, *st.tolist()])
    return header, rows


def fmt_time(t: float) -> str:
    return format(float(t), ".12g")


def write_trajectory(traj: Trajectory, cfg: RunConfig, outdir: str, beta: Optional[float] = None) -> Dict[int, list]:
    """Write the full file set; returns the tracked curves by family."""
    from ..characteristics import default_beta

    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        raise IoError(str(exc)) from None
    with open(os.path.join(outdir, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write(cfg.canonical())
    beta = beta if beta is not None else default_beta(traj)
    meta = {
        "schema": SCHEMA,
        "config_hash": cfg.hash(),
        "system": traj.system.name,
        "n": traj.system.n,
        "t0": traj.t0,
        "t_end": traj.t_end,
        "lam_hat": traj.lam_hat,
        "beta": beta,
        "far_left_log": [[t, list(np.asarray(s, dtype=float))] for t, s in traj.far_left_log],
        "engine": {k: getattr(traj.config, k) for k in (
            "eps", "rho", "lam_hat", "kappa", "front_cap", "np_drop", "np_budget", "simul_tol",
            "perturb", "mode", "approaching_only", "window")},
        "run": {k: v for k, v in traj.meta.items() if k != "updates"},
    }
    with open(os.path.join(outdir, "meta.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps(meta) + "\n")
    write_csv(os.path.join(outdir, "functionals.csv"), *functionals_rows(traj))
    with open(os.path.join(outdir, "nodes.jsonl"), "w", encoding="utf-8") as fh:
        for node in traj.nodes:
            fh.write(dumps(node.to_dict()) + "\n")
    with open(os.path.join(outdir, "fronts.jsonl"), "w", encoding="utf-8") as fh:
        for fid in sorted(traj.fronts):
            fh.write(dumps(front_dict(traj.fronts[fid])) + "\n")
    curves = {i: measures.track_beta_discontinuities(traj, beta, i) for i in range(1, traj.system.n + 1)}
    for i, cs in curves.items():
        with open(os.path.join(outdir, f"curves_beta{format(beta, '.6g')}_i{i}.jsonl"), "w", encoding="utf-8") as fh:
            for c in cs:
                fh.write(dumps(c.to_dict()) + "\n")
    write_csv(os.path.join(outdir, "measures.csv"), *measure_rows(traj, curves))
    for t in cfg.snapshots:
        if traj.t0 <= t <= traj.t_end:
            write_csv(os.path.join(outdir, f"profile_t{fmt_time(t)}.csv"), *profile_rows(traj.sample(t)))
    return curves


# ---- reader -------------------------------------------------------------------

def load_trajectory(outdir: str):
    """Rebuild (trajectory, config) from a run directory."""
    for name in FILES:
        if not os.path.exists(os.path.join(outdir, name)):
            raise IoError(f"{outdir}: missing {name}")
    with open(os.path.join(outdir, "config.txt"), encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    with open(os.path.join(outdir, "meta.json"), encoding="utf-8") as fh:
        meta = json.load(fh)
    if meta.get("schema") != SCHEMA:
        raise SchemaMismatch(f"schema {meta.get('schema')} != {SCHEMA}")
    system = cfg.build_system()
    if system.n != meta["n"]:
        raise SchemaMismatch("system dimension differs from the stored run")
    eng = dict(meta["engine"])
    eng["window"] = tuple(eng["window"])
    config = EngineConfig(**eng)
    fronts: Dict[int, Front] = {}
    with open(os.path.join(outdir, "fronts.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            d = json.loads(line)
            fronts[d["id"]] = Front(
                d["id"], d["family"], d["kind"], d["size"], d["speed"], np.array(d["uL"]), np.array(d["uR"]),
                d["sig0"], d["sig1"], d["birth"], d["t_birth"], [tuple(s) for s in d["segs"]],
                d["death"], _f(d["t_death"]),
            )
    nodes: List[Node] = []
    with open(os.path.join(outdir, "nodes.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            d = json.loads(line)
            parts = [(p[0], list(p[1]), list(p[2])) for p in d.pop("parts", [])]
            atoms = [tuple(a) for a in d.pop("source_atoms", [])]
            nodes.append(Node(**d, parts=parts, source_atoms=atoms))
    series = []
    n = system.n
    for r in read_csv(os.path.join(outdir, "functionals.csv")):
        series.append({
            "t": float(r["t"]), "V": float(r["V"]), "Q": float(r["Q"]), "Upsilon": float(r["Upsilon"]),
            "TV": float(r["TV"]), "mass": np.array([float(r[f"mass_{k + 1}"]) for k in range(n)]),
            "n_fronts": int(r["n_fronts"]), "np_strength": float(r["np_strength"]),
        })
    fl = [(t, np.array(s)) for t, s in meta["far_left_log"]]
    traj = Trajectory(system, config, fronts, nodes, series, meta["t0"], meta["t_end"], fl, meta["lam_hat"])
    traj.meta.update(meta.get("run", {}))
    traj.meta["beta"] = meta["beta"]
    return traj, cfg
