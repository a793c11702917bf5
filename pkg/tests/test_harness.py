import filecmp
import os

import numpy as np
import pytest

from ftbalance.errors import ConfigError, IoError, SchemaMismatch, UnknownSystem
from ftbalance.harness import catalog, data
from ftbalance.harness.cli import main
from ftbalance.harness.config import parse_config
from ftbalance.harness.io import dumps, load_trajectory
from ftbalance.harness.runner import run, simulate

TWO_SHOCKS = """\
system=burgers
eps=0.05
T=2
window=-3,3
datum=steps
datum.x=-1,0
datum.states=2,1,0
"""


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---- config --------------------------------------------------------------------------

def test_parse_roundtrip():
    cfg = parse_config(TWO_SHOCKS + "# comment\n\nsystem.damping=0.5\n")
    assert cfg.eps == 0.05 and cfg.window == (-3.0, 3.0) and cfg.system_params == {"damping": 0.5}
    again = parse_config(cfg.canonical())
    assert again.canonical() == cfg.canonical() and again.hash() == cfg.hash()


@pytest.mark.parametrize("text", [
    "system=burgers\neps=0.1\n",                              # missing T
    "system=burgers\neps=0.1\nT=1\nbogus=3\n",                # unknown key
    "system=burgers\neps=0.1\nT=1\neps=0.2\n",                # duplicate
    "system=nope\neps=0.1\nT=1\n",                            # unknown system
    "system=burgers\neps=0.1\nT=1\ntau=0.2\n",                # tau > eps
    "system=burgers\neps=0.1\nT=1\nsystem.zeta=1\n",          # bad system parameter
    "system=burgers\neps=0.1\nT=1\ndatum=step\ndatum.q=1\n",  # bad datum key
    "system=burgers\neps=0.1\nT=1\nwindow=1,0\n",             # empty window
    "system=burgers\neps=0.1\nT=1\nbeta=0.01\n",              # beta below the relation bound
    "system=burgers\neps=0.1\nT=1\nlam_hat=0.5\n",            # lam_hat below the max speed
    "system=burgers\neps=0.1\nT=1\nmode=fast\n",
    "system=burgers\neps=0.1\nT\n",
])
def test_parse_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


# ---- data -----------------------------------------------------------------------------

def test_cantor_points_level_two():
    assert data.cantor_points(2) * 9 == pytest.approx([1, 2, 7, 8])
    with pytest.raises(ValueError):
        data.cantor_points(-1)


def test_cantor_datum():
    d0 = data.cantor_datum(0, 1.0)
    assert d0.x.tolist() == [0.5] and d0.total_variation() == pytest.approx(1.0)
    d2 = data.cantor_datum(2, 0.8)
    assert np.diff(d2.states[:, 0]) == pytest.approx([0.2] * 4)
    assert d2.total_variation() == pytest.approx(0.8)
    assert data.cantor_datum(3, 0.0).x.size == 0


def test_quantize_levels():
    f = data.PiecewiseLinear(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.25, 0.0]))
    q = data.quantize_levels(f, 0.1)
    assert q.x == pytest.approx([0.4, 0.8, 1.2, 1.6])
    assert q.total_variation() <= f.total_variation()
    assert np.all(np.abs(np.diff(q.states[:, 0])) == pytest.approx(0.1))


# ---- catalog ---------------------------------------------------------------------------

def test_catalog_examples():
    b = catalog.catalog_system("burgers")
    assert b.n == 1 and b.source is None and b.flux(np.array([2.0]))[0] == 2.0
    e = catalog.catalog_system("elasticity_damped", {"a": 0.3})
    w = np.array([0.5, 0.2])  # (v, u): strain, velocity
    assert e.n == 2 and e.source(0.0, 0.0, w) == pytest.approx([0.0, -0.06])
    assert e.flux(w) == pytest.approx([-0.2, -(0.5 + 0.5**3)])
    t = catalog.catalog_system("triangular_counterexample")
    assert t.flux(np.array([0.1, 0.2])) == pytest.approx([0.0, (1 + 0.2 + 0.1) * 0.2])
    with pytest.raises(UnknownSystem):
        catalog.catalog_system("cattaneo")


@pytest.mark.parametrize("name", catalog.catalog_ids())
def test_catalog_runs_clean(name):
    s = catalog.catalog_system(name)
    c = 0.5 * (s.lo + s.hi)
    if name == "elasticity_damped":
        c = np.array([0.3, 0.0])  # keep v away from the inflection of sigma
    d = data.random_step_datum(np.random.default_rng(0), 4, 0.1, (-1, 1), c)
    from ftbalance.fracstep import BalanceConfig, run_balance
    from ftbalance.harness.runner import rh_violations

    tr = run_balance(s, d, BalanceConfig(eps=0.05, tau=0.05, T=0.5))
    assert rh_violations(tr) == []


# ---- run / persistence -------------------------------------------------------------------

def test_two_shock_run(tmp_path):
    out = run(parse_config(TWO_SHOCKS), str(tmp_path / "a"))
    assert out.ok and out.report["nodes"] == 3
    traj, _ = load_trajectory(out.outdir)
    assert [n.kind for n in traj.nodes].count("interaction") == 1


def test_constant_datum_run(tmp_path):
    cfg = parse_config("system=burgers\neps=0.1\nT=1\ndatum=constant\ndatum.state=0.3\n")
    out = run(cfg, str(tmp_path / "c"))
    assert out.report["nodes"] == 0


def test_node_count_arithmetic():
    cfg = parse_config("system=elasticity_damped\neps=0.05\ntau=0.05\nT=0.5\ndatum=step\n"
                       "datum.uL=0.3,0.05\ndatum.uR=0.35,0.0\n")
    tr = simulate(cfg)
    k = [n.kind for n in tr.nodes]
    assert k.count("update") == 10
    assert len(k) == k.count("interaction") + k.count("birth") + k.count("update")


def test_replay_is_byte_identical(tmp_path):
    cfg = parse_config(TWO_SHOCKS + "snapshots=0.5,1\n")
    a = run(cfg, str(tmp_path / "a"))
    b = run(cfg, str(tmp_path / "b"))
    assert a.files == b.files
    match, mismatch, errors = filecmp.cmpfiles(a.outdir, b.outdir, a.files, shallow=False)
    assert mismatch == [] and errors == []


def test_load_roundtrip(tmp_path):
    cfg = parse_config("system=elasticity_damped\neps=0.05\ntau=0.025\nT=0.5\ndatum=random_steps\n"
                       "datum.center=0.3,0\ndatum.tv=0.2\nseed=3\n")
    tr = simulate(cfg)
    run(cfg, str(tmp_path / "r"))
    back, cfg2 = load_trajectory(str(tmp_path / "r"))
    assert cfg2.hash() == cfg.hash()
    for t in (0.0, 0.13, 0.25, 0.5):
        p, q = tr.sample(t), back.sample(t)
        assert np.array_equal(p.x, q.x) and np.array_equal(p.states, q.states)
    assert [dumps(n.to_dict()) for n in tr.nodes] == [dumps(n.to_dict()) for n in back.nodes]


def test_load_errors(tmp_path):
    with pytest.raises(IoError):
        load_trajectory(str(tmp_path))
    out = run(parse_config(TWO_SHOCKS), str(tmp_path / "a"))
    meta = os.path.join(out.outdir, "meta.json")
    text = open(meta).read().replace('"schema":1', '"schema":99')
    open(meta, "w").write(text)
    with pytest.raises(SchemaMismatch):
        load_trajectory(out.outdir)


# ---- CLI ---------------------------------------------------------------------------------

def test_cli_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, TWO_SHOCKS)
    d = str(tmp_path / "out")
    assert main(["run", "--config", good, "--out", d]) == 0
    assert main(["diagnose", "--traj", d, "--check", "all"]) == 0
    assert os.path.exists(os.path.join(d, "oleinik.csv")) and os.path.exists(os.path.join(d, "sbv.json"))
    assert main(["export", "--traj", d, "--at", "1", "--what", "waves"]) == 0
    assert os.path.exists(os.path.join(d, "waves_t1.csv"))
    bad = _write(tmp_path, "system=burgers\neps=0.1\n", "bad.cfg")
    assert main(["run", "--config", bad]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["diagnose", "--traj", str(tmp_path / "missing")]) == 1
    fan = "system=burgers\neps=0.05\nT=1\ndatum=step\ndatum.uL=0\ndatum.uR=1\nC=1e-9\n"
    strict = _write(tmp_path, fan, "strict.cfg")
    d2 = str(tmp_path / "strict")
    assert main(["run", "--config", strict, "--out", d2]) == 0
    assert main(["diagnose", "--traj", d2, "--check", "oleinik"]) == 2


def test_cli_sweep(tmp_path):
    cfg = _write(tmp_path, "system=burgers\neps=0.04\nT=1\nwindow=-2,3\ndatum=random_pl\ndatum.tv=0.5\nseed=1\n")
    assert main(["sweep", "--config", cfg, "--levels", "3", "--out", str(tmp_path / "sw")]) == 0
    assert os.path.exists(tmp_path / "sw" / "sweep.csv")
    assert main(["sweep", "--config", cfg, "--levels", "0"]) == 1
