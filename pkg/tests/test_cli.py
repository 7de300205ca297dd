from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from netsync import cli
from netsync import config as cfgmod
from netsync.cli import canned, main
from netsync.config import ConfigError


def run(*argv) -> int:
    return main([str(a) for a in argv])


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


def load(path):
    return json.loads(path.read_text())


# --- topo ---------------------------------------------------------------------

def test_topo_five_node_edges(tmp_path, capsys):
    assert run("topo", "--edges", canned("five_node.json"), "--out", tmp_path) == 0
    spec = load(tmp_path / "spectrum.json")
    assert np.allclose(spec["eigenvalues"], [0.0, 0.829914, 2.0, 2.688892, 4.481194], atol=1e-6)
    assert "eigenvalues:" in capsys.readouterr().out
    lap = (tmp_path / "laplacian.csv").read_text()
    assert lap.startswith("c0,c1,c2,c3,c4\n2.0,-1.0,0.0,-1.0,0.0\n")
    assert load(tmp_path / "graph.json")["n"] == 5


def test_topo_star(tmp_path):
    assert run("topo", "--star", 3, "--out", tmp_path) == 0
    assert np.allclose(load(tmp_path / "spectrum.json")["eigenvalues"], [0, 1, 1, 4], atol=1e-12)


@pytest.mark.parametrize("args", [["--star", "0"], ["--scale-free", "5"], ["--scale-free", "3,5"],
                                  [], ["--star", "2", "--scale-free", "10,2"],
                                  ["--edges", "missing.json"]])
def test_topo_bad_arguments_exit_2(tmp_path, args):
    assert run("topo", *args, "--out", tmp_path) == 2


def test_topo_scale_free_is_seeded(tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run("topo", "--scale-free", "30,2", "--seed", 4, "--out", a) == 0
    assert run("topo", "--scale-free", "30,2", "--seed", 4, "--out", b) == 0
    assert run("topo", "--scale-free", "30,2", "--seed", 5, "--out", c) == 0
    assert (a / "graph.json").read_bytes() == (b / "graph.json").read_bytes()
    assert (a / "graph.json").read_bytes() != (c / "graph.json").read_bytes()


def test_out_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NETSYNC_OUT", str(tmp_path / "env"))
    assert run("topo", "--star", 2) == 0
    assert (tmp_path / "env" / "spectrum.json").exists()
    assert run("topo", "--star", 2, "--out", tmp_path / "flag") == 0
    assert (tmp_path / "flag" / "spectrum.json").exists()


# --- simulate -------------------------------------------------------------------

def test_simulate_kuramoto_star(tmp_path):
    assert run("simulate", "--config", canned("kuramoto_star.json"), "--out", tmp_path) == 0
    verdict = load(tmp_path / "verdict.json")
    assert verdict["classification"] == "complete_sync"
    assert verdict["config"]["seed"] == 7
    assert verdict["config"]["integrator"]["method"] == "rk4"
    header = (tmp_path / "phase_diffs.csv").read_text().splitlines()[0]
    assert header == "t,d0_1,d0_2,d0_3,d1_2,d1_3,d2_3"
    assert (tmp_path / "traj.csv").read_text().startswith("t,x0,x1,x2,x3\n")


def test_simulate_is_byte_for_byte_deterministic(tmp_path):
    for name in ("a", "b"):
        assert run("simulate", "--config", canned("kuramoto_star.json"), "--out",
                   tmp_path / name) == 0
    for f in ("traj.csv", "verdict.json", "phase_diffs.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_simulate_five_node_network(tmp_path):
    assert run("simulate", "--config", canned("fhn_network.json"), "--out", tmp_path) == 0
    verdict = load(tmp_path / "verdict.json")
    assert verdict["sync_error_final"] < 1e-3
    assert (tmp_path / "sync_error.csv").read_text().startswith("t,sync_error\n")


def test_flag_and_set_overrides(tmp_path):
    out = tmp_path / "o"
    assert run("simulate", "--config", canned("kuramoto_star.json"), "--out", out,
               "--seed", 11, "--t-end", 40, "--set", "analysis.tolerance=0.05",
               "--set", "output.gnuplot=true") == 0
    cfg = load(out / "verdict.json")["config"]
    assert cfg["seed"] == 11 and cfg["integrator"]["t_end"] == 40.0
    assert cfg["analysis"]["tolerance"] == 0.05
    gp = (out / "phase_diffs.gp").read_text()
    assert "set datafile separator ','" in gp and "phase_diffs.csv" in gp


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = load(canned("harmonic.json"))
    cfg["output"] = {"dir": "from_config"}
    path = write_json(tmp_path / "h.json", cfg)
    assert run("simulate", "--config", path) == 0
    assert (tmp_path / "from_config" / "verdict.json").exists()


@pytest.mark.parametrize(
    "mutate",
    [
        lambda c: c["integrator"].update(dt=0.0),
        lambda c: c["integrator"].update(dt=-0.01),
        lambda c: c.update(bogus=1),
        lambda c: c["params"].update(bogus=1),
        lambda c: c.update(model="lorenz"),
        lambda c: c["params"].pop("incoming"),
        lambda c: c.update(initial={"state": [0.0, 1.0]}),
        lambda c: c.update(graph={"star": 3}),
        lambda c: c.update(seed="seven"),
        lambda c: c["analysis"].update(hub=9),
    ],
)
def test_simulate_config_errors_exit_2(tmp_path, mutate):
    cfg = load(canned("kuramoto_star.json"))
    mutate(cfg)
    path = write_json(tmp_path / "c.json", cfg)
    assert run("simulate", "--config", path, "--out", tmp_path / "o") == 2
    assert not (tmp_path / "o").exists()


def test_malformed_and_missing_files_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ model: ")
    assert run("simulate", "--config", bad, "--out", tmp_path) == 2
    assert run("simulate", "--config", tmp_path / "nope.json", "--out", tmp_path) == 2
    binary = tmp_path / "bin.json"
    binary.write_bytes(b"\xff\xfe\x00")
    assert run("simulate", "--config", binary, "--out", tmp_path) == 2
    assert run("simulate", "--config", canned("harmonic.json"), "--set", "novalue") == 2


def test_blow_up_exits_3(tmp_path):
    cfg = {"model": "harmonic", "params": {"omega": 1e4},
           "integrator": {"dt": 1e-3, "t_end": 1.0, "transient": 0.0},
           "initial": {"state": [1.0, 0.0]}}
    path = write_json(tmp_path / "c.json", cfg)
    assert run("simulate", "--config", path, "--out", tmp_path / "o") == 3
    assert not (tmp_path / "o").exists()


# --- floquet ----------------------------------------------------------------------

def test_floquet_harmonic(tmp_path, capsys):
    assert run("floquet", "--config", canned("harmonic.json"), "--out", tmp_path) == 0
    res = load(tmp_path / "floquet.json")
    mult = [complex(*z) for z in res["multipliers"]]
    assert np.allclose(mult, [1.0, 1.0], atol=1e-8)
    assert res["liouville_error"] < 1e-4
    assert res["config"]["model"] == "harmonic"
    assert "verdict: marginal" in capsys.readouterr().out


def test_floquet_without_cycle_exits_4(tmp_path):
    assert run("floquet", "--config", canned("fhn_single.json"), "--set", "params.drive=0",
               "--t-end", 150, "--transient", 100, "--dt", 0.01, "--out", tmp_path) == 4


def test_floquet_rejects_phase_model(tmp_path):
    assert run("floquet", "--config", canned("kuramoto_star.json"), "--out", tmp_path) == 2


# --- msf ----------------------------------------------------------------------------

def test_msf_small_grid_with_network(tmp_path):
    rc = run("msf", "--config", canned("fhn_single.json"), "--gamma-min", -0.6,
             "--gamma-max", 0.6, "--steps", 3, "--dt", 2e-3, "--t-end", 150, "--transient", 100,
             "--graph", canned("five_node.json"), "--phi", 0.115, "--out", tmp_path)
    assert rc == 0
    rows = (tmp_path / "msf.csv").read_text().splitlines()
    assert rows[0] == "gamma,max_modulus,msf,diverged"
    msf0 = float(rows[2].split(",")[2])
    assert abs(msf0) < 5e-3
    report = load(tmp_path / "network_report.json")
    assert report["verdict"] == "stable"
    assert report["config"]["msf"]["steps"] == 3


def test_msf_records_divergence_in_file(tmp_path):
    rc = run("msf", "--config", canned("fhn_single.json"), "--gamma-min", -3,
             "--gamma-max", 0, "--steps", 2, "--dt", 2e-3, "--t-end", 150, "--transient", 100,
             "--out", tmp_path)
    assert rc == 0
    first = (tmp_path / "msf.csv").read_text().splitlines()[1].split(",")
    assert first[1] == "inf" and first[3] == "true"
    points = load(tmp_path / "msf.json")["points"]
    assert points[0]["max_modulus"] == "inf"


@pytest.mark.parametrize("grid", [["-1", "1", "1"], ["1", "-1", "5"], ["0", "0", "3"],
                                  ["-inf", "1", "3"]])
def test_msf_bad_grid_exits_2(tmp_path, grid):
    lo, hi, n = grid
    assert run("msf", "--config", canned("fhn_single.json"), f"--gamma-min={lo}",
               f"--gamma-max={hi}", "--steps", n, "--out", tmp_path) == 2


def test_msf_graph_needs_phi(tmp_path):
    assert run("msf", "--config", canned("fhn_single.json"), "--gamma-min", -1,
               "--gamma-max", 1, "--steps", 3, "--graph", canned("five_node.json"),
               "--out", tmp_path) == 2


# --- gershgorin --------------------------------------------------------------------

def test_gershgorin_reference_jacobian(tmp_path, capsys):
    assert run("gershgorin", "--matrix", canned("kuramoto_jacobian.csv"), "--out", tmp_path) == 0
    res = load(tmp_path / "gershgorin.json")
    assert res["left_half_plane"] is True and res["eigenvalues_in_union"] is True
    assert res["discs"][0] == {"axis": "row", "center": [-2.0, 0.0], "radius": 2.0}
    assert "left half-plane: true" in capsys.readouterr().out


def test_gershgorin_identity_and_column_axis(tmp_path):
    m = tmp_path / "id.csv"
    m.write_text("1,0,0\n0,1,0\n0,0,1\n")
    assert run("gershgorin", "--matrix", m, "--axis", "column", "--out", tmp_path) == 0
    res = load(tmp_path / "gershgorin.json")
    assert res["left_half_plane"] is False and res["discs"][0]["axis"] == "column"


@pytest.mark.parametrize("text", ["1,2,3\n4,5,6\n", "1,2\n3\n", "a,b\nc,d\n", ""])
def test_gershgorin_bad_matrix_exits_2(tmp_path, text):
    m = tmp_path / "m.csv"
    m.write_text(text)
    assert run("gershgorin", "--matrix", m, "--out", tmp_path) == 2


def test_gershgorin_bad_axis_exits_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("gershgorin", "--matrix", canned("kuramoto_jacobian.csv"), "--axis", "diag")
    assert info.value.code == 2


# --- wien ---------------------------------------------------------------------------

def test_wien_frequency_and_amplitude(tmp_path):
    assert run("wien", "--config", canned("wien.json"), "--out", tmp_path) == 0
    res = load(tmp_path / "wien.json")
    assert abs(res["frequency_hz"] - 159.155) <= 0.05 * 159.155
    oracle = 2 * math.sqrt(0.2)
    assert abs(res["amplitude"] - oracle) <= 0.1 * oracle
    assert res["config"]["params"]["R"] == 1000.0
    assert (tmp_path / "traj.csv").exists()


def test_wien_from_device_values(tmp_path):
    cfg = {"model": "wien_bridge",
           "params": {"R": 1e3, "C": 1e-6, "g0": 3.1, "I_s": 1e-12, "R_f2": 1e4, "n": 1.0,
                      "V_T": 0.025}}
    path = write_json(tmp_path / "w.json", cfg)
    assert run("wien", "--config", path, "--out", tmp_path / "o") == 0
    res = load(tmp_path / "o" / "wien.json")
    k_nl = 8 * 1e-12 * 1e4 / (9 * 0.025**3)
    assert res["weakly_nonlinear_amplitude"] == pytest.approx(2 * math.sqrt(0.1 / k_nl))


def test_wien_below_threshold_exits_4(tmp_path):
    assert run("wien", "--config", canned("wien.json"), "--set", "params.g0=2.5",
               "--out", tmp_path) == 4


@pytest.mark.parametrize("params", [{"g0": 3.2, "k_nl": 1.0},
                                    {"R": 1e3, "C": 1e-6, "g0": 3.2},
                                    {"omega0": 1e3, "R": 1e3, "C": 1e-6, "g0": 3.2, "k_nl": 1},
                                    {"omega0": 1e3, "g0": 3.2, "k_nl": 1.0, "I_s": 1e-12}])
def test_wien_incomplete_parameters_exit_2(tmp_path, params):
    path = write_json(tmp_path / "w.json", {"model": "wien_bridge", "params": params})
    assert run("wien", "--config", path, "--out", tmp_path) == 2


# --- reproduce-paper and module entry point -------------------------------------------

def test_reproduce_table_and_exit_code(tmp_path, monkeypatch, capsys):
    # the expensive checks are exercised in the acceptance suite; stub them here
    monkeypatch.setattr(cli, "_check_fhn_star", lambda: (True, "stub", {}))
    monkeypatch.setattr(cli, "_check_msf", lambda workers: (False, "stub", {}))
    rc = run("reproduce-paper", "--out", tmp_path)
    out = capsys.readouterr().out
    assert rc == 1
    assert "PASS  kuramoto equilibrium Jacobian" in out
    assert "FAIL  fhn master stability function" in out
    results = load(tmp_path / "reproduce.json")
    assert len(results) == 8
    assert results["gershgorin discs"]["pass"] is True


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "netsync", "topo", "--star", "0",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "error" in proc.stderr


def test_config_schema_fills_defaults():
    cfg = cfgmod.resolve({"model": "fhn_single"})
    assert cfg["params"]["d"] == 0.2799991
    assert cfg["integrator"] == {"dt": 1e-3, "t_end": 400.0, "transient": 200.0, "method": "rk4"}
    wien = cfgmod.resolve({"model": "wien_bridge", "params": {"omega0": 500.0, "g0": 3.1,
                                                              "k_nl": 2.0}})
    assert wien["integrator"]["dt"] == pytest.approx(2e-5)
    with pytest.raises(ConfigError):
        cfgmod.resolve({"model": "fhn_single", "integrator": {"dt": "fast"}})


def test_initial_state_modes():
    spec = cfgmod.build_spec(cfgmod.resolve({"model": "fhn_network", "graph": {"star": 2},
                                             "coupling": 0.1}))
    base = {"model": "fhn_network", "seed": 3}
    a = cfgmod.initial_state({**base, "initial": {"uniform": [-1, 1]}}, spec)
    b = cfgmod.initial_state({**base, "initial": {"uniform": [-1, 1]}}, spec)
    assert np.array_equal(a, b) and a.shape == (6,) and np.all(np.abs(a) <= 1)
    c = cfgmod.initial_state({**base, "initial": {"node": [1.0, 2.0], "spread": 0.0}}, spec)
    assert np.array_equal(c, [1, 2, 1, 2, 1, 2])
    with pytest.raises(ConfigError):
        cfgmod.initial_state({**base, "initial": {"uniform": [1, -1]}}, spec)
