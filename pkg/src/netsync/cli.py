"""Command-line front end.

Every subcommand writes its artifacts into one output directory, chosen by
``--out``, else the config's ``output.dir``, else ``$NETSYNC_OUT``, else
``./netsync_out``. Exit codes: 0 success, 2 bad config or arguments,
3 numerical blow-up, 4 no limit cycle.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from netsync import config as cfgmod
from netsync.analysis import (
    DegenerateNodeError,
    WindowTooShortError,
    detect_sync,
    find_equilibrium,
    phase_differences,
    series_to_csv,
    sync_error,
)
from netsync.config import ConfigError
from netsync.floquet import evaluate_network_msf, floquet_multipliers, monodromy, msf_sweep
from netsync.graph import (
    Graph,
    GraphError,
    build_scale_free,
    build_star,
    discs_bound_left_half_plane,
    eigendecompose,
    gershgorin_discs,
    in_disc_union,
    laplacian,
    load_graph,
    matrix_from_csv,
    matrix_to_csv,
)
from netsync.integrate import (
    BlowUpError,
    NoPeriodError,
    estimate_period,
    integrate,
    settle_to_limit_cycle,
)
from netsync.linalg import eigvals
from netsync.models import KuramotoStarParams, kuramoto_reduced_jacobian

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_NO_CYCLE = 4

DEFAULT_OUT = "netsync_out"


class UsageError(Exception):
    """Bad command-line arguments (exit 2)."""


# --- output helpers -------------------------------------------------------------

def _jsonable(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


class Artifacts:
    """Collects file contents and writes them together at the end."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def add_json(self, name: str, obj: Any) -> None:
        self.add(name, dumps(obj))

    def write(self) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            (self.out_dir / name).write_text(text, encoding="utf-8", newline="\n")


def resolve_out(args: argparse.Namespace, cfg: dict | None = None) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if cfg is not None and cfg.get("output", {}).get("dir"):
        return Path(cfg["output"]["dir"])
    return Path(os.environ.get("NETSYNC_OUT") or DEFAULT_OUT)


def gnuplot_script(csv_name: str, columns: Sequence[str], title: str, ylabel: str = "") -> str:
    """A gnuplot script that plots every named column of ``csv_name`` against the first."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        "set xlabel 't'" if columns and columns[0] == "t" else f"set xlabel '{columns[0]}'",
    ]
    if ylabel:
        lines.append(f"set ylabel '{ylabel}'")
    parts = [f"'{csv_name}' using 1:{k + 1} with lines" for k in range(1, len(columns))]
    lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"


# --- config handling ------------------------------------------------------------

def _parse_set(items: Sequence[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def load_run_config(args: argparse.Namespace) -> dict:
    """Read ``--config`` and apply command-line overrides."""
    path = args.config
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    overrides = _parse_set(getattr(args, "set", None))
    for flag, key in (("seed", "seed"), ("dt", "integrator.dt"), ("t_end", "integrator.t_end"),
                      ("transient", "integrator.transient"), ("coupling", "coupling")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return cfgmod.resolve(raw, overrides)


# --- subcommands ------------------------------------------------------------------

def _graph_from_args(args: argparse.Namespace) -> Graph:
    chosen = [x for x in (args.star, args.edges, args.scale_free) if x is not None]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --star, --edges, --scale-free")
    if args.star is not None:
        return build_star(args.star)
    if args.edges is not None:
        try:
            return load_graph(args.edges)
        except OSError as exc:
            raise UsageError(f"cannot read {args.edges}: {exc.strerror}") from None
    try:
        n, m = (int(x) for x in args.scale_free.split(","))
    except ValueError:
        raise UsageError("--scale-free expects N,M") from None
    return build_scale_free(n, m, args.seed if args.seed is not None else 0)


def cmd_topo(args: argparse.Namespace) -> int:
    g = _graph_from_args(args)
    L = laplacian(g)
    spec = eigendecompose(L)
    art = Artifacts(resolve_out(args))
    art.add_json("graph.json", g.to_json())
    art.add("laplacian.csv", matrix_to_csv(L.matrix))
    art.add_json("spectrum.json", {"graph": g.to_json(), **spec.to_json()})
    art.write()
    print("eigenvalues: " + " ".join(f"{abs(x) if abs(x) < 5e-7 else x:.6f}"
                                     for x in spec.eigenvalues))
    return EXIT_OK


def _default_pairs(n_nodes: int) -> list[tuple[int, int]]:
    return list(combinations(range(n_nodes), 2))


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_run_config(args)
    spec = cfgmod.build_spec(cfg)
    x0 = cfgmod.initial_state(cfg, spec)
    traj = integrate(spec, x0, cfgmod.build_integrator(cfg))
    an, out = cfg["analysis"], cfg["output"]
    stride = out["stride"]
    art = Artifacts(resolve_out(args, cfg))
    art.add("traj.csv", traj.to_csv(stride=stride))

    report: dict[str, Any] = {"config": cfg}
    n = spec.n_nodes
    if n > 1 and spec.model != "kuramoto_reduced":
        hub = an["hub"]
        if hub >= n:
            raise ConfigError(f"analysis.hub={hub} but the model has {n} nodes")
        try:
            verdict = detect_sync(traj, hub, an["tolerance"], an.get("peripherals"))
            report.update(verdict.to_json())
        except (DegenerateNodeError, WindowTooShortError) as exc:
            report.update({"classification": None, "reason": str(exc)})
        pairs = [tuple(p) for p in an.get("pairs", _default_pairs(n))]
        try:
            diffs = phase_differences(traj, pairs)
            cols = {f"d{i}_{j}": v for (i, j), v in diffs.items()}
            art.add("phase_diffs.csv", series_to_csv(traj.times, cols, stride))
            if out["gnuplot"]:
                art.add("phase_diffs.gp", gnuplot_script("phase_diffs.csv", ["t", *cols],
                                                         "phase differences", "rad"))
        except DegenerateNodeError as exc:
            report["phase_diffs_error"] = str(exc)
        if not spec.is_phase_model:
            err = sync_error(traj, range(n))
            art.add("sync_error.csv", series_to_csv(traj.times, {"sync_error": err}, stride))
            report["sync_error_final"] = float(err[-1])
            report["sync_error_max_post_transient"] = float(err[traj.post_transient].max())
    else:
        report["classification"] = None
        report["reason"] = "synchronization needs a multi-node model"
    if out["gnuplot"]:
        cols = ["t"] + [f"x{k}" for k in range(spec.state_dim)]
        art.add("traj.gp", gnuplot_script("traj.csv", cols, spec.model))
    art.add_json("verdict.json", report)
    art.write()
    print(f"verdict: {report.get('classification')}")
    if "sync_error_final" in report:
        print(f"sync_error (final): {report['sync_error_final']:.3e}")
    return EXIT_OK


def _settle(cfg: dict, spec):
    x0 = cfgmod.initial_state(cfg, spec)
    return settle_to_limit_cycle(spec, x0, cfgmod.build_integrator(cfg),
                                 cfg["analysis"]["component"], cfg["analysis"]["cycle_tol"])


def cmd_floquet(args: argparse.Namespace) -> int:
    cfg = load_run_config(args)
    spec = cfgmod.build_spec(cfg)
    if spec.model.startswith("kuramoto"):
        raise ConfigError("floquet analysis needs an oscillator with a limit cycle, not a phase model")
    cycle = _settle(cfg, spec)
    icfg = cfgmod.build_integrator(cfg)
    mono = monodromy(spec.jacobian, cycle, spec, icfg)
    res = floquet_multipliers(mono)
    art = Artifacts(resolve_out(args, cfg))
    art.add_json("floquet.json", {
        "config": cfg,
        "period": cycle.period,
        "anchor": cycle.anchor,
        "return_error": cycle.return_error,
        "liouville_error": mono.liouville_error,
        "monodromy": mono.matrix,
        **res.to_json(),
    })
    art.write()
    print(f"period: {cycle.period:.6f}")
    print("multipliers: " + ", ".join(f"{z.real:+.6f}{z.imag:+.6f}i" for z in res.multipliers))
    print(f"verdict: {res.verdict}")
    return EXIT_OK


def cmd_msf(args: argparse.Namespace) -> int:
    cfg = load_run_config(args)
    spec = cfgmod.build_spec(cfg)
    if not spec.model.startswith("fhn"):
        raise ConfigError("msf sweeps are defined for the FitzHugh-Nagumo models")
    if args.steps < 2 or not args.gamma_min < args.gamma_max:
        raise UsageError("need --steps >= 2 and --gamma-min < --gamma-max")
    if not all(math.isfinite(x) for x in (args.gamma_min, args.gamma_max)):
        raise UsageError("gamma bounds must be finite")
    if args.graph is not None and args.phi is None:
        raise UsageError("--graph needs --phi")
    if args.graph is not None:
        graph = load_graph(args.graph)
    elif args.phi is not None or "graph" in cfg:
        if "graph" not in cfg:
            raise UsageError("--phi needs --graph (or a graph in the config)")
        graph = cfgmod.build_graph(cfg["graph"])
    else:
        graph = None
    phi = args.phi if args.phi is not None else cfg["coupling"]
    iso = spec.isolated()
    x0 = cfgmod.initial_state(cfg, iso) if spec.model == "fhn_single" else np.zeros(2)
    curve = msf_sweep(iso.params, (args.gamma_min, args.gamma_max), args.steps,
                      cfgmod.build_integrator(cfg), x0, workers=args.workers)
    resolved = {**cfg, "msf": {"gamma_min": args.gamma_min, "gamma_max": args.gamma_max,
                               "steps": args.steps}}
    art = Artifacts(resolve_out(args, cfg))
    art.add("msf.csv", curve.to_csv())
    art.add_json("msf.json", {"config": resolved, **curve.to_json()})
    if cfg["output"]["gnuplot"]:
        art.add("msf.gp", gnuplot_script("msf.csv", ["gamma", "max_modulus", "msf"],
                                         "master stability function"))
    if graph is not None:
        spectrum = eigendecompose(laplacian(graph))
        try:
            report = evaluate_network_msf(curve, spectrum, phi)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        art.add_json("network_report.json", {"config": resolved, "graph": graph.to_json(),
                                             **report.to_json()})
        print(f"network verdict: {report.verdict}")
    art.write()
    for v in curve.values:
        print(f"{v.gamma:+.4f} {v.max_floquet_modulus:.6g} {v.msf:+.6g}"
              + (" diverged" if v.diverged else ""))
    return EXIT_OK


def cmd_gershgorin(args: argparse.Namespace) -> int:
    try:
        text = Path(args.matrix).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {args.matrix}: {exc}") from None
    try:
        M = matrix_from_csv(text)
        discs = gershgorin_discs(M, args.axis)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ev = [complex(z) for z in eigvals(M)]
    verdict = discs_bound_left_half_plane(discs)
    art = Artifacts(resolve_out(args))
    art.add_json("gershgorin.json", {
        "config": {"matrix": str(args.matrix), "axis": args.axis},
        "matrix": M,
        "discs": [d.to_json() for d in discs],
        "left_half_plane": verdict,
        "eigenvalues": [[z.real, z.imag] for z in ev],
        "eigenvalues_in_union": all(in_disc_union(z, discs) for z in ev),
    })
    art.write()
    print(f"left half-plane: {str(verdict).lower()}")
    return EXIT_OK


def cmd_wien(args: argparse.Namespace) -> int:
    cfg = load_run_config(args)
    if cfg["model"] != "wien_bridge":
        raise ConfigError("wien expects a wien_bridge config")
    spec = cfgmod.build_spec(cfg)
    p = spec.params
    x0 = cfgmod.initial_state(cfg, spec)
    icfg = cfgmod.build_integrator(cfg)
    traj = integrate(spec, x0, icfg)
    if p.g0 <= 3.0:
        raise NoPeriodError(f"g0 = {p.g0:g} <= 3: the loop gain cannot sustain oscillation")
    cycle = _settle(cfg, spec)
    est = estimate_period(traj)
    v = traj.states[traj.post_transient, 0]
    result = {
        "config": cfg,
        "frequency_hz": 1.0 / cycle.period,
        "natural_frequency_hz": p.natural_frequency_hz,
        "amplitude": 0.5 * float(v.max() - v.min()),
        "weakly_nonlinear_amplitude": p.weakly_nonlinear_amplitude,
        "period": cycle.period,
        "period_spread": est.spread,
    }
    art = Artifacts(resolve_out(args, cfg))
    art.add("traj.csv", traj.to_csv(stride=cfg["output"]["stride"]))
    art.add_json("wien.json", result)
    if cfg["output"]["gnuplot"]:
        art.add("traj.gp", gnuplot_script("traj.csv", ["t", "x0", "x1"], "wien bridge", "V"))
    art.write()
    print(f"frequency: {result['frequency_hz']:.4f} Hz (RC value {p.natural_frequency_hz:.4f} Hz)")
    print(f"amplitude: {result['amplitude']:.5f} V (averaging value "
          f"{p.weakly_nonlinear_amplitude:.5f} V)")
    return EXIT_OK


# --- reproduce-paper ----------------------------------------------------------------

def canned(name: str) -> Path:
    """Path of a configuration file shipped with the package."""
    return Path(str(resources.files("netsync") / "configs" / name))


def _load_canned(name: str, overrides: dict | None = None) -> dict:
    raw = json.loads(canned(name).read_text(encoding="utf-8"))
    return cfgmod.resolve(raw, overrides)


def _check_kuramoto_jacobian() -> tuple[bool, str, dict]:
    p = KuramotoStarParams.identical(3, 1.0, 1.0, 1.0, 1.0)
    eq = find_equilibrium(p, (6.0, 6.0, 6.0))
    ev = sorted(z.real for z in eq.jacobian_eigenvalues)
    J = kuramoto_reduced_jacobian(np.full(3, 2 * np.pi), p)
    ok = bool(np.array_equal(J, -np.ones((3, 3)) - np.eye(3))) and np.allclose(
        ev, [-4.0, -1.0, -1.0], atol=1e-9)
    return ok, "eigenvalues " + ", ".join(f"{x:.9f}" for x in ev), eq.to_json()


def _check_gershgorin() -> tuple[bool, str, dict]:
    M = matrix_from_csv(canned("kuramoto_jacobian.csv").read_text(encoding="utf-8"))
    discs = gershgorin_discs(M, "row")
    ev = [complex(z) for z in eigvals(M)]
    inside = all(in_disc_union(z, discs) for z in ev)
    lhp = discs_bound_left_half_plane(discs)
    return lhp and inside, f"left half-plane {lhp}, eigenvalues inside {inside}", {
        "discs": [d.to_json() for d in discs]}


def _check_kuramoto_sim() -> tuple[bool, str, dict]:
    cfg = _load_canned("kuramoto_star.json")
    spec = cfgmod.build_spec(cfg)
    traj = integrate(spec, cfgmod.initial_state(cfg, spec), cfgmod.build_integrator(cfg))
    v = detect_sync(traj, 0, cfg["analysis"]["tolerance"])
    return v.classification == "complete_sync", v.classification, v.to_json()


def _check_fhn_star() -> tuple[bool, str, dict]:
    cfg = _load_canned("fhn_star.json")
    spec = cfgmod.build_spec(cfg)
    cycle = _settle(cfg, spec)
    mono = monodromy(spec.jacobian, cycle, spec, cfgmod.build_integrator(cfg))
    res = floquet_multipliers(mono)
    near_one = sum(abs(z - 1.0) <= 0.05 for z in res.multipliers)
    ok = near_one == 1 and res.max_nontrivial_modulus < 1.0
    return ok, (f"{near_one} multiplier(s) near 1, max other modulus "
                f"{res.max_nontrivial_modulus:.4f}"), res.to_json()


def _check_spectrum() -> tuple[bool, str, dict]:
    g = load_graph(canned("five_node.json"))
    lam = eigendecompose(laplacian(g)).eigenvalues
    reported = [0.0, 0.8, 2.0, 2.6, 4.4]
    ok = bool(np.all(np.abs(np.asarray(lam) - reported) <= 0.05))
    shown = ", ".join(f"{abs(x) if abs(x) < 5e-5 else x:.4f}" for x in lam)
    return ok, "spectrum " + shown, {"eigenvalues": lam}


def _check_msf(workers: int) -> tuple[bool, str, dict]:
    cfg = _load_canned("fhn_single.json")
    spec = cfgmod.build_spec(cfg)
    curve = msf_sweep(spec.params, (-4.0, 4.0), 81, cfgmod.build_integrator(cfg),
                      cfgmod.initial_state(cfg, spec), workers=workers)
    g, mod = curve.gammas, curve.max_modulus
    msf = curve.msf
    k0 = int(np.argmin(np.abs(g)))
    u2 = math.exp(curve.log_modulus_at(0.506))
    report = evaluate_network_msf(curve, eigendecompose(laplacian(load_graph(
        canned("five_node.json")))), 0.115)
    checks = {
        "msf(0) ~ 0": abs(msf[k0]) <= 5e-3,
        "msf < 0 for gamma > 0": bool(np.all(msf[g > 0] < 0)),
        "modulus > 1 for gamma < -0.05": bool(np.all(mod[g < -0.05] > 1)),
        "modulus at 0.506 in 0.24 +- 0.10": abs(u2 - 0.24) <= 0.10,
        "network verdict stable": report.stable,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = f"msf(0)={msf[k0]:.2e}, modulus(0.506)={u2:.4g}, network {report.verdict}"
    if failed:
        detail += "; failed: " + "; ".join(failed)
    return not failed, detail, {"checks": checks, "modulus_at_0.506": u2}


def _check_network() -> tuple[bool, str, dict]:
    cfg = _load_canned("fhn_network.json")
    spec = cfgmod.build_spec(cfg)
    traj = integrate(spec, cfgmod.initial_state(cfg, spec), cfgmod.build_integrator(cfg))
    err = sync_error(traj, range(spec.n_nodes))
    return bool(err[-1] < 1e-3), f"final sync_error {err[-1]:.2e}", {"final": err[-1]}


def _check_wien() -> tuple[bool, str, dict]:
    cfg = _load_canned("wien.json")
    spec = cfgmod.build_spec(cfg)
    cycle = _settle(cfg, spec)
    traj = integrate(spec, cfgmod.initial_state(cfg, spec), cfgmod.build_integrator(cfg))
    v = traj.states[traj.post_transient, 0]
    amp = 0.5 * float(v.max() - v.min())
    f = 1.0 / cycle.period
    p = spec.params
    ok = abs(f - 159.155) <= 0.05 * 159.155 and abs(
        amp - p.weakly_nonlinear_amplitude) <= 0.10 * p.weakly_nonlinear_amplitude
    return ok, f"f={f:.3f} Hz, amplitude={amp:.4f} V", {"frequency_hz": f, "amplitude": amp}


def cmd_reproduce(args: argparse.Namespace) -> int:
    checks: list[tuple[str, Callable[[], tuple[bool, str, dict]]]] = [
        ("kuramoto equilibrium Jacobian", _check_kuramoto_jacobian),
        ("gershgorin discs", _check_gershgorin),
        ("kuramoto star sync", _check_kuramoto_sim),
        ("fhn star floquet", _check_fhn_star),
        ("five-node laplacian spectrum", _check_spectrum),
        ("fhn master stability function", lambda: _check_msf(args.workers)),
        ("five-node fhn network sync", _check_network),
        ("wien-bridge frequency/amplitude", _check_wien),
    ]
    rows, results = [], {}
    for name, fn in checks:
        try:
            ok, detail, data = fn()
        except (BlowUpError, NoPeriodError) as exc:
            ok, detail, data = False, f"{type(exc).__name__}: {exc}", {}
        rows.append((name, ok, detail))
        results[name] = {"pass": ok, "detail": detail, "data": data}
        print(f"{'PASS' if ok else 'FAIL'}  {name:34s} {detail}", flush=True)
    art = Artifacts(resolve_out(args))
    art.add_json("reproduce.json", results)
    art.write()
    n_pass = sum(ok for _, ok, _ in rows)
    print(f"{n_pass}/{len(rows)} checks passed")
    return EXIT_OK if n_pass == len(rows) else EXIT_FAILED_CHECKS


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netsync", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", help="output directory")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--config", required=True, help="run configuration (JSON)")
    run.add_argument("--seed", type=int)
    run.add_argument("--dt", type=float)
    run.add_argument("--t-end", type=float, dest="t_end")
    run.add_argument("--transient", type=float)
    run.add_argument("--coupling", type=float)
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config key, e.g. --set analysis.tolerance=1e-3")

    p = sub.add_parser("topo", parents=[out], help="graph, Laplacian and spectrum")
    p.add_argument("--star", type=int, metavar="N")
    p.add_argument("--edges", metavar="FILE")
    p.add_argument("--scale-free", metavar="N,M", dest="scale_free")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_topo)

    p = sub.add_parser("simulate", parents=[out, run], help="integrate and classify sync")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("floquet", parents=[out, run], help="Floquet multipliers of a limit cycle")
    p.set_defaults(func=cmd_floquet)

    p = sub.add_parser("msf", parents=[out, run], help="master stability function sweep")
    p.add_argument("--gamma-min", type=float, required=True, dest="gamma_min")
    p.add_argument("--gamma-max", type=float, required=True, dest="gamma_max")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--graph", metavar="FILE")
    p.add_argument("--phi", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_msf)

    p = sub.add_parser("gershgorin", parents=[out], help="Gershgorin discs of a matrix")
    p.add_argument("--matrix", required=True, metavar="FILE.csv")
    p.add_argument("--axis", choices=("row", "column"), default="row")
    p.set_defaults(func=cmd_gershgorin)

    p = sub.add_parser("wien", parents=[out, run], help="Wien-bridge oscillator")
    p.set_defaults(func=cmd_wien)

    p = sub.add_parser("reproduce-paper", parents=[out], help="run all canned checks")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except NoPeriodError as exc:
        print(f"error: no limit cycle: {exc}", file=sys.stderr)
        return EXIT_NO_CYCLE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
