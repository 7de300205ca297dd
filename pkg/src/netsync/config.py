"""Run configuration: JSON schema, defaults and construction of model objects.

A run is described by one JSON document::

    {
      "model": "fhn_network",
      "params": {"a": 3, "b": 2, "c": 1, "d": 0.2799991, "drive": 2.1},
      "graph": {"n": 5, "edges": [[0, 1], [0, 3], [1, 2], [1, 4], [3, 4]]},
      "coupling": 0.115,
      "integrator": {"dt": 0.001, "t_end": 400, "transient": 200},
      "initial": {"uniform": [-1, 1]},
      "analysis": {"tolerance": 0.01, "hub": 0},
      "output": {"dir": "out", "stride": 10},
      "seed": 1
    }

See ``SCHEMA`` for every accepted key. Unknown keys are rejected.
"""
from __future__ import annotations

import copy
import json
import math
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from netsync.graph import Graph, GraphError, build_from_edges, build_scale_free, build_star
from netsync.integrate import IntegratorConfig
from netsync.models import (
    MODELS,
    FhnParams,
    HarmonicParams,
    KuramotoStarParams,
    SystemSpec,
    WienParams,
)


class ConfigError(ValueError):
    """The run configuration is malformed or inconsistent."""


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_NUMLIST = {"type": "array", "items": _NUM, "minItems": 1}
_INT = {"type": "integer"}

_KURAMOTO_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["incoming", "outgoing"],
    "properties": {
        "omega_hub": _NUM,
        "omega_peripheral": _NUM,
        "incoming": _NUMLIST,
        "outgoing": _NUMLIST,
    },
}
_FHN_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "a": _NUM, "b": _NUM, "c": _NUM, "d": _NUM, "drive": _NUM,
        "incoming": _NUMLIST, "outgoing": _NUMLIST,
    },
}
_WIEN_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["g0"],
    "properties": {
        "omega0": _POS, "R": _POS, "C": _POS, "g0": _NUM, "k_nl": _POS,
        "I_s": _POS, "R_f2": _POS, "n": _POS, "V_T": _POS,
    },
}
_HARMONIC_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"omega": _POS},
}
_EDGE = {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2}

SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "netsync run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {"enum": list(MODELS)},
        "params": {"type": "object"},
        "graph": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["n", "edges"],
                 "properties": {"n": {"type": "integer", "minimum": 1},
                                "edges": {"type": "array", "items": _EDGE},
                                "labels": {"type": "array", "items": {"type": "string"}}}},
                {"type": "object", "additionalProperties": False, "required": ["star"],
                 "properties": {"star": {"type": "integer"}}},
                {"type": "object", "additionalProperties": False, "required": ["scale_free"],
                 "properties": {"scale_free": {
                     "type": "object", "additionalProperties": False, "required": ["n", "m"],
                     "properties": {"n": _INT, "m": _INT, "seed": _INT}}}},
            ]
        },
        "coupling": _NONNEG,
        "integrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dt": _NUM, "t_end": _NUM, "transient": _NUM,
                           "method": {"enum": ["rk4"]}},
        },
        "initial": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["state"],
                 "properties": {"state": _NUMLIST}},
                {"type": "object", "additionalProperties": False, "required": ["uniform"],
                 "properties": {"uniform": {"type": "array", "items": _NUM,
                                            "minItems": 2, "maxItems": 2}}},
                {"type": "object", "additionalProperties": False, "required": ["node", "spread"],
                 "properties": {"node": _NUMLIST, "spread": _NONNEG}},
            ]
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tolerance": _POS,
                "hub": {"type": "integer", "minimum": 0},
                "peripherals": {"type": "array", "items": _INT},
                "pairs": {"type": "array", "items": _EDGE},
                "component": {"type": "integer", "minimum": 0},
                "cycle_tol": _POS,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"},
                           "stride": {"type": "integer", "minimum": 1},
                           "gnuplot": {"type": "boolean"}},
        },
        "seed": _INT,
    },
    "allOf": [
        {"if": {"properties": {"model": {"enum": ["kuramoto_star", "kuramoto_reduced"]}}},
         "then": {"required": ["params"], "properties": {"params": _KURAMOTO_PARAMS}}},
        {"if": {"properties": {"model": {"enum": ["fhn_single", "fhn_star", "fhn_network"]}}},
         "then": {"properties": {"params": _FHN_PARAMS}}},
        {"if": {"properties": {"model": {"const": "wien_bridge"}}},
         "then": {"required": ["params"], "properties": {"params": _WIEN_PARAMS}}},
        {"if": {"properties": {"model": {"const": "harmonic"}}},
         "then": {"properties": {"params": _HARMONIC_PARAMS}}},
    ],
}

# model-dependent integrator defaults (time units of the model)
_INTEGRATOR_DEFAULTS = {
    "kuramoto_star": {"dt": 1e-3, "t_end": 60.0, "transient": 20.0},
    "kuramoto_reduced": {"dt": 1e-3, "t_end": 60.0, "transient": 20.0},
    "fhn_single": {"dt": 1e-3, "t_end": 400.0, "transient": 200.0},
    "fhn_star": {"dt": 1e-3, "t_end": 400.0, "transient": 200.0},
    "fhn_network": {"dt": 1e-3, "t_end": 400.0, "transient": 200.0},
    "harmonic": {"dt": 1e-3, "t_end": 10.0, "transient": 2.0},
}


def validate(raw: Any) -> None:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return resolve(raw)


def set_path(cfg: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {dotted}: {k} is not an object")
    node[keys[-1]] = value


def resolve(raw: Any, overrides: dict[str, Any] | None = None) -> dict:
    """Validate, apply overrides and fill defaults; returns a new dict."""
    cfg = copy.deepcopy(raw)
    for key, value in (overrides or {}).items():
        if not isinstance(cfg, dict):
            break
        set_path(cfg, key, value)
    validate(cfg)
    model = cfg["model"]
    params = cfg.setdefault("params", {})
    if model in ("fhn_single", "fhn_star", "fhn_network"):
        defaults = FhnParams()
        for k in ("a", "b", "c", "d", "drive"):
            params.setdefault(k, getattr(defaults, k))
    elif model in ("kuramoto_star", "kuramoto_reduced"):
        params.setdefault("omega_hub", 1.0)
        params.setdefault("omega_peripheral", params["omega_hub"])
    elif model == "harmonic":
        params.setdefault("omega", 2.0 * math.pi)
    cfg.setdefault("coupling", 0.0)
    cfg.setdefault("seed", 0)
    integ = cfg.setdefault("integrator", {})
    if model == "wien_bridge":
        w0 = build_params(cfg).omega0
        base = {"dt": 0.01 / w0, "t_end": 300.0 / w0, "transient": 200.0 / w0}
    else:
        base = _INTEGRATOR_DEFAULTS[model]
    for k, v in base.items():
        integ.setdefault(k, v)
    integ.setdefault("method", "rk4")
    an = cfg.setdefault("analysis", {})
    an.setdefault("tolerance", 1e-2)
    an.setdefault("hub", 0)
    an.setdefault("component", 0)
    an.setdefault("cycle_tol", 1e-3)
    out = cfg.setdefault("output", {})
    out.setdefault("stride", 1)
    out.setdefault("gnuplot", False)
    # catch semantic errors (bad dt, bad graph, ...) before any computation
    build_integrator(cfg)
    build_spec(cfg)
    return cfg


def build_graph(gcfg: dict) -> Graph:
    try:
        if "star" in gcfg:
            return build_star(gcfg["star"])
        if "scale_free" in gcfg:
            sf = gcfg["scale_free"]
            return build_scale_free(sf["n"], sf["m"], sf.get("seed", 0))
        return build_from_edges(gcfg["n"], gcfg["edges"], gcfg.get("labels"))
    except GraphError as exc:
        raise ConfigError(f"bad graph: {exc}") from None


def build_params(cfg: dict):
    model = cfg["model"]
    p = cfg.get("params", {})
    try:
        if model in ("kuramoto_star", "kuramoto_reduced"):
            w0 = p.get("omega_hub", 1.0)
            return KuramotoStarParams(w0, p.get("omega_peripheral", w0),
                                      tuple(p["incoming"]), tuple(p["outgoing"]))
        if model in ("fhn_single", "fhn_star", "fhn_network"):
            return FhnParams(**{k: p[k] for k in ("a", "b", "c", "d", "drive") if k in p})
        if model == "harmonic":
            return HarmonicParams(p.get("omega", 2.0 * math.pi))
        return _wien_params(p)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad params for {model}: {exc}") from None


def _wien_params(p: dict) -> WienParams:
    if "omega0" in p:
        if "R" in p or "C" in p:
            raise ConfigError("give either omega0 or R and C, not both")
        w0 = p["omega0"]
        devices: dict = {}
    elif "R" in p and "C" in p:
        w0 = 1.0 / (p["R"] * p["C"])
        devices = {"R": p["R"], "C": p["C"]}
    else:
        raise ConfigError("wien_bridge needs omega0 or both R and C")
    device_keys = ("I_s", "R_f2", "n", "V_T")
    if "k_nl" in p:
        if any(k in p for k in device_keys):
            raise ConfigError("give either k_nl or the diode values, not both")
        k_nl = p["k_nl"]
    elif all(k in p for k in device_keys):
        k_nl = 8.0 * p["I_s"] * p["R_f2"] / (9.0 * (p["n"] * p["V_T"]) ** 3)
        devices.update({k: p[k] for k in device_keys})
    else:
        raise ConfigError("wien_bridge needs k_nl or all of I_s, R_f2, n, V_T")
    return WienParams(w0, p["g0"], k_nl, devices)


def build_spec(cfg: dict) -> SystemSpec:
    model = cfg["model"]
    params = build_params(cfg)
    graph = build_graph(cfg["graph"]) if "graph" in cfg else None
    p = cfg.get("params", {})
    try:
        if model == "fhn_star":
            return SystemSpec(model, params, graph, cfg.get("coupling", 0.0),
                              tuple(p["incoming"]) if "incoming" in p else None,
                              tuple(p["outgoing"]) if "outgoing" in p else None)
        if model != "fhn_network" and graph is not None:
            raise ConfigError(f"model {model} does not take a graph")
        if model in ("fhn_single", "fhn_network") and ("incoming" in p or "outgoing" in p):
            raise ConfigError(f"model {model} does not take incoming/outgoing couplings")
        return SystemSpec(model, params, graph, cfg.get("coupling", 0.0))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad system description: {exc}") from None


def build_integrator(cfg: dict) -> IntegratorConfig:
    try:
        return IntegratorConfig(**cfg["integrator"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad integrator settings: {exc}") from None


def initial_state(cfg: dict, spec: SystemSpec) -> np.ndarray:
    """Explicit state, per-component uniform draw, or per-node base plus jitter."""
    init = cfg.get("initial")
    rng = np.random.default_rng(cfg.get("seed", 0))
    n = spec.state_dim
    if init is None:
        x = np.zeros(n)
        if spec.model in ("wien_bridge", "harmonic"):
            x[0] = 0.01 if spec.model == "wien_bridge" else 1.0
        return x
    if "state" in init:
        x = np.asarray(init["state"], dtype=float)
        if x.shape[0] != n:
            raise ConfigError(f"initial state has length {x.shape[0]}, model needs {n}")
        return x
    if "uniform" in init:
        lo, hi = init["uniform"]
        if not lo <= hi:
            raise ConfigError("initial.uniform needs low <= high")
        return rng.uniform(lo, hi, n)
    base = np.asarray(init["node"], dtype=float)
    if base.shape[0] != spec.node_dim:
        raise ConfigError(f"initial.node needs {spec.node_dim} values per node")
    return np.tile(base, spec.n_nodes) + rng.uniform(-init["spread"], init["spread"], n)
