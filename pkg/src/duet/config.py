"""Run configuration: JSON documents validated against a fixed schema.

Every section is optional and takes per-system defaults; unknown keys are
rejected with the dotted path of the offending key.  Example::

    {"system": "zakharov", "seed": 3, "t_end": 2.0,
     "initial": {"kind": "random", "u_l2": 1.0, "wave_norm": 2.0}}
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .errors import SchemaError
from .globalizer import DEFAULT_EXPONENTS, ScheduleParams
from .zakharov import PicardParams

SYSTEMS = ("zakharov", "kgs", "estimate_sweep")
OUTPUT_ENV = "DUET_OUTPUT_DIR"

GRID_DEFAULTS = {
    "zakharov": {"n_points": 1024, "period": 100.0},
    "kgs": {"n_points": 32, "period": 16 * math.pi},
}

INITIAL_KINDS = {
    "zakharov": ("zero", "soliton", "random", "checkpoint"),
    "kgs": ("zero", "plane_wave", "random", "checkpoint"),
}

INITIAL_FIELDS = {
    "zero": {},
    "soliton": {"eta": (float, 1.0), "c": (float, 0.5), "x0": (float, 0.0)},
    "random": {"u_l2": (float, 1.0), "wave_norm": (float, 1.0), "eps": (float, 0.01)},
    "plane_wave": {"amplitude": (float, 1.0), "k": (list, [1.0, 0.0, 0.0])},
    "checkpoint": {"path": (str, None)},
}

SCHEDULE_FIELDS = {
    "gamma_exp": float, "beta_exp": float, "delta_exp": float, "c_step": float,
    "min_step": float, "max_retries": int,
}
PICARD_FIELDS = {"substeps": (int, 16), "tol": (float, 1e-10), "max_iter": (int, 50)}
OUTPUT_FIELDS = {"directory": (str, "output"), "prefix": (str, "")}
SWEEP_FIELDS = {
    "sums": (list, [0.9, 1.0, 1.1]),
    "lattice_sizes": (list, [64, 128, 256]),
    "families": (list, ["gaussian", "characteristic", "random"]),
    "kind": (str, "S"),
    "samples": (int, 3),
    "workers": (int, 1),
    "d_xi": (float, 0.25),
    "d_tau": (float, 1.0),
}
TOP_LEVEL = ("system", "seed", "t_end", "grid", "initial", "couplings", "coupling_sign",
             "schedule", "picard", "output", "sweep")


@dataclass
class RunConfig:
    system: str
    seed: int = 0
    t_end: float = 1.0
    grid_shape: Tuple[int, ...] = ()
    grid_periods: Tuple[float, ...] = ()
    initial: Dict[str, Any] = field(default_factory=lambda: {"kind": "zero"})
    couplings: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    coupling_sign: float = 1.0
    schedule: Optional[ScheduleParams] = None
    picard: PicardParams = field(default_factory=PicardParams)
    output_dir: str = "output"
    prefix: str = "run"
    sweep: Dict[str, Any] = field(default_factory=dict)


def _coerce(value, kind, path):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(path, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise SchemaError(path, "must be finite")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(path, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise SchemaError(path, f"expected {kind.__name__}, got {value!r}")
    return value


def _section(data, path: str, fields: dict) -> dict:
    """Validate a flat mapping against ``{key: (type, default)}``."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise SchemaError(path, "expected a mapping")
    for key in data:
        if key not in fields:
            raise SchemaError(f"{path}.{key}" if path else key, "unknown key")
    out = {}
    for key, (kind, default) in fields.items():
        key_path = f"{path}.{key}" if path else key
        if key in data:
            out[key] = _coerce(data[key], kind, key_path)
        elif default is None:
            raise SchemaError(key_path, "required")
        else:
            out[key] = default
    return out


def _grid(data, system: str) -> Tuple[tuple, tuple]:
    defaults = GRID_DEFAULTS[system]
    ndim = 1 if system == "zakharov" else 3
    section = _section(data, "grid", {"n_points": (object, defaults["n_points"]),
                                      "period": (object, defaults["period"])})
    shape, periods = section["n_points"], section["period"]
    shape = [shape] * ndim if not isinstance(shape, list) else shape
    periods = [periods] * ndim if not isinstance(periods, list) else periods
    if len(shape) != ndim or len(periods) != ndim:
        raise SchemaError("grid", f"{system} needs {ndim} axes")
    shape = tuple(_coerce(n, int, "grid.n_points") for n in shape)
    periods = tuple(_coerce(p, float, "grid.period") for p in periods)
    for n in shape:
        if n < 2 or n & (n - 1):
            raise SchemaError("grid.n_points", f"{n} is not a power of two >= 2")
    for p in periods:
        if p <= 0:
            raise SchemaError("grid.period", "must be positive")
    return shape, periods


def _initial(data, system: str) -> dict:
    if data is None:
        data = {"kind": "zero"}
    if not isinstance(data, dict):
        raise SchemaError("initial", "expected a mapping")
    kind = data.get("kind", "zero")
    if kind not in INITIAL_KINDS[system]:
        raise SchemaError("initial.kind", f"{kind!r} is not one of {INITIAL_KINDS[system]}")
    rest = {k: v for k, v in data.items() if k != "kind"}
    out = _section(rest, "initial", INITIAL_FIELDS[kind])
    out["kind"] = kind
    if kind == "plane_wave":
        if len(out["k"]) != 3:
            raise SchemaError("initial.k", "needs three components")
        out["k"] = [_coerce(v, float, "initial.k") for v in out["k"]]
    return out


def _schedule(data, system: str) -> ScheduleParams:
    gamma_exp, beta_exp, delta_exp = DEFAULT_EXPONENTS[system]
    defaults = ScheduleParams(gamma_exp, beta_exp, delta_exp)
    fields = {k: (kind, getattr(defaults, k)) for k, kind in SCHEDULE_FIELDS.items()}
    section = _section(data, "schedule", fields)
    try:
        return ScheduleParams(**section)
    except ValueError as exc:
        raise SchemaError("schedule", str(exc)) from exc


def _picard(data) -> PicardParams:
    section = _section(data, "picard", PICARD_FIELDS)
    try:
        return PicardParams(**section)
    except ValueError as exc:
        raise SchemaError("picard", str(exc)) from exc


def _sweep(data) -> dict:
    section = _section(data, "sweep", SWEEP_FIELDS)
    section["sums"] = [_coerce(v, float, "sweep.sums") for v in section["sums"]]
    section["lattice_sizes"] = [_coerce(v, int, "sweep.lattice_sizes") for v in section["lattice_sizes"]]
    for n in section["lattice_sizes"]:
        if n < 2 or n % 2:
            raise SchemaError("sweep.lattice_sizes", f"{n} is not an even size >= 2")
    for fam in section["families"]:
        if fam not in SWEEP_FIELDS["families"][1]:
            raise SchemaError("sweep.families", f"unknown family {fam!r}")
    if section["kind"] not in ("S", "Sprime", "Wform"):
        raise SchemaError("sweep.kind", f"unknown form {section['kind']!r}")
    for total in section["sums"]:
        if not 0.75 < total < 1.5:
            raise SchemaError("sweep.sums", f"{total} puts equal exponents outside (1/4, 1/2)")
    return section


def from_mapping(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise SchemaError("", "configuration must be a mapping")
    for key in data:
        if key not in TOP_LEVEL:
            raise SchemaError(key, "unknown key")
    if "system" not in data:
        raise SchemaError("system", "required")
    system = data["system"]
    if system not in SYSTEMS:
        raise SchemaError("system", f"{system!r} is not one of {SYSTEMS}")
    cfg = RunConfig(system=system)
    cfg.seed = _coerce(data.get("seed", 0), int, "seed")
    output = _section(data.get("output"), "output", OUTPUT_FIELDS)
    cfg.output_dir = os.environ.get(OUTPUT_ENV) or output["directory"]
    cfg.prefix = output["prefix"] or system

    if system == "estimate_sweep":
        for key in ("grid", "initial", "couplings", "coupling_sign", "schedule", "picard", "t_end"):
            if key in data:
                raise SchemaError(key, "not used by estimate_sweep")
        cfg.sweep = _sweep(data.get("sweep"))
        return cfg
    if "sweep" in data:
        raise SchemaError("sweep", f"not used by {system}")

    cfg.t_end = _coerce(data.get("t_end", 1.0), float, "t_end")
    if cfg.t_end <= 0:
        raise SchemaError("t_end", "must be positive")
    cfg.grid_shape, cfg.grid_periods = _grid(data.get("grid"), system)
    cfg.initial = _initial(data.get("initial"), system)
    cfg.schedule = _schedule(data.get("schedule"), system)
    cfg.picard = _picard(data.get("picard"))
    if system == "kgs":
        if "coupling_sign" in data:
            raise SchemaError("coupling_sign", "not used by kgs")
        couplings = _section(data.get("couplings"), "couplings",
                             {"alpha": (float, 1.0), "beta": (float, 1.0), "gamma": (float, 1.0)})
        cfg.couplings = (couplings["alpha"], couplings["beta"], couplings["gamma"])
    else:
        if "couplings" in data:
            raise SchemaError("couplings", "not used by zakharov; use coupling_sign")
        sign = _coerce(data.get("coupling_sign", 1.0), float, "coupling_sign")
        if sign not in (1.0, -1.0):
            raise SchemaError("coupling_sign", "must be +1 or -1")
        cfg.coupling_sign = sign
    return cfg


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc
    return from_mapping(data)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
