"""Command-line entry point: ``duet run|sweep|verify|info``.

Exit codes:

    0  success
    2  invalid configuration
    3  Picard iteration failed to contract after all retries
    4  step size fell below ``min_step``
    5  file or checkpoint error
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from . import kgs, zakharov
from .checkpoint import read_checkpoint, read_header, save_checkpoint
from .config import RunConfig, load_config
from .errors import CheckpointError, NoContraction, NonzeroMeanVelocity, SchemaError, StepUnderflow
from .estimates import SweepConfig, SweepRow, exponent_sweep, growth_factors, uniform_triple
from .globalizer import RunLog, bound_check, run
from .spectral import Grid1D, Grid3D, g_norm, l2_norm, w_norm

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NO_CONTRACTION = 3
EXIT_STEP_UNDERFLOW = 4
EXIT_IO = 5

CSV_COLUMNS = ("t", "dt", "mass", "hamiltonian", "n_norm", "picard_iters", "retries")

logger = logging.getLogger("duet")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


def build_initial_state(cfg: RunConfig):
    spec = cfg.initial
    kind = spec["kind"]
    if kind == "checkpoint":
        return read_checkpoint(spec["path"], cfg.system)[1]
    rng = np.random.default_rng(cfg.seed)
    if cfg.system == "zakharov":
        grid = Grid1D(cfg.grid_shape[0], cfg.grid_periods[0])
        if kind == "zero":
            return zakharov.ZakharovState.zeros(grid, coupling=cfg.coupling_sign)
        if kind == "soliton":
            if cfg.coupling_sign != 1.0:
                raise SchemaError("initial.kind", "the soliton needs the standard coupling sign")
            return zakharov.soliton(spec["eta"], spec["c"], spec["x0"], grid)
        return zakharov.random_state(grid, rng, spec["u_l2"], spec["wave_norm"], spec["eps"],
                                     cfg.coupling_sign)
    grid = Grid3D(cfg.grid_shape, cfg.grid_periods)
    if kind == "zero":
        return kgs.KGSState.zeros(grid, couplings=cfg.couplings)
    if kind == "plane_wave":
        return kgs.plane_wave(spec["amplitude"], spec["k"], grid, cfg.couplings)
    return kgs.random_state(grid, rng, spec["u_l2"], spec["wave_norm"], cfg.couplings, spec["eps"])


def write_log_csv(log: RunLog, path: str, cfg: RunConfig) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# seed={cfg.seed} system={cfg.system}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in log.records:
            writer.writerow([_fmt(r.time), _fmt(r.dt), _fmt(r.mass), _fmt(r.hamiltonian),
                             _fmt(r.n_norm), _fmt(r.picard_iters), _fmt(r.retries)])


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outputs(cfg: RunConfig):
    os.makedirs(cfg.output_dir, exist_ok=True)
    base = os.path.join(cfg.output_dir, cfg.prefix)
    return base + ".csv", base + ".ckpt", base + ".json"


def _json_number(x: float):
    return x if math.isfinite(x) else None


def execute_run(cfg: RunConfig) -> int:
    csv_path, ckpt_path, json_path = _outputs(cfg)
    state = build_initial_state(cfg)
    u0_mass = zakharov.mass(state.u)
    wave_norm = w_norm if cfg.system == "zakharov" else g_norm
    n0_norm = wave_norm(state.wave)
    t_end = state.time + cfg.t_end
    started = time.perf_counter()
    status = EXIT_OK
    try:
        result = run(state, t_end, cfg.schedule, cfg.picard)
        log, final = result.log, result.state
    except StepUnderflow as exc:
        logger.error("%s", exc)
        if exc.log is None:
            raise
        log, final, status = exc.log, exc.state, EXIT_STEP_UNDERFLOW
    wall = time.perf_counter() - started
    write_log_csv(log, csv_path, cfg)
    save_checkpoint(final, ckpt_path, cfg.seed)
    fit = bound_check(log, u0_mass, n0_norm)
    _write_json(json_path, {
        "system": cfg.system,
        "seed": cfg.seed,
        "status": status,
        "t_end": t_end,
        "final_time": final.time,
        "steps": log.steps,
        "retries": len(log.retry_events),
        "doubling_times": log.doubling_times,
        "mass_drift": log.mass_drift,
        "max_n_norm": max(log.n_norms),
        "fitted_c": _json_number(fit.c),
        "bound_pass": fit.passed,
        "wall_time_s": wall,
    })
    logger.info("wrote %s, %s, %s", csv_path, ckpt_path, json_path)
    return status


def sweep_config(cfg: RunConfig) -> SweepConfig:
    s = cfg.sweep
    return SweepConfig(triples=[uniform_triple(total) for total in s["sums"]],
                       lattice_sizes=tuple(s["lattice_sizes"]), families=tuple(s["families"]),
                       kind=s["kind"], samples=s["samples"], seed=cfg.seed, d_xi=s["d_xi"],
                       d_tau=s["d_tau"], workers=s["workers"])


def trend_report(rows: Sequence[SweepRow], family: str = "characteristic") -> dict:
    """Compare successive-lattice growth of each exponent sum against the smallest sum."""
    table = growth_factors(rows, family)
    if not table:
        return {"family": family, "growth": {}, "inversions": []}
    reference = min(table)
    inversions = []
    for total, factors in table.items():
        if total <= reference:
            continue
        for step, (g, g_ref) in enumerate(zip(factors, table[reference])):
            if g > g_ref:
                inversions.append({"sum": total, "refinement": step + 1, "growth": g, "reference": g_ref})
    return {"family": family, "reference_sum": reference,
            "growth": {str(k): v for k, v in table.items()}, "inversions": inversions}


def execute_sweep(cfg: RunConfig) -> int:
    csv_path, _, json_path = _outputs(cfg)
    started = time.perf_counter()
    rows = exponent_sweep(sweep_config(cfg))
    wall = time.perf_counter() - started
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# seed={cfg.seed} system={cfg.system}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SweepRow.FIELDS)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (int, float)) else v for v in row.as_tuple()])
    report = trend_report(rows)
    for item in report["inversions"]:
        logger.warning("growth inversion: sum %.3g grew %.6g vs %.6g at refinement %d",
                       item["sum"], item["growth"], item["reference"], item["refinement"])
    _write_json(json_path, {"system": cfg.system, "seed": cfg.seed, "rows": len(rows),
                            "trend": report, "wall_time_s": wall})
    return EXIT_OK


def execute(cfg: RunConfig) -> int:
    if cfg.system == "estimate_sweep":
        return execute_sweep(cfg)
    return execute_run(cfg)


def verify_state(header, state) -> dict:
    """Recompute the invariants of a stored state."""
    report = {"system": header.system, "time": state.time, "mass": zakharov.mass(state.u),
              "u_l2": l2_norm(state.u)}
    finite = all(np.all(np.isfinite(a)) for a in (state.u.values, state.n.values, state.nt.values))
    report["finite"] = bool(finite)
    if header.system == "zakharov":
        report["n_norm"] = w_norm(state.wave)
        try:
            report["hamiltonian"] = zakharov.hamiltonian(state)
        except NonzeroMeanVelocity:
            report["hamiltonian"] = None
    else:
        report["n_norm"] = g_norm(state.wave)
        if state.beta != 0:
            report["hamiltonian"] = kgs.hamiltonian(state)
            report["conserved_energy"] = kgs.conserved_energy(state)
    return report


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a solver from a JSON config")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run an exponent sweep from a JSON config")
    p_sweep.add_argument("config")
    p_verify = sub.add_parser("verify", help="recompute invariants of a checkpoint")
    p_verify.add_argument("checkpoint")
    p_info = sub.add_parser("info", help="print a checkpoint header")
    p_info.add_argument("checkpoint")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command in ("run", "sweep"):
            cfg = load_config(args.config)
            if (args.command == "sweep") != (cfg.system == "estimate_sweep"):
                raise SchemaError("system", f"{cfg.system!r} does not match the {args.command} command")
            return execute(cfg)
        if args.command == "verify":
            header, state = read_checkpoint(args.checkpoint)
            report = verify_state(header, state)
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK if report["finite"] else EXIT_IO
        print(json.dumps(read_header(args.checkpoint).as_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    except SchemaError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_SCHEMA
    except NoContraction as exc:
        logger.error("no contraction: %s", exc)
        return EXIT_NO_CONTRACTION
    except StepUnderflow as exc:
        logger.error("step underflow: %s", exc)
        return EXIT_STEP_UNDERFLOW
    except (CheckpointError, OSError) as exc:
        logger.error("i/o error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
