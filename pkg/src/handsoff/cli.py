"""Command-line front end.

    handsoff solve    --config problem.json [--objective l1] [--out PREFIX]
    handsoff mintime  --config problem.json [--x0 1,0] [--out PREFIX]
    handsoff simulate --config sim.json [--seed 0] [--sweep K] [--out PREFIX]
    handsoff demo     NAME [--seed 0] [--out PREFIX]

Exit codes: 0 success, 1 usage or config error, 2 infeasible or
unreachable, 3 escaped episode. HANDSOFF_LOG sets the log level
(error, warning, info, debug); "trace" additionally writes solver
iterations to PREFIX.trace.jsonl.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .io import ConfigError, problem_from_dict, read_json, sim_config_from_dict, system_from_dict
from .oracle_1d import ScalarPlant, Unreachable, min_time_1d
from .self_triggered import (check_practical_stability, measured_sparsity_rate, run_episode,
                             simulate_open_loop, stability_report)
from .signals import write_csv
from .solver import Status
from .sparse_control import minimum_time, solve_l0_exact, solve_problem
from .transcription import Objective

log = logging.getLogger("handsoff")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_ESCAPED = 0, 1, 2, 3

DEMOS = {
    "scalar-stable": {
        "plant": {"a": -1.0, "kind": "linear"}, "x0": [1.0], "r": 0.6, "T_min": 0.1,
        "delta": 1.0, "disturbance": {"kind": "uniform"}, "total_time": 20.0,
    },
    "scalar-worstcase": {
        "plant": {"a": -1.0, "kind": "linear"}, "x0": [1.0], "r": 0.6, "T_min": 0.1,
        "delta": 1.0, "disturbance": {"kind": "worst-case", "direction": [1.0]},
        "total_time": 50.0,
    },
    "scalar-nonlinear-stable": {
        "plant": {"a": -1.0, "kind": "nonlinear-sin"}, "x0": [1.0], "r": 0.6, "T_min": 0.1,
        "delta": 0.0, "disturbance": {"kind": "zero"}, "total_time": 20.0,
    },
    "scalar-nonlinear-unstable": {
        "plant": {"a": 1.0, "kind": "nonlinear-sin"}, "x0": [0.25], "r": 0.6, "T_min": 0.1,
        "delta": 0.0, "disturbance": {"kind": "zero"}, "total_time": 20.0,
    },
    "fourstate-l1l2": {
        "system": {"A": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]],
                   "B": [[2], [0], [0], [0]]},
        "x0": [1, 1, 1, 1], "T": 10.0, "N": 500, "lambda": [1.0], "theta": [1.0],
        "objective": "l1l2",
    },
}


@dataclass
class RunManifest:
    command: str
    config_path: str | None
    config_sha256: str
    seed: int | None
    version: str = __version__
    outputs: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def write(self, prefix: str) -> Path:
        path = Path(f"{prefix}.manifest.json")
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _prefix(out: str | None, default: str) -> str:
    prefix = out or default
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    return prefix


def _finish(manifest: RunManifest, prefix: str, outputs: list, t0: float) -> None:
    manifest.outputs = {str(p): _sha256(p) for p in outputs}
    manifest.wall_time = time.perf_counter() - t0
    manifest.write(prefix)


def _trace_file(prefix: str):
    if os.environ.get("HANDSOFF_LOG", "").lower() == "trace":
        return open(f"{prefix}.trace.jsonl", "w")
    return None


# -- solve -------------------------------------------------------------------

def cmd_solve(config: str, objective: str | None, out: str | None) -> int:
    t0 = time.perf_counter()
    prob = problem_from_dict(read_json(config), objective)
    prefix = _prefix(out, Path(config).stem)
    log.info("solve %s: objective=%s T=%g N=%d", config, prob.objective.value, prob.T, prob.N)
    trace = _trace_file(prefix)
    try:
        if prob.objective is Objective.L0_EXACT:
            sol = solve_l0_exact(prob)
        else:
            sol = solve_problem(prob, trace=trace)
    finally:
        if trace is not None:
            trace.close()
    csv_path, cert_path = Path(f"{prefix}.csv"), Path(f"{prefix}.certificate.json")
    write_csv(csv_path, sol.u, sol.x)
    _dump(cert_path, sol.to_dict())
    _finish(RunManifest("solve", config, _sha256(config), None), prefix, [csv_path, cert_path], t0)
    print(json.dumps({"status": sol.status.value, "objective_value": sol.objective_value,
                      "terminal_error": sol.certificates.terminal_error}))
    if sol.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK if sol.ok else EXIT_USAGE


# -- mintime -----------------------------------------------------------------

def _parse_vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"--x0: expected comma-separated numbers, got {text!r}") from None


def cmd_mintime(config: str, x0: str | None, out: str | None) -> int:
    t0 = time.perf_counter()
    data = read_json(config)
    if "plant" in data:
        cfg = sim_config_from_dict(data)
        plant = cfg.plant
        x = cfg.x0 if x0 is None else np.asarray(_parse_vector(x0))
    else:
        plant = system_from_dict(data.get("system", data))
        if x0 is not None:
            x = np.asarray(_parse_vector(x0))
        elif "x0" in data:
            x = np.atleast_1d(np.asarray(data["x0"], dtype=float))
        else:
            raise ConfigError("mintime: missing field 'x0' (or pass --x0)")
    n = 1 if isinstance(plant, ScalarPlant) else plant.n
    if x.size != n:
        raise ConfigError(f"--x0: expected {n} entries, got {x.size}")
    if isinstance(plant, ScalarPlant):
        try:
            result = {"T_star": min_time_1d(plant, float(x[0])), "status": "ok"}
        except Unreachable:
            result = {"T_star": None, "status": "unreachable"}
    else:
        mt = minimum_time(plant, x)
        result = {"T_star": mt.T_star if mt.reachable else None, "status": mt.status,
                  "evaluations": mt.evaluations}
    prefix = _prefix(out, Path(config).stem + ".mintime")
    res_path = Path(f"{prefix}.json")
    _dump(res_path, result)
    _finish(RunManifest("mintime", config, _sha256(config), None), prefix, [res_path], t0)
    print(json.dumps(result))
    return EXIT_OK if result["status"] == "ok" else EXIT_INFEASIBLE


# -- simulate ----------------------------------------------------------------

def _episode_summary(args) -> dict:
    data, seed, episode = args
    cfg = sim_config_from_dict(data, seed, episode)
    ep = run_episode(cfg)
    rate = measured_sparsity_rate(ep, cfg.eps_zero)
    return {"episode": episode, "status": ep.status, "rate": rate.total,
            "max_interval_rate": max(rate.per_interval, default=0.0),
            "events": len(ep.events), "elapsed": ep.elapsed}


def _simulate(data: dict, seed: int, prefix: str) -> tuple[int, list]:
    cfg = sim_config_from_dict(data, seed, 0)
    ep = run_episode(cfg)
    log.info("episode %s after %d events, elapsed %g", ep.status, len(ep.events), ep.elapsed)
    rate = measured_sparsity_rate(ep, cfg.eps_zero)
    report = stability_report(cfg) if ep.events else None
    events_path = Path(f"{prefix}.events.jsonl")
    traj_path = Path(f"{prefix}.trajectory.csv")
    report_path = Path(f"{prefix}.report.json")
    ep.write_events(events_path)
    ep.write_trajectory(traj_path)
    body = {"status": ep.status, "seed": seed, "measured_rate": rate.total,
            "per_interval_rates": list(rate.per_interval), "elapsed": ep.elapsed,
            "events": len(ep.events), "stability": None, "check": None}
    if report is not None:
        body["stability"] = report.to_dict()
        body["check"] = check_practical_stability(ep, report)
    _dump(report_path, body)
    print(json.dumps({"status": ep.status, "measured_rate": rate.total}))
    code = EXIT_ESCAPED if ep.status == "escaped" else EXIT_OK
    return code, [events_path, traj_path, report_path]


def cmd_simulate(config: str, seed: int, out: str | None, sweep: int = 0) -> int:
    t0 = time.perf_counter()
    data = read_json(config)
    sim_config_from_dict(data, seed)  # validate before any output is written
    prefix = _prefix(out, Path(config).stem)
    if sweep > 0:
        jobs = [(data, seed, k) for k in range(sweep)]
        with ProcessPoolExecutor() as pool:
            rows = list(pool.map(_episode_summary, jobs))
        sweep_path = Path(f"{prefix}.sweep.json")
        _dump(sweep_path, {"seed": seed, "episodes": rows})
        _finish(RunManifest("simulate --sweep", config, _sha256(config), seed), prefix,
                [sweep_path], t0)
        print(json.dumps({"episodes": sweep, "max_rate": max(r["rate"] for r in rows)}))
        return EXIT_ESCAPED if any(r["status"] == "escaped" for r in rows) else EXIT_OK
    code, outputs = _simulate(data, seed, prefix)
    _finish(RunManifest("simulate", config, _sha256(config), seed), prefix, outputs, t0)
    return code


# -- demo --------------------------------------------------------------------

def cmd_demo(name: str, seed: int, out: str | None) -> int:
    if name not in DEMOS:
        raise ConfigError(f"demo: unknown name {name!r}; choose from {sorted(DEMOS)}")
    t0 = time.perf_counter()
    prefix = _prefix(out, name)
    config = Path(f"{prefix}.config.json")
    _dump(config, DEMOS[name])
    data = read_json(config)
    if "system" in data:
        return cmd_solve(str(config), None, prefix)
    code, outputs = _simulate(data, seed, prefix)
    # zero-control baseline for comparison plots
    cfg = sim_config_from_dict(data, seed, 0)
    zero_path = Path(f"{prefix}.zero.csv")
    try:
        t, x = simulate_open_loop(cfg)
    except FloatingPointError:
        t, x = np.zeros(0), np.zeros((cfg.n, 0))
    with open(zero_path, "w") as fh:
        fh.write(",".join(["t"] + [f"x_{j + 1}" for j in range(cfg.n)]) + "\n")
        for j in range(t.size):
            fh.write(",".join(f"{v:.12g}" for v in (t[j], *x[:, j])) + "\n")
    _finish(RunManifest(f"demo {name}", str(config), _sha256(config), seed), prefix,
            outputs + [zero_path], t0)
    return code


# -- entry point -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="handsoff", description="Maximum hands-off control toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a finite-horizon problem")
    s.add_argument("--config", required=True)
    s.add_argument("--objective", choices=[o.value for o in Objective])
    s.add_argument("--out")

    s = sub.add_parser("mintime", help="minimum time to the origin")
    s.add_argument("--config", required=True)
    s.add_argument("--x0", help="comma-separated initial state")
    s.add_argument("--out")

    s = sub.add_parser("simulate", help="run a self-triggered episode")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--sweep", type=int, default=0, metavar="K",
                   help="run K episodes with streams (seed, k) and write a summary")
    s.add_argument("--out")

    s = sub.add_parser("demo", help="run a built-in example")
    s.add_argument("name", choices=sorted(DEMOS))
    s.add_argument("--seed", type=_u64, default=0)
    s.add_argument("--out")
    return p


def main(argv=None) -> int:
    level = os.environ.get("HANDSOFF_LOG", "warning").upper()
    logging.basicConfig(level=logging.DEBUG if level == "TRACE" else
                        getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args.config, args.objective, args.out)
        if args.command == "mintime":
            return cmd_mintime(args.config, args.x0, args.out)
        if args.command == "simulate":
            return cmd_simulate(args.config, args.seed, args.out, args.sweep)
        return cmd_demo(args.name, args.seed, args.out)
    except ConfigError as exc:
        print(f"handsoff: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
