"""Config-driven command line: simulate, check-axioms, represent, profile, diagnose.

Every run is fully determined by the config file plus the seed: no wall
clock, no implicit randomness.  Artifacts embed the config hash and the
seed so a result can always be traced back to the exact run that made
it.  Exit codes: 0 all requested checks passed, 2 a check failed,
1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from randloc.config import ConfigError, RunConfig, load_config
from randloc.functionals import (
    Scope,
    check_ilf_axioms,
    check_local_axioms,
    check_vertical_invariance,
    default_grid_shifts,
    enumerate_index_pairs,
    valid_node_range,
)
from randloc.orderedset import (
    CycleDetected,
    MultipleMaxima,
    build_minimal_representation,
    local_start_indices,
    locate_via_representation,
    window_eval,
)
from randloc.paths import Interval, save_path_csv
from randloc.pathchar import (
    MalformedProfile,
    check_combination_rules,
    check_location_monotonicity,
    compute_g_profile,
    partition_g_profile,
    pieces_to_json,
)
from randloc.processes import RngSeed, sample_paths
from randloc.statcheck import DiagnosticSuite, run_stationarity_diagnostic

__all__ = ["main"]

COMMANDS = ("simulate", "check-axioms", "represent", "profile", "diagnose")


def _sanitize(obj):
    """Make a payload JSON-safe and deterministic: plain python scalars,
    infinities as the string 'inf'."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


class _Run:
    def __init__(self, cfg: RunConfig, config_bytes: bytes, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.meta = {
            "schema": 1,
            "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
            "seed": cfg.seed.seed,
            "stream": cfg.seed.stream,
        }
        out_dir.mkdir(parents=True, exist_ok=True)

    def write_json(self, name: str, payload: dict) -> None:
        doc = dict(_sanitize(payload))
        doc["meta"] = self.meta
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        (self.out / name).write_text(text)

    def csv_header(self) -> str:
        return (f"# schema: {self.meta['schema']}\n"
                f"# config_sha256: {self.meta['config_sha256']}\n"
                f"# seed: {self.meta['seed']} stream: {self.meta['stream']}\n")

    def first_path(self):
        origin, step, count = self.cfg.grid
        return sample_paths(self.cfg.process, origin, step, count, 1,
                            self.cfg.seed)[0]


def _slug(func) -> str:
    return func.name


def _cmd_simulate(run: _Run) -> int:
    cfg = run.cfg
    origin, step, count = cfg.grid
    paths = sample_paths(cfg.process, origin, step, count, cfg.n, cfg.seed)
    for i, p in enumerate(paths):
        target = run.out / f"path_{i:04d}.csv"
        with target.open("w") as fh:
            fh.write(run.csv_header())
            save_path_csv(p, fh)
    return 0


def _cmd_check_axioms(run: _Run) -> int:
    cfg = run.cfg
    path = run.first_path()
    _, T = cfg.window
    shifts = cfg.axioms_shifts or default_grid_shifts(path)
    failed = False
    for k, func in enumerate(cfg.functionals):
        reports = []
        if func.scope is Scope.GLOBAL:
            reports.append(check_ilf_axioms(func, path, cap=cfg.axioms_cap,
                                            shifts=shifts))
            if func.claims_doubly:
                reports.append(check_vertical_invariance(
                    func, path, shifts=[-1.0, 0.5, 2.0]))
        else:
            reports.append(check_local_axioms(func, path, T=T,
                                              cap=cfg.axioms_cap,
                                              shifts=shifts))
        failed |= any(not r.passed for r in reports)
        run.write_json(f"axioms_{k}_{_slug(func)}.json", {
            "functional": func.describe(),
            "reports": [r.to_dict() for r in reports],
            "passed": all(r.passed for r in reports),
        })
    return 2 if failed else 0


def _cmd_represent(run: _Run) -> int:
    cfg = run.cfg
    path = run.first_path()
    _, T = cfg.window
    failed = False
    for k, func in enumerate(cfg.functionals):
        mode = cfg.represent_mode if func.scope is Scope.GLOBAL else "local"
        mismatches = []
        trials = 0
        try:
            rep = build_minimal_representation(func, path, mode, T=T,
                                               cap=cfg.represent_cap)
            if mode == "local":
                starts = local_start_indices(func, path, T)
                windows = [(path.node_time(i), path.node_time(i) + T)
                           for i in starts]
            else:
                lo, hi = valid_node_range(func, path)
                windows = [(path.node_time(i), path.node_time(j)) for i, j
                           in enumerate_index_pairs(lo, hi, cfg.represent_cap)]
            for a, b in windows:
                trials += 1
                got = locate_via_representation(rep, Interval(a, b))
                want = (window_eval(func, path, a, T) if mode == "local"
                        else func(path, Interval(a, b)))
                same = (got == want or abs(got - want) <= path.tol
                        if math.isfinite(got) and math.isfinite(want)
                        else math.isinf(got) and math.isinf(want))
                if not same:
                    mismatches.append((a, b, got, want))
            rep_doc = rep.to_dict()
        except (CycleDetected, MultipleMaxima) as exc:
            mismatches.append(("structure", str(exc)))
            rep_doc = {"error": str(exc)}
        failed |= bool(mismatches)
        run.write_json(f"representation_{k}_{_slug(func)}.json", rep_doc)
        run.write_json(f"roundtrip_{k}_{_slug(func)}.json", {
            "functional": func.describe(),
            "trials": trials,
            "mismatches": mismatches,
            "passed": not mismatches,
        })
    return 2 if failed else 0


def _cmd_profile(run: _Run) -> int:
    cfg = run.cfg
    path = run.first_path()
    _, T = cfg.window
    failed = False
    for k, func in enumerate(cfg.functionals):
        prof = compute_g_profile(func, path, T)
        buf = io.StringIO()
        prof.to_csv(buf)
        target = run.out / f"profile_{k}_{_slug(func)}.csv"
        target.write_text(run.csv_header() + buf.getvalue())
        try:
            pieces = partition_g_profile(prof)
            comb = check_combination_rules(pieces, prof)
            mono = check_location_monotonicity(prof)
            ok = comb.passed and mono.passed
            doc = {
                "functional": func.describe(),
                "pieces": json.loads(pieces_to_json(pieces)),
                "combination": comb.to_dict(),
                "monotonicity": mono.to_dict(),
                "passed": ok,
            }
        except MalformedProfile as exc:
            ok = False
            doc = {"functional": func.describe(), "error": str(exc),
                   "passed": False}
        failed |= not ok
        run.write_json(f"pieces_{k}_{_slug(func)}.json", doc)
    return 2 if failed else 0


def _cmd_diagnose(run: _Run) -> int:
    cfg = run.cfg
    a, T = cfg.window
    starts = cfg.diagnose_starts or [a]
    try:
        suite = DiagnosticSuite(functionals=tuple(cfg.functionals),
                                grid=cfg.grid, T=T, starts=tuple(starts),
                                n=cfg.n, bins=cfg.bins)
    except ValueError as exc:
        raise ConfigError(f"diagnose: {exc}") from exc
    verdict = run_stationarity_diagnostic(cfg.process, suite, cfg.seed)
    run.write_json("diagnostic.json", verdict.to_dict())
    return 2 if verdict.verdict == "INCONCLUSIVE" else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="randloc",
        description="Random-location functionals: simulation, axiom "
                    "checking, ordered-set representations, location "
                    "profiles, and stationarity diagnostics.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker hint; results are identical for any "
                             "value")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    try:
        config_bytes = Path(args.config).read_bytes()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = load_config(config_bytes.decode("utf-8"))
        if args.seed is not None:
            cfg.seed = RngSeed(args.seed, cfg.seed.stream)
        if args.out is not None:
            cfg.output_dir = args.out
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        run = _Run(cfg, config_bytes, Path(cfg.output_dir))
        handler = {
            "simulate": _cmd_simulate,
            "check-axioms": _cmd_check_axioms,
            "represent": _cmd_represent,
            "profile": _cmd_profile,
            "diagnose": _cmd_diagnose,
        }[args.command]
        return handler(run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
