"""Command line: ``solve``, ``bench`` and ``check``.

Exit codes: 0 success, 1 usage error, 2 instance (or roster) error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields

from .aco import AcoParams, run_aco
from .constraints import HARD_IDS, evaluate
from .experiment import (default_experiments, emit_csv, load_experiments, run_experiment)
from .model import SOFT_IDS, InstanceError, format_roster, load_instance, parse_roster
from .parallel import WORKERS_ENV, ExecutorConfig, MasterSlaveExecutor
from .pso import PsoParams, run_pso

EXIT_OK, EXIT_USAGE, EXIT_INSTANCE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _coerce(text):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_params(pairs, cls):
    known = {f.name for f in fields(cls)}
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        if key not in known:
            raise UsageError(f"unknown parameter {key!r} for {cls.__name__}")
        out[key] = _coerce(value.strip())
    return out


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise InstanceError(f"cannot read instance: {exc}") from None


def cmd_solve(args):
    instance = _load(args.instance)
    cls = AcoParams if args.algorithm == "aco" else PsoParams
    params = parse_params(args.param, cls)
    params["seed"] = args.seed
    if args.iterations is not None:
        params["iterations"] = args.iterations
    if args.population is not None:
        params["ants" if args.algorithm == "aco" else "particles"] = args.population
    try:
        solver_params = cls(**params)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    with MasterSlaveExecutor(ExecutorConfig(args.workers)) as ex:
        solve = run_aco if args.algorithm == "aco" else run_pso
        result = solve(instance, solver_params, ex)
    breakdown = evaluate(result.best_schedule, instance)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(format_roster(result.best_schedule))
    summary = {
        "algorithm": args.algorithm,
        "best_fitness": result.best_fitness,
        "feasible": breakdown.feasible,
        "hard": breakdown.hard.counts,
        "soft_total": breakdown.total,
        "evaluations": result.evaluations,
        "wall_time_s": result.wall_time,
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        for k, v in summary.items():
            print(f"{k}: {v}")
        if not args.out:
            print(format_roster(result.best_schedule), end="")
    return EXIT_OK


def cmd_bench(args):
    instance = _load(args.instance)
    if args.workers is None and os.environ.get(WORKERS_ENV):
        args.workers = ExecutorConfig.from_env().workers
    try:
        if args.config:
            configs = load_experiments(args.config, workers=args.workers)
        else:
            configs = default_experiments(iterations=args.iterations or 1000,
                                          repeats=args.repeats or 10,
                                          workers=args.workers or 1)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad bench config: {exc}") from None
    for cfg in configs:
        def progress(pop, rep, result, label=cfg.label):
            if not args.quiet:
                print(f"{label} pop={pop} rep={rep} best={result.best_fitness} "
                      f"time={result.wall_time:.3f}s", file=sys.stderr)
        report = run_experiment(instance, cfg, progress)
        raw, agg = emit_csv(report, args.out)
        for pop, (st, mean_time) in report.aggregates.items():
            print(f"{cfg.label} pop={pop} n={st.n} mean={st.mean:.2f} sd={st.stddev:.2f} "
                  f"sem={st.sem:.2f} time={mean_time:.3f}s")
        print(f"wrote {raw} and {agg}")
    return EXIT_OK


def cmd_check(args):
    instance = _load(args.instance)
    try:
        with open(args.roster, encoding="utf-8") as fh:
            schedule = parse_roster(fh.read(), instance)
    except (OSError, ValueError) as exc:
        raise InstanceError(f"bad roster: {exc}") from None
    b = evaluate(schedule, instance)
    if args.json:
        print(json.dumps({"violations": b.violations, "weighted": b.weighted, "total": b.total,
                          "hard": b.hard.counts, "hard_penalty": b.hard_penalty,
                          "fitness": b.fitness, "feasible": b.feasible}, indent=2))
        return EXIT_OK
    print(f"{'id':<5}{'count':>7}{'weight':>8}{'penalty':>9}")
    for k in SOFT_IDS:
        print(f"{k:<5}{b.violations[k]:>7}{instance.constraints.weights[k]:>8}{b.weighted[k]:>9}")
    for k in HARD_IDS:
        print(f"{k:<5}{b.hard[k]:>7}")
    print(f"soft total: {b.total}")
    print(f"hard penalty: {b.hard_penalty}")
    print(f"fitness: {b.fitness}")
    print(f"feasible: {'yes' if b.feasible else 'no'}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="rostering", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("solve", help="run one solver on an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--algorithm", choices=("aco", "pso"), required=True)
    s.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="solver parameter override, repeatable")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--iterations", type=int)
    s.add_argument("--population", type=int)
    s.add_argument("--out", help="write the best roster here")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="population sweep, CSV output")
    b.add_argument("--instance", required=True)
    b.add_argument("--config", help="TOML experiment file (default: built-in sweep)")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--workers", type=int)
    b.add_argument("--iterations", type=int, help="built-in sweep only")
    b.add_argument("--repeats", type=int, help="built-in sweep only")
    b.add_argument("--quiet", action="store_true")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("check", help="evaluate a roster file")
    c.add_argument("--instance", required=True)
    c.add_argument("--roster", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve" and args.workers is None:
            args.workers = ExecutorConfig.from_env().workers
        if getattr(args, "workers", None) is not None and args.workers < 1:
            raise UsageError("--workers must be >= 1")
        return args.func(args)
    except InstanceError as exc:
        print(f"rostering: instance error: {exc}", file=sys.stderr)
        return EXIT_INSTANCE
    except (UsageError, ValueError) as exc:
        print(f"rostering: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
