"""Command line entry point ``semibohm``.

Subcommands::

    semibohm run --scenario NAME [--epsilon E] [--modes N] [--tsteps K] [--dt D]
                 [--seeds M] [--out DIR] [--config FILE]
    semibohm sweep --scenario NAME --epsilon-list 1e-1,1e-2,1e-3 --out DIR
    semibohm report --in DIR

Exit codes: 0 success, 2 audit failure, 3 configuration error,
4 numerical abort. ``SEMIBOHM_THREADS`` caps the number of worker processes
used by ``sweep`` and the BLAS threads of every worker.
"""
import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from threadpoolctl import threadpool_limits

from .errors import ConfigError, NumericalAbort
from .runner import find_runs, load_run, run_scenario, summary_report
from .scenarios import SCENARIOS, parse_config, with_changes

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_ABORT = 0, 2, 3, 4
THREADS_ENV = "SEMIBOHM_THREADS"


def thread_cap():
    """Worker cap from ``SEMIBOHM_THREADS`` (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def _epsilon_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty epsilon list")
    return values


def build_parser():
    parser = argparse.ArgumentParser(
        prog="semibohm",
        description="Semiclassical Schroedinger runs with Bohmian and classical trajectories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--modes", type=int)
    run.add_argument("--tsteps", type=int)
    run.add_argument("--dt", type=float)
    run.add_argument("--seeds", type=int)
    run.add_argument("--out", default=None)
    run.add_argument("--config", default=None)

    sweep = sub.add_parser("sweep", help="run one scenario for several epsilon values")
    sweep.add_argument("--scenario", required=True, choices=SCENARIOS)
    sweep.add_argument("--epsilon-list", required=True, type=_epsilon_list)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--config", default=None)

    report = sub.add_parser("report", help="summarize finished runs")
    report.add_argument("--in", dest="indir", required=True)
    return parser


def _run_one(spec, out_dir, threads):
    with threadpool_limits(limits=threads):
        report = run_scenario(spec, out_dir)
    return report


def _cmd_run(args, threads):
    spec = parse_config(
        args.config,
        scenario=args.scenario,
        epsilon=args.epsilon,
        modes=args.modes,
        tsteps=args.tsteps,
        dt=args.dt,
        seeds=args.seeds,
    )
    report = _run_one(spec, args.out, threads)
    print(summary_report([report]), end="")
    return EXIT_OK if report.passed else EXIT_AUDIT


def _cmd_sweep(args, threads):
    base = parse_config(args.config, scenario=args.scenario)
    specs = [with_changes(base, epsilon=e) for e in args.epsilon_list]
    dirs = [os.path.join(args.out, f"eps_{e!r}") for e in args.epsilon_list]
    workers = min(threads, len(specs))
    if workers == 1:
        reports = [_run_one(s, d, 1) for s, d in zip(specs, dirs)]
    else:
        inner = max(1, threads // workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_one, specs, dirs, [inner] * len(specs)))
    print(summary_report(reports), end="")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_AUDIT


def _cmd_report(args):
    runs = find_runs(args.indir)
    if not runs:
        raise ConfigError(f"no run directories under {args.indir}")
    reports = [load_run(d) for d in runs]
    print(summary_report(reports), end="")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_AUDIT


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        threads = thread_cap()
        if args.command == "run":
            if args.scenario is None and args.config is None:
                raise ConfigError("give --scenario or --config")
            return _cmd_run(args, threads)
        if args.command == "sweep":
            return _cmd_sweep(args, threads)
        return _cmd_report(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
