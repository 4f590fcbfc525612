"""Command-line entry point: ``multilocal {run,report,plot,registry,demo-nbc}``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench, problems

EXIT_OK, EXIT_CONFIG, EXIT_FAILED_RUNS, EXIT_IO = 0, 1, 2, 3


def _cmd_run(args) -> int:
    config = bench.load_config(args.config)
    traces = bench.run_matrix(config, workers=args.workers)
    failed = [t for t in traces if t.failed]
    ok = [t for t in traces if not t.failed]
    if ok:
        bench.emit_csv(ok, args.output)
        print(f"wrote {sum(len(t.records) for t in ok)} records of {len(ok)} runs to {args.output}")
    for t in failed:
        print(f"FAILED {t.problem} {t.algorithm} rep {t.replication} seed {t.seed}: {t.error}",
              file=sys.stderr)
    return EXIT_FAILED_RUNS if failed else EXIT_OK


def _cmd_report(args) -> int:
    traces = bench.parse_csv(args.traces)
    aggregates = bench.aggregate_all(traces, args.metrics)
    for a in aggregates:
        if a.degenerate:
            print(f"note: {a.problem}/{a.algorithm} has a single replication", file=sys.stderr)
    bench.emit_aggregate_csv(aggregates, args.output)
    print(f"wrote {len(aggregates)} aggregate series to {args.output}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    aggregates = bench.parse_aggregate_csv(args.aggregates)
    bench.emit_plot(aggregates, args.metric, args.output, floor=args.floor)
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_registry(args) -> int:
    if args.write:
        problems.write_registry(seed_grid_density=args.density)
        print("registry rewritten")
        return EXIT_OK
    stored = problems.load_registry()
    bad = 0
    names = args.problems or problems.problem_names()
    for name in names:
        spec = problems.get_problem(name)
        try:
            fresh = problems.build_registry(spec, args.density)
        except problems.RegistryVerificationError as err:
            print(f"{name}: {err}")
            bad += 1
            continue
        old = stored.get(name)
        same = (old is not None and old.positions.shape == fresh.positions.shape
                and np.allclose(old.positions, fresh.positions, atol=1e-6)
                and np.allclose(old.values, fresh.values, atol=1e-9))
        print(f"{name}: {len(fresh)} minima, {'matches' if same else 'DIFFERS FROM'} stored registry")
        bad += not same
    return EXIT_FAILED_RUNS if bad else EXIT_OK


def _cmd_demo_nbc(args) -> int:
    from .demo import clustered_slope_sample, plot_nbc_demo

    points, values = clustered_slope_sample(np.random.default_rng(args.seed))
    nbc, ts = plot_nbc_demo(points, values, args.output)
    print(f"nearest-better clustering: {len(nbc)} selected, topographical selection: {len(ts)}")
    print(f"wrote {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multilocal", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a benchmark matrix from a JSON config")
    p.add_argument("config")
    p.add_argument("-o", "--output", default="traces.csv")
    p.add_argument("-j", "--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("report", help="aggregate a trace CSV into confidence bands")
    p.add_argument("traces")
    p.add_argument("-o", "--output", default="aggregate.csv")
    p.add_argument("--metrics", nargs="+", default=list(bench.METRICS[:-1]),
                   choices=bench.METRICS)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("plot", help="plot an aggregate CSV")
    p.add_argument("aggregates")
    p.add_argument("--metric", default="f_delta", choices=bench.METRICS)
    p.add_argument("-o", "--output", default="plot.svg")
    p.add_argument("--floor", type=float, default=bench.LOG_FLOOR)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("registry", help="validate or rebuild the optima registry")
    p.add_argument("problems", nargs="*")
    p.add_argument("--write", action="store_true", help="rebuild and overwrite the data file")
    p.add_argument("--density", type=int, default=200)
    p.set_defaults(func=_cmd_registry)

    p = sub.add_parser("demo-nbc", help="draw the clustered-slope basin demonstration")
    p.add_argument("-o", "--output", default="nbc_demo.svg")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=_cmd_demo_nbc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except bench.ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, bench.TraceIOError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
