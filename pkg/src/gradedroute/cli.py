"""Command-line entry point: ``gradedroute {gen-topology,run,compare}``.

Exit codes: 0 success, 2 usage or invalid configuration, 3 no route,
4 I/O failure, 5 graded filtering disconnected the endpoints.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
from dataclasses import replace
from pathlib import Path

from .errors import InvalidConfig, RoutingError, StorageError
from .harness import (
    MODES,
    KnowledgeBase,
    RunConfig,
    aggregate_csv,
    build_topology,
    plot_csv,
    run_once,
    run_sweep,
    runs_csv,
    sweep_json,
)
from .netmodel import dumps_topology, load_topology, topology_digest

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_ROUTE = 3
EXIT_IO = 4
EXIT_DISCONNECTED = 5


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run-config file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("-o", "--output", type=Path)
    common.add_argument("--format", choices=("csv", "json"), default=None)

    parser = argparse.ArgumentParser(prog="gradedroute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-topology", parents=[common], help="write a seeded topology file")
    gen.add_argument("--nodes", type=int)
    gen.add_argument("--regions", type=int)
    gen.add_argument("--density", type=float, help="intra-region arc density (disables --mean-degree)")
    gen.add_argument("--mean-degree", type=float)

    run = sub.add_parser("run", parents=[common], help="route one topology in one mode")
    run.add_argument("--topology", type=Path, required=True)
    run.add_argument("--mode", choices=MODES, default="graded")
    run.add_argument("--demand", type=float)
    run.add_argument("--kb", type=Path, help="append the best route to this knowledge base")

    cmp_ = sub.add_parser("compare", parents=[common], help="graded vs. ungraded sweep")
    cmp_.add_argument("--nodes", type=_int_list, help="comma-separated node counts")
    cmp_.add_argument("--runs", type=int, help="runs per node count")
    cmp_.add_argument("--demand", type=float)
    cmp_.add_argument("--workers", type=int)
    cmp_.add_argument("--kb", type=Path)
    return parser


def load_config(path: Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc
    return RunConfig.from_dict(data)


def _with_ga(config: RunConfig, **changes) -> RunConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(config, ga=replace(config.ga, **changes)) if changes else config


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def cmd_gen_topology(args, config: RunConfig) -> int:
    params = config.topology
    if args.nodes is not None:
        params = replace(params, node_count=args.nodes)
    if args.regions is not None:
        params = replace(params, region_count=args.regions)
    if args.density is not None:
        params = replace(params, edge_density=args.density, mean_degree=None)
    if args.mean_degree is not None:
        params = replace(params, mean_degree=args.mean_degree)
    seed = args.seed if args.seed is not None else config.sweep.base_seed
    topo = build_topology(params, seed)
    _write(args.output, dumps_topology(topo))
    print(f"topology {topology_digest(topo)} seed={seed}", file=sys.stderr)
    return EXIT_OK


def cmd_run(args, config: RunConfig) -> int:
    topo = load_topology(args.topology)
    config = _with_ga(config, demand=args.demand)
    seed = args.seed
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed={seed} (pass --seed {seed} to reproduce)", file=sys.stderr)
    kb = KnowledgeBase(args.kb) if args.kb else None
    report = run_once(topo, args.mode, config, seed, kb=kb)
    _write(args.output, json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    if report.status == "disconnected":
        print("graded filtering left no source->destination path", file=sys.stderr)
        return EXIT_DISCONNECTED
    if report.status == "no_route":
        print("no route from source to destination", file=sys.stderr)
        return EXIT_NO_ROUTE
    print(
        f"{args.mode}: route_length={report.route_length} report_fitness={report.report_fitness:.4f} "
        f"config={report.config_digest}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_compare(args, config: RunConfig) -> int:
    sweep = config.sweep
    if args.nodes is not None:
        sweep = replace(sweep, node_counts=args.nodes)
    if args.runs is not None:
        sweep = replace(sweep, runs_per_count=args.runs)
    if args.seed is not None:
        sweep = replace(sweep, base_seed=args.seed)
    if args.workers is not None:
        sweep = replace(sweep, workers=args.workers)
    config = _with_ga(replace(config, sweep=sweep), demand=args.demand)
    kb = KnowledgeBase(args.kb) if args.kb else None
    result = run_sweep(config, kb=kb)

    out = args.output or Path("compare.csv")
    if args.format == "json":
        out.write_text(sweep_json(result))
    else:
        out.write_text(aggregate_csv(result))
        out.with_suffix(".plot.csv").write_text(plot_csv(result))
        out.with_suffix(".runs.csv").write_text(runs_csv(result))
    print(f"wrote {out} (config {config.digest()}, base seed {sweep.base_seed})", file=sys.stderr)
    empty = [row for row in result.aggregate if row["failures"] == row["runs"]]
    for row in empty:
        print(f"all runs failed: {row['mode']} at {row['node_count']} nodes", file=sys.stderr)
    return EXIT_NO_ROUTE if empty else EXIT_OK


COMMANDS = {"gen-topology": cmd_gen_topology, "run": cmd_run, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except InvalidConfig as exc:
        print(f"gradedroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, StorageError) as exc:
        print(f"gradedroute: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RoutingError as exc:
        print(f"gradedroute: {exc}", file=sys.stderr)
        return EXIT_NO_ROUTE


if __name__ == "__main__":
    sys.exit(main())
