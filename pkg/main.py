import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from config import Config, load_run_config
from errors import SamplerError
from chains.seeding import flood_fill_seed, recursive_tree_seed
from graph.grid import make_grid, voting_grid
from graph.io import dump_graph_json, load_graph_json, write_assignment_csv
from graph.partition import population_deviation
from services.ensemble_store import (
    compare_ensembles,
    ensemble_frame,
    outlier_report,
    parse_predicate,
    read_ensemble,
    summarize,
    winnow,
)
from services.monitoring import MonitoringService
from services.rng import RandomSource
from services.runner import ChainRunner
from services.verification import VerificationSuite

logger = logging.getLogger("ensemble_cli")


def parse_grid(text: str) -> int:
    """'100x100' или '100' -> сторона квадратной решетки"""
    parts = text.lower().split("x")
    if len(parts) == 2 and parts[0] != parts[1]:
        raise argparse.ArgumentTypeError("only square grids NxN are supported")
    try:
        return int(parts[0])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse grid size '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Flip and ReCom ensembles of balanced connected graph partitions.")
    parser.add_argument("--log-level", default=None, help=f"Logging level (default: {Config.LOG_LEVEL})")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a chain and write a JSON Lines ensemble")
    run.add_argument("--config", default=None, help="Flat JSON run configuration")
    run.add_argument("--graph", default=None, help="Graph JSON file")
    run.add_argument("--grid", type=parse_grid, default=None, help="Synthetic grid NxN")
    run.add_argument("--districts", type=int, default=None)
    run.add_argument("--pattern", default=None, help="rows:m | cols:m | none")
    run.add_argument("--seed-method", default=None, help="stripes | file | recursive-tree | flood-fill")
    run.add_argument("--assignment", default=None, help="Seed assignment CSV (node_id,district)")
    run.add_argument("--chain", default=None, help="flip | uniform-flip | uniform-flip-fast | recom | recom-general")
    run.add_argument("--merge-count", type=int, default=None, help="Districts merged by recom-general")
    run.add_argument("--steps", type=int, default=None)
    run.add_argument("--pop-tol", type=float, default=None)
    run.add_argument("--cut-cap", default=None, help="Absolute count or fraction of |E| (e.g. 5%%)")
    run.add_argument("--max-share", type=float, default=None)
    run.add_argument("--burn", type=int, default=None)
    run.add_argument("--interval", type=int, default=None)
    run.add_argument("--beta-schedule", default=None, help="lin:a,b,beta0,beta1 | const:beta")
    run.add_argument("--replicas", type=int, default=None)
    run.add_argument("--swap-interval", type=int, default=None)
    run.add_argument("--stats", default=None, help="Comma-separated statistic names")
    run.add_argument("--rng-seed", type=int, default=None)
    run.add_argument("--out", default=None, help="Output path (default: stdout)")
    run.add_argument("--validate-steps", action="store_true", default=None,
                     help="Recompute partition state after every step")

    seed = commands.add_parser("seed", help="Build a seed plan and write its assignment CSV")
    seed.add_argument("--graph", default=None)
    seed.add_argument("--grid", type=parse_grid, default=None)
    seed.add_argument("--districts", type=int, required=True)
    seed.add_argument("--method", choices=("recursive-tree", "flood-fill"), default="recursive-tree")
    seed.add_argument("--pop-tol", type=float, default=0.0)
    seed.add_argument("--rng-seed", type=int, default=Config.DEFAULT_RNG_SEED)
    seed.add_argument("--out", required=True)

    grid = commands.add_parser("grid", help="Write a synthetic grid graph and its stripe plan")
    grid.add_argument("--grid", type=parse_grid, required=True)
    grid.add_argument("--districts", type=int, required=True)
    grid.add_argument("--pattern", default="none")
    grid.add_argument("--out", required=True, help="Graph JSON path")
    grid.add_argument("--assignment-out", default=None, help="Stripe plan CSV path")

    verify = commands.add_parser("verify", help="Compare chains with exact oracle distributions")
    verify.add_argument("--rng-seed", type=int, default=Config.DEFAULT_RNG_SEED)
    verify.add_argument("--flip-steps", type=int, default=1_000_000)
    verify.add_argument("--recom-draws", type=int, default=100_000)
    verify.add_argument("--tree-draws", type=int, default=100_000)

    stats = commands.add_parser("stats", help="Histograms, share CSVs and outlier reports of an ensemble")
    stats.add_argument("--ensemble", required=True)
    stats.add_argument("--out-prefix", default=None)
    stats.add_argument("--winnow", action="append", default=[], help="Predicate such as max_share<=0.6 (repeatable)")
    stats.add_argument("--reference-stats", default=None, help="JSON object of a reference plan's statistics")
    stats.add_argument("--compare", default=None, help="Second ensemble for a total-variation comparison")
    stats.add_argument("--statistic", default="cut_edges", help="Statistic used by --compare")
    return parser


# ------------------------------
# Команды
# ------------------------------

RUN_OVERRIDES = {
    "graph": "graph", "grid": "grid", "districts": "districts", "pattern": "pattern",
    "seed_method": "seed_method", "assignment": "assignment", "chain": "chain",
    "merge_count": "merge_count", "steps": "steps", "pop_tol": "pop_tolerance",
    "cut_cap": "cut_edge_cap", "max_share": "max_share", "burn": "burn_in",
    "interval": "interval", "beta_schedule": "beta_schedule", "replicas": "replicas",
    "swap_interval": "swap_interval", "stats": "stats", "rng_seed": "rng_seed",
    "out": "out", "validate_steps": "validate_steps",
}


def command_run(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = {key: getattr(args, attr) for attr, key in RUN_OVERRIDES.items()}
    config = load_run_config(args.config, overrides)
    runner = ChainRunner(config, MonitoringService())
    if config.out:
        with open(config.out, "w", encoding="utf-8") as handle:
            count = runner.run(handle)
        logger.info(f"{count} records written to {config.out}")
    else:
        runner.run(sys.stdout)
    return 0


def command_seed(args: argparse.Namespace) -> int:
    if (args.graph is None) == (args.grid is None):
        logger.error("seed needs exactly one of --graph or --grid")
        return 2
    graph = load_graph_json(args.graph) if args.graph else voting_grid(args.grid)
    rng = RandomSource(args.rng_seed)
    if args.method == "recursive-tree":
        partition = recursive_tree_seed(graph, args.districts, args.pop_tol, rng)
    else:
        partition = flood_fill_seed(graph, args.districts, args.pop_tol, rng)
    write_assignment_csv(partition, args.out)
    logger.info(f"Seed plan: {partition.cut_edge_count} cut edges, "
                f"population deviation {population_deviation(partition):.4f}")
    return 0


def command_grid(args: argparse.Namespace) -> int:
    graph, stripes = make_grid(args.grid, args.districts, args.pattern)
    dump_graph_json(graph, args.out)
    if args.assignment_out:
        write_assignment_csv(stripes, args.assignment_out)
    return 0


def command_verify(args: argparse.Namespace) -> int:
    suite = VerificationSuite(args.rng_seed, args.flip_steps, args.recom_draws, args.tree_draws)
    results = suite.run()
    for result in results:
        status = "ok" if result.passed else "FAIL"
        print(f"{status:4} {result.name}: {result.value:.6g} (threshold {result.threshold})")
    return 0 if all(result.passed for result in results) else 1


def command_stats(args: argparse.Namespace) -> int:
    header, records = read_ensemble(args.ensemble)
    for text in args.winnow:
        before = len(records)
        records = winnow(records, parse_predicate(text))
        logger.info(f"Winnowed by {text}: {len(records)} of {before} records kept")

    prefix = args.out_prefix or os.path.splitext(args.ensemble)[0]
    summarize(records, prefix)

    if args.reference_stats:
        with open(args.reference_stats, "r", encoding="utf-8") as handle:
            reference = json.load(handle)
        report = outlier_report(ensemble_frame(records), reference)
        path = f"{prefix}_outliers.csv"
        report.to_csv(path, index=False)
        print(report.to_string(index=False))

    if args.compare:
        _, other = read_ensemble(args.compare)
        distance = compare_ensembles(records, other, args.statistic)
        print(f"total variation ({args.statistic}): {distance:.6f}")
    return 0


COMMANDS = {
    "run": command_run,
    "seed": command_seed,
    "grid": command_grid,
    "verify": command_verify,
    "stats": command_stats,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or Config.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        logger.error(f"Invalid run configuration: {e}")
        return 2
    except SamplerError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
