"""Command line: ``ffdlt run | seeds | stats``."""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import ConfigError, default_mode, guess_format, parse_config
from .experiment import run_experiment
from .graph import ParseError, induced_lcc, parse_edge_list, restrict_for_diffusion, sample_weights, trust_fraction
from .rng import run_generator
from .seeding import WEIGHT_BASED, StrategyError, canonical_strategy, select_seeds


def _overrides(extra: list[str]) -> dict[str, str]:
    """Turn ``--key value`` / ``--key=value`` pairs into a dict."""
    out: dict[str, str] = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for --{key}")
            value = extra[i + 1]
            i += 2
        out[key] = value
    return out


def cmd_run(args, extra) -> int:
    cfg = parse_config(args.config, _overrides(extra))
    summary = run_experiment(cfg, workers=args.workers)
    print(f"wrote {cfg.output}/runs.csv, summary.json, seeds.csv, meta.json ({summary['runs']} runs)")
    return 0


def cmd_seeds(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    fmt = args.format or guess_format(args.dataset)
    net = restrict_for_diffusion(parse_edge_list(args.dataset, fmt), args.mode or default_mode(args.dataset))
    strategy = canonical_strategy(args.strategy)
    g = None
    if strategy in WEIGHT_BASED:
        g = sample_weights(net, trust_fraction(net), run_generator(args.master_seed, args.run))
    ranking = select_seeds(strategy, args.k, net, g, newcomer_inverted=args.newcomer_inverted)
    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        ranking.write_csv(out, labels=net.labels)
    finally:
        if args.output:
            out.close()
    if ranking.shortfall:
        print(f"warning: only {len(ranking)} candidates for k={args.k}", file=sys.stderr)
    return 0


def dataset_stats(path: str, fmt: str) -> dict:
    net = parse_edge_list(path, fmt)
    lcc = induced_lcc(net)
    m = net.edge_count
    return {
        "nodes": net.node_count,
        "edges": m,
        "negative_pct": 100.0 * (1.0 - trust_fraction(net)) if m else 0.0,
        "avg_degree": m / net.node_count if net.node_count else 0.0,
        "lcc_nodes": lcc.node_count,
        "lcc_edges": lcc.edge_count,
        "timestamped": net.has_timestamps,
    }


def cmd_stats(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    start = time.perf_counter()
    s = dataset_stats(args.dataset, args.format or guess_format(args.dataset))
    print(f"dataset           {args.dataset}")
    print(f"#nodes            {s['nodes']}")
    print(f"#edges            {s['edges']}")
    print(f"% negative edges  {s['negative_pct']:.1f}%")
    print(f"avg. degree       {s['avg_degree']:.2f}")
    print(f"strong LCC #nodes {s['lcc_nodes']}")
    print(f"strong LCC #edges {s['lcc_edges']}")
    print(f"timestamped       {'yes' if s['timestamped'] else 'no'}")
    print(f"elapsed           {time.perf_counter() - start:.1f}s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ffdlt", description="Friend-foe dynamic LT diffusion experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment; extra --key value pairs override the file")
    run.add_argument("--config", required=True)
    run.add_argument("--workers", type=int, default=None, help="worker processes (default: $FFDLT_WORKERS or 1)")
    run.set_defaults(func=cmd_run)

    seeds = sub.add_parser("seeds", help="rank seed candidates")
    seeds.add_argument("--dataset", required=True)
    seeds.add_argument("--strategy", required=True)
    seeds.add_argument("-k", type=int, required=True)
    seeds.add_argument("--format", default=None)
    seeds.add_argument("--mode", choices=("full", "lcc"), default=None)
    seeds.add_argument("--master-seed", type=int, default=0)
    seeds.add_argument("--run", type=int, default=0, help="weight sample used by m/i-sources")
    seeds.add_argument("--newcomer-inverted", action="store_true")
    seeds.add_argument("--output", "-o", default=None)
    seeds.set_defaults(func=cmd_seeds)

    stats = sub.add_parser("stats", help="dataset statistics")
    stats.add_argument("--dataset", required=True)
    stats.add_argument("--format", default=None)
    stats.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if extra and args.command != "run":
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        return args.func(args, extra)
    except (ConfigError, StrategyError, ParseError, FileNotFoundError) as exc:
        print(f"ffdlt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
