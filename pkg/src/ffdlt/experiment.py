"""Monte-Carlo experiment orchestration.

Run ``r`` draws everything (weights, node parameters, tie seed) from
``run_generator(master_seed, r)``, in that order, so results are independent
of worker count and of how many other runs exist. Workers return plain
results; a single collector writes all files in run order.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .dynamics import ModelParams, NodeParams, TieBreakRule
from .engine import compute_horizon, default_backend, run_model, run_noncompetitive
from .graph import TrustNetwork, parse_edge_list, restrict_for_diffusion, sample_weights, trust_fraction
from .metrics import (
    activation_loss,
    aggregate_runs,
    cumulative_transition_series,
    deactivation_stats,
    mean_series,
    shared_spread_stats,
    spread_series,
    stressed_split,
    switch_stats,
)
from .rng import run_generator, tie_seed_from
from .seeding import WEIGHT_BASED, SeedRanking, select_seeds

log = logging.getLogger(__name__)

WORKERS_ENV = "FFDLT_WORKERS"


@dataclass
class RunResult:
    run: int
    series: list[tuple[str, str, np.ndarray]]
    scalars: dict[str, float]
    seeds: list[tuple[str, SeedRanking]]
    horizon: int
    shared: Optional[dict] = None


@dataclass
class Context:
    cfg: ExperimentConfig
    net: TrustNetwork
    p: float
    fixed: dict[str, SeedRanking] = field(default_factory=dict)


def load_network(cfg: ExperimentConfig) -> TrustNetwork:
    net = parse_edge_list(cfg.dataset, cfg.format)
    return restrict_for_diffusion(net, cfg.mode)


def _rank(ctx: Context, strategy: str, g, k: int) -> SeedRanking:
    if strategy in ctx.fixed:
        return ctx.fixed[strategy]
    return select_seeds(strategy, k, ctx.net, g, newcomer_inverted=ctx.cfg.newcomer_inverted)


def _disjoint_b(ranking_b: SeedRanking, seeds_a: list[int], k: int, ctx: Context, strategy: str, g) -> SeedRanking:
    """Campaign B's top-k after removing campaign A's seeds."""
    taken = set(seeds_a)
    if not taken.intersection(ranking_b.nodes):
        return ranking_b
    wide = select_seeds(strategy, k + len(taken), ctx.net, g, newcomer_inverted=ctx.cfg.newcomer_inverted) \
        if strategy not in ctx.fixed else ctx.fixed[strategy + "#wide"]
    keep = [(v, s) for v, s in zip(wide.nodes, wide.scores) if v not in taken][:k]
    return SeedRanking(tuple(v for v, _ in keep), tuple(s for _, s in keep), wide.strategy, k,
                       shortfall=len(keep) < k)


def simulate_run(ctx: Context, r: int, backend: Optional[str] = None) -> RunResult:
    cfg = ctx.cfg
    rng = run_generator(cfg.master_seed, r)
    g = sample_weights(ctx.net, ctx.p, rng)
    params = NodeParams.uniform(ctx.net.node_count, rng)
    tie_seed = tie_seed_from(rng)
    tie = TieBreakRule(cfg.prob_a)

    rank_a = _rank(ctx, cfg.strategy, g, cfg.k)
    seeds_a = rank_a.seeds
    picked = [("A", rank_a)]
    series: list[tuple[str, str, np.ndarray]] = []
    scalars: dict[str, float] = {}
    shared = None

    if cfg.model == "nc":
        mp = ModelParams(cfg.delta, cfg.lam, cfg.horizon, tie)
        trace = run_noncompetitive(g, seeds_a, params, mp, tie_seed, backend)
        horizon = trace.horizon
        for s in spread_series(trace):
            series.append((s.name, s.campaign, s.values))
        stressed, unstressed = stressed_split(trace, g)
        series += [(stressed.name, "A", stressed.values), (unstressed.name, "A", unstressed.values)]
        if cfg.activation_loss:
            base_mp = ModelParams(cfg.delta, 0.0, cfg.horizon, tie)
            base = run_noncompetitive(g, seeds_a, params, base_mp, tie_seed, backend)
            loss = activation_loss(base, trace)
            series.append((loss.name, "A", loss.values))
        if cfg.strategy_b is not None:
            rank_b = _rank(ctx, cfg.strategy_b, g, cfg.k)
            picked.append(("B", rank_b))
            trace_b = run_noncompetitive(g, rank_b.seeds, params, mp, tie_seed, backend)
            horizon = max(horizon, trace_b.horizon)
            series.append(("spread", "B", spread_series(trace_b)[0].values))
            shared = shared_spread_stats(trace, trace_b).as_dict()
    else:
        mp_h = ModelParams(cfg.delta, cfg.lam, None, tie)
        horizon = cfg.horizon or compute_horizon(g, seeds_a, params, mp_h, backend)
        delay_b = math.floor(cfg.delay_fraction * horizon)
        rank_b = _disjoint_b(_rank(ctx, cfg.strategy_b, g, cfg.k), seeds_a, cfg.k, ctx, cfg.strategy_b, g)
        picked.append(("B", rank_b))
        mp = ModelParams(cfg.delta, cfg.lam, horizon, tie)
        trace = run_model(cfg.model, g, seeds_a, rank_b.seeds, delay_b, params, mp, tie_seed, backend)
        for s in spread_series(trace):
            series.append((s.name, s.campaign, s.values))
        for s in cumulative_transition_series(trace, "switch"):
            series.append((s.name, s.campaign, s.values))
        for camp, c in switch_stats(trace).items():
            scalars[f"switch_unique_{camp}"] = c.unique
            scalars[f"switch_total_{camp}"] = c.total
        if cfg.model == "np":
            for s in cumulative_transition_series(trace, "deactivate"):
                series.append((s.name, s.campaign, s.values))
            for camp, c in deactivation_stats(trace).items():
                scalars[f"deactivation_unique_{camp}"] = c.unique
                scalars[f"deactivation_total_{camp}"] = c.total
        scalars["delay_B"] = delay_b
        scalars["skipped_B_seeds"] = trace.meta["skipped_B_seeds"]

    scalars["horizon"] = horizon
    for name, camp, values in series:
        scalars[f"{name}_{camp}"] = float(values[-1])
    return RunResult(r, series, scalars, picked, horizon, shared)


_CTX: Optional[Context] = None
_BACKEND: Optional[str] = None


def _init_worker(ctx: Context, backend: Optional[str]) -> None:
    global _CTX, _BACKEND
    _CTX, _BACKEND = ctx, backend


def _worker(r: int) -> RunResult:
    return simulate_run(_CTX, r, _BACKEND)


def prepare_context(cfg: ExperimentConfig, net: Optional[TrustNetwork] = None,
                    fixed_seeds_from_run: Optional[int] = None) -> Context:
    net = net if net is not None else load_network(cfg)
    ctx = Context(cfg, net, trust_fraction(net))
    pin = fixed_seeds_from_run if fixed_seeds_from_run is not None else cfg.fixed_seeds_from_run
    strategies = [cfg.strategy] + ([cfg.strategy_b] if cfg.strategy_b else [])
    for strategy in strategies:
        if strategy in WEIGHT_BASED and pin is None:
            continue
        g = None
        if strategy in WEIGHT_BASED:
            g = sample_weights(net, ctx.p, run_generator(cfg.master_seed, pin))
        ctx.fixed[strategy] = select_seeds(strategy, cfg.k, net, g, cfg.newcomer_inverted)
        ctx.fixed[strategy + "#wide"] = select_seeds(strategy, 2 * cfg.k, net, g, cfg.newcomer_inverted)
    return ctx


def worker_count(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return max(1, explicit)
    raw = os.environ.get(WORKERS_ENV)
    return max(1, int(raw)) if raw else 1


def execute_runs(ctx: Context, workers: int = 1, backend: Optional[str] = None) -> list[RunResult]:
    runs = range(ctx.cfg.runs)
    if workers <= 1 or ctx.cfg.runs == 1:
        return [simulate_run(ctx, r, backend) for r in runs]
    mp_ctx = multiprocessing.get_context("fork")
    chunk = max(1, ctx.cfg.runs // (workers * 4))
    with ProcessPoolExecutor(workers, mp_context=mp_ctx, initializer=_init_worker,
                             initargs=(ctx, backend)) as pool:
        return list(pool.map(_worker, runs, chunksize=chunk))


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() and abs(x) < 2**53 else repr(x)


def render_runs_csv(results: list[RunResult]) -> str:
    """One row per (run, step, metric, campaign); series padded to a common length."""
    length = max(len(v) for res in results for _, _, v in res.series)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "step", "metric", "campaign", "value"])
    for res in results:
        padded = [(n, c, np.concatenate((v, np.repeat(v[-1:], length - len(v))))) for n, c, v in res.series]
        for t in range(length):
            for name, camp, v in padded:
                w.writerow([res.run, t, name, camp, _fmt(v[t])])
    return buf.getvalue()


def render_seeds_csv(results: list[RunResult], labels: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "campaign", "strategy", "rank", "node", "score"])
    for res in results:
        for camp, ranking in res.seeds:
            for rank, (v, s) in enumerate(zip(ranking.nodes, ranking.scores), start=1):
                w.writerow([res.run, camp, ranking.strategy, rank, int(labels[v]), repr(float(s))])
    return buf.getvalue()


def build_summary(cfg: ExperimentConfig, results: list[RunResult]) -> dict:
    scal = aggregate_runs([res.scalars for res in results])
    # the output location is echoed in meta.json only, so summaries compare across directories
    echo = {k: v for k, v in cfg.as_dict().items() if k != "output"}
    summary: dict = {
        "config": echo,
        "runs": len(results),
        "metrics": {k: v.as_dict() for k, v in sorted(scal.items())},
        "series_mean": {},
    }
    keys = [(n, c) for n, c, _ in results[0].series]
    for name, camp in keys:
        vals = [v for res in results for n, c, v in res.series if (n, c) == (name, camp)]
        summary["series_mean"][f"{name}_{camp}"] = [float(x) for x in mean_series(vals)]
    if results[0].shared is not None:
        shared = aggregate_runs([res.shared for res in results])
        summary["shared_stats"] = {k: v.mean for k, v in shared.items()}
        summary["shared_stats_detail"] = {k: v.as_dict() for k, v in shared.items()}
    if cfg.model != "nc":
        summary["switch_stats"] = {
            camp: {"unique": scal[f"switch_unique_{camp}"].mean, "total": scal[f"switch_total_{camp}"].mean}
            for camp in ("A", "B")
        }
    if cfg.model == "np":
        summary["deactivation_stats"] = {
            camp: {"unique": scal[f"deactivation_unique_{camp}"].mean,
                   "total": scal[f"deactivation_total_{camp}"].mean}
            for camp in ("A", "B")
        }
    return summary


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None, backend: Optional[str] = None,
                   net: Optional[TrustNetwork] = None) -> dict:
    """Execute all runs and write ``runs.csv``, ``summary.json``, ``seeds.csv``
    and ``meta.json`` into ``cfg.output``. Returns the summary."""
    ctx = prepare_context(cfg, net)
    n_workers = worker_count(workers)
    log.info("running %d runs on %d nodes / %d edges with %d worker(s)",
             cfg.runs, ctx.net.node_count, ctx.net.edge_count, n_workers)
    results = execute_runs(ctx, n_workers, backend)
    summary = build_summary(cfg, results)
    os.makedirs(cfg.output, exist_ok=True)
    with open(os.path.join(cfg.output, "runs.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(render_runs_csv(results))
    with open(os.path.join(cfg.output, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(cfg.output, "seeds.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(render_seeds_csv(results, ctx.net.labels))
    meta = {
        "config": cfg.as_dict(),
        "version": __version__,
        "backend": backend or default_backend(),
        "nodes": ctx.net.node_count,
        "edges": ctx.net.edge_count,
        "trust_fraction": ctx.p,
        "run_seed_scheme": "numpy SeedSequence(entropy=master_seed, spawn_key=(run,)) -> PCG64",
        "activation_time_unit": "absolute step",
    }
    with open(os.path.join(cfg.output, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
