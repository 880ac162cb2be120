"""Compare the compiled and pure-Python simulation kernels.

    python benchmarks/bench_kernels.py [--runs 50] [--model nc|sp|np] [--nodes 1178 --edges 31572]

Both backends run the same sampled graphs and parameters; traces are
checked for bit-identity before timings are reported.
"""
import argparse
import statistics
import sys
import time

import numpy as np

from ffdlt.dynamics import ModelParams, NodeParams, TieBreakRule
from ffdlt.engine import available_backends, compute_horizon, run_model
from ffdlt.graph import sample_weights, trust_fraction
from ffdlt.rng import run_generator, tie_seed_from
from ffdlt.seeding import stress_triads
from ffdlt.synthetic import signed_network


def prepare(args):
    rng = np.random.default_rng(args.seed)
    net = signed_network(args.nodes, args.edges, args.neg, rng, skew=0.8)
    seeds = list(stress_triads(net, 2 * args.k).nodes)
    p = trust_fraction(net)
    cases = []
    for r in range(args.runs):
        g_rng = run_generator(args.seed, r)
        g = sample_weights(net, p, g_rng)
        params = NodeParams.uniform(net.node_count, g_rng)
        cases.append((g, params, tie_seed_from(g_rng)))
    return net, seeds[:args.k], seeds[args.k:], cases


def time_backend(backend, args, seeds_a, seeds_b, cases):
    mp_base = ModelParams(args.delta, args.lam, None, TieBreakRule(args.prob_a))
    times, traces = [], []
    for g, params, tie in cases:
        start = time.perf_counter()
        if args.model == "nc":
            tr = run_model("nc", g, seeds_a, (), 0, params, mp_base, backend=backend)
        else:
            horizon = compute_horizon(g, seeds_a, params, mp_base, backend=backend)
            mp = ModelParams(args.delta, args.lam, horizon, TieBreakRule(args.prob_a))
            tr = run_model(args.model, g, seeds_a, seeds_b, horizon // 4, params, mp, tie, backend)
        times.append(time.perf_counter() - start)
        traces.append(tr)
    return times, traces


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--model", choices=("nc", "sp", "np"), default="nc")
    ap.add_argument("--nodes", type=int, default=1178)
    ap.add_argument("--edges", type=int, default=31572)
    ap.add_argument("--neg", type=float, default=0.216)
    ap.add_argument("-k", type=int, default=50)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--lam", type=float, default=5.0)
    ap.add_argument("--prob-a", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; only the Python backend is available", file=sys.stderr)
    net, seeds_a, seeds_b, cases = prepare(args)
    print(f"graph: {net.node_count} nodes, {net.edge_count} edges; model {args.model}; {args.runs} runs")

    results = {b: time_backend(b, args, seeds_a, seeds_b, cases) for b in backends}
    if len(results) == 2:
        same = all(a.same_dynamics(b) for a, b in zip(results["compiled"][1], results["python"][1]))
        print(f"traces bit-identical across backends: {same}")
    for b, (times, traces) in results.items():
        steps = statistics.mean(t.horizon for t in traces)
        print(f"{b:9s} total {sum(times):7.3f}s  per run {1000 * statistics.mean(times):8.2f} ms "
              f"(median {1000 * statistics.median(times):.2f} ms, mean steps {steps:.1f})")
    if len(results) == 2:
        ratio = sum(results["python"][0]) / sum(results["compiled"][0])
        print(f"speed-up compiled vs python: {ratio:.2f}x")


if __name__ == "__main__":
    main()
