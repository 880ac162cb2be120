"""Engine traces versus the naive interpreter in oracle.py."""
import itertools

import numpy as np
import pytest

from ffdlt.dynamics import ModelParams, NodeParams, TieBreakRule
from ffdlt.engine import available_backends, run_model

from conftest import graph_from_weights, random_weights
from oracle import interpret

CODES = {("active", "A"): 1, ("active", "B"): 2, ("quiescent", "A"): 3, ("quiescent", "B"): 4}


def oracle_states(states, n):
    out = np.zeros((len(states), n), dtype=np.int8)
    for t, snap in enumerate(states):
        for v, key in snap.items():
            out[t, v] = CODES[key]
    return out


def compare(n, weights, theta, tau, delta, lam, horizon, model, seeds_a, seeds_b, delay_b, prob_a, tie_seed, backend):
    g = graph_from_weights(n, weights)
    params = NodeParams(np.asarray(theta, float), np.asarray(tau, float))
    mp = ModelParams(delta=delta, lam=lam, horizon=horizon, tie_break=TieBreakRule(prob_a))
    if model == "nc":
        tr = run_model("nc", g, seeds_a, (), 0, params, mp, backend=backend)
    else:
        tr = run_model(model, g, seeds_a, seeds_b, delay_b, params, mp, rng=tie_seed, backend=backend)
    ev, st = interpret(n, weights, theta, tau, delta, lam, horizon, model, seeds_a,
                       seeds_b if model != "nc" else (), delay_b if model != "nc" else 0, prob_a, tie_seed)
    want = oracle_states(st, n)
    got = tr.states
    if horizon is None:
        # unbounded runs: engine and oracle both stop at the first quiet step
        return tr.event_tuples() == ev and got.shape == want.shape and np.array_equal(got, want)
    return tr.event_tuples() == ev and np.array_equal(got, want)


def random_case(rng):
    n = int(rng.integers(2, 7))
    weights = random_weights(n, rng, density=float(rng.uniform(0.3, 0.9)))
    theta = rng.choice([0.25, 0.5, 0.75, 1.0], n)
    tau = rng.choice([0.0, 1.0, 2.0], n)
    model = ["nc", "sp", "np"][int(rng.integers(3))]
    nodes = rng.permutation(n)
    ka = int(rng.integers(0, n))
    kb = int(rng.integers(0, n - ka + 1)) if model != "nc" else 0
    horizon = int(rng.integers(1, 9))
    return dict(
        n=n,
        weights=weights,
        theta=theta.tolist(),
        tau=tau.tolist(),
        delta=float(rng.choice([0.0, 0.1])),
        lam=float(rng.choice([0.0, 5.0])),
        horizon=None if model == "nc" and rng.random() < 0.3 else horizon,
        model=model,
        seeds_a=sorted(int(v) for v in nodes[:ka]),
        seeds_b=sorted(int(v) for v in nodes[ka:ka + kb]),
        delay_b=int(rng.integers(0, horizon)) if model != "nc" else 0,
        prob_a=float(rng.choice([1.0, 0.5, 0.0])),
        tie_seed=int(rng.integers(2**62)),
    )


@pytest.mark.slow
@pytest.mark.parametrize("backend", available_backends())
def test_random_instances_match_oracle(backend):
    rng = np.random.default_rng(20240917)
    mismatches = []
    for i in range(10_000):
        case = random_case(rng)
        if not compare(**case, backend=backend):
            mismatches.append((i, case))
    assert not mismatches, mismatches[:3]


@pytest.mark.parametrize("backend", available_backends())
@pytest.mark.parametrize("model", ["nc", "sp", "np"])
def test_exhaustive_two_nodes(backend, model):
    values = (0.0, 0.5, -0.5, 1.0, -1.0)
    count = 0
    for w01, w10 in itertools.product(values, repeat=2):
        weights = {k: w for k, w in (((0, 1), w01), ((1, 0), w10)) if w != 0.0}
        for theta in itertools.product((0.5, 1.0), repeat=2):
            for tau in itertools.product((0.0, 1.0), repeat=2):
                for delta, lam in itertools.product((0.0, 0.1), (0.0, 5.0)):
                    seed_sets = [([0], [1]), ([1], [0]), ([0, 1], []), ([0], [])]
                    for sa, sb in seed_sets:
                        if model == "nc":
                            sb = []
                        for delay in ((0, 2) if sb else (0,)):
                            assert compare(2, weights, list(theta), list(tau), delta, lam, 5, model,
                                           sa, sb, delay, 1.0, 7, backend)
                            count += 1
    assert count > 1000


@pytest.mark.parametrize("backend", available_backends())
def test_exhaustive_three_node_structures(backend):
    # every signed structure on 3 nodes with weights from {0, +-0.5}, seeds A={0}, B={1}
    pairs = [(u, v) for u in range(3) for v in range(3) if u != v]
    for combo in itertools.product((0.0, 0.5, -0.5), repeat=len(pairs)):
        weights = {p: w for p, w in zip(pairs, combo) if w != 0.0}
        for model in ("sp", "np"):
            assert compare(3, weights, [0.5, 0.5, 0.5], [0.0, 1.0, 0.0], 0.1, 5.0, 6, model,
                           [0], [1], 0, 0.5, 3, backend)
        assert compare(3, weights, [0.5, 0.5, 0.5], [1.0, 0.0, 2.0], 0.0, 0.0, None, "nc",
                       [0], [], 0, 1.0, 0, backend)
