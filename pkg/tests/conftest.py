import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ffdlt.dynamics import NodeParams  # noqa: E402
from ffdlt.graph import DiffusionGraph, TrustNetwork  # noqa: E402

# four-node worked example: u -> v, z -> v, x -> z
U, Z, X, V = 0, 1, 2, 3
FOUR_NODE_WEIGHTS = {(U, V): 0.3, (Z, V): 0.5, (X, Z): 1.0}

WEIGHT_SET = (0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0)


def graph_from_weights(n, weights):
    """DiffusionGraph from ``{(u, v): w}``; zero weights become +0 trust edges."""
    items = sorted(weights.items())
    src = [u for (u, _), _ in items]
    dst = [v for (_, v), _ in items]
    sign = [1 if w >= 0 else -1 for _, w in items]
    net = TrustNetwork(n, src=src, dst=dst, sign=sign)
    w = np.array([weights[(int(u), int(v))] for u, v in zip(net.src, net.dst)], dtype=float)
    return DiffusionGraph(net, w)


def random_weights(n, rng, density=0.5, values=WEIGHT_SET):
    """Random dyadic weights meeting the per-node cumulative constraints."""
    weights = {}
    for v in range(n):
        pos = neg = 0.0
        for u in rng.permutation(n):
            u = int(u)
            if u == v or rng.random() > density:
                continue
            w = float(values[rng.integers(len(values))])
            if w > 0 and pos + w > 1:
                continue
            if w < 0 and neg - w > 1:
                continue
            pos += max(w, 0.0)
            neg += max(-w, 0.0)
            weights[(u, v)] = w
    return weights


@pytest.fixture
def four_node():
    g = graph_from_weights(4, FOUR_NODE_WEIGHTS)
    params = NodeParams.constant(4, 0.6, 0.0)
    return g, params


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """A timestamped konect-style file with sources, plus its snap twin."""
    from ffdlt.graph import SNAP_SIGNED, write_edge_list
    from ffdlt.synthetic import signed_network, write_konect

    net = signed_network(150, 1200, 0.2, np.random.default_rng(42), sources=12)
    d = tmp_path_factory.mktemp("data")
    konect = d / "out.small-signed"
    with open(konect, "w") as fh:
        write_konect(net, fh)
    snap = d / "small-signed.txt"
    with open(snap, "w") as fh:
        write_edge_list(net, fh, SNAP_SIGNED)
    return {"konect": str(konect), "snap": str(snap), "net": net}


# acceptance lines, echoed live and repeated in the terminal summary
_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(request):
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def record(criterion, status, detail):
        line = f"[acceptance {criterion}] {status}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        if tr is not None:
            tr.write_line("")
            tr.write_line(line)
        else:
            print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
