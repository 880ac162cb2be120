"""Random signed, timestamped trust networks for tests and benchmarks."""
from __future__ import annotations

from typing import IO, Optional

import numpy as np

from .graph import KONECT_TIMESTAMPED, TrustNetwork, _build, write_edge_list


def signed_network(n: int, m: int, neg_fraction: float, rng: np.random.Generator,
                   sources: int = 0, skew: float = 1.0, timestamps: bool = True) -> TrustNetwork:
    """Directed signed graph with heavy-tailed degrees.

    Endpoint propensities follow ``rank ** -skew``. ``sources`` extra nodes
    get out-edges only, so they have zero in-degree.
    """
    core = n - sources
    weights = (np.arange(1, core + 1, dtype=float)) ** -skew
    weights /= weights.sum()
    src = rng.choice(core, size=int(m * 1.6), p=weights)
    dst = rng.choice(core, size=len(src), p=rng.permutation(weights))
    keep = src != dst
    src, dst = src[keep], dst[keep]
    key = rng.permutation(np.unique(src.astype(np.int64) * n + dst))[:m]
    src, dst = key // n, key % n
    if sources:
        extra = rng.integers(2, 12, size=sources)
        s_src = np.repeat(np.arange(core, n), extra)
        s_dst = rng.choice(core, size=len(s_src), p=weights)
        src = np.concatenate((src, s_src))
        dst = np.concatenate((dst, s_dst))
    sign = np.where(rng.random(len(src)) < neg_fraction, -1, 1)
    ts = None
    if timestamps:
        ts = rng.integers(1_000_000_000, 1_300_000_000, size=len(src))
    return _build(src.astype(np.int64), dst.astype(np.int64), sign.astype(np.int64), ts)


def wiki_vote_like(seed: int = 0, sources: int = 0) -> TrustNetwork:
    """Stand-in with the size and sign mix of the Wiki-Vote strong LCC.

    ``sources`` adds that many zero-in-degree voters pointing into the core,
    mimicking the in-frontier kept by the ``lcc`` restriction.
    """
    rng = np.random.default_rng(seed)
    return signed_network(1178 + sources, 31572, 0.216, rng, sources=sources, skew=0.8)


def write_konect(net: TrustNetwork, stream: IO[str]) -> None:
    stream.write("% asym signed\n")
    write_edge_list(net, stream, KONECT_TIMESTAMPED)
