"""Seed-selection strategies: M-Sources, I-Sources, Stress-Triads, Newcomers."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Optional

import numpy as np

from .graph import DiffusionGraph, TrustNetwork

STRATEGIES = ("m-sources", "i-sources", "stress-triads", "least-new", "most-new")
ALIASES = {"ms": "m-sources", "is": "i-sources", "st": "stress-triads", "ln": "least-new", "mn": "most-new"}
WEIGHT_BASED = ("m-sources", "i-sources")


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class SeedRanking:
    """Top-``k`` ranking; ``shortfall`` is set when fewer than ``k`` candidates exist."""

    nodes: tuple[int, ...]
    scores: tuple[float, ...]
    strategy: str
    k: int
    shortfall: bool = False

    def __len__(self):
        return len(self.nodes)

    @property
    def seeds(self) -> list[int]:
        return list(self.nodes)

    def write_csv(self, stream: IO[str], labels: Optional[np.ndarray] = None, header: bool = True) -> None:
        """``rank,node,score`` rows; ``labels`` maps dense ids to dataset ids."""
        w = csv.writer(stream, lineterminator="\n")
        if header:
            w.writerow(["rank", "node", "score"])
        for rank, (v, s) in enumerate(zip(self.nodes, self.scores), start=1):
            w.writerow([rank, labels[v] if labels is not None else v, repr(float(s))])


def _top_k(nodes: np.ndarray, scores: np.ndarray, k: int, strategy: str) -> SeedRanking:
    if k < 1:
        raise ValueError("k must be >= 1")
    order = np.lexsort((nodes, -scores))[:k]
    return SeedRanking(
        tuple(int(v) for v in nodes[order]),
        tuple(float(s) for s in scores[order]),
        strategy,
        k,
        shortfall=len(nodes) < k,
    )


def _source_scores(g: DiffusionGraph, positive: bool) -> tuple[np.ndarray, np.ndarray]:
    base = g.base
    n = base.node_count
    outdeg = base.out_degree()
    cand = (base.in_degree() == 0) & (outdeg > 0)
    w = g.weight
    w_pos = np.bincount(base.src, weights=np.where(w > 0, w, 0.0), minlength=n)
    w_neg = np.bincount(base.src, weights=np.where(w < 0, -w, 0.0), minlength=n)
    total = w_pos + w_neg
    cand &= total > 0
    nodes = np.flatnonzero(cand)
    frac = (w_pos[nodes] if positive else w_neg[nodes]) / total[nodes]
    return nodes, frac * np.log(outdeg[nodes])


def rank_m_sources(g: DiffusionGraph, k: int) -> SeedRanking:
    """Zero-in-degree nodes ranked by distrusted out-weight share times ln(out-degree)."""
    nodes, scores = _source_scores(g, positive=False)
    return _top_k(nodes, scores, k, "m-sources")


def rank_i_sources(g: DiffusionGraph, k: int) -> SeedRanking:
    """Zero-in-degree nodes ranked by trusted out-weight share times ln(out-degree)."""
    nodes, scores = _source_scores(g, positive=True)
    return _top_k(nodes, scores, k, "i-sources")


def stress_triad_counts(net: TrustNetwork, chunk: int = 1 << 22) -> np.ndarray:
    """Per-node count of triads (z, u, v) with z->v distrust, u->v trust, z->u trust."""
    n = net.node_count
    counts = np.zeros(n, dtype=np.int64)
    pos = net.sign > 0
    pos_keys = np.sort(net.src[pos].astype(np.int64) * n + net.dst[pos])
    if not len(pos_keys):
        return counts
    # trusted in-neighbours of each v, contiguous per v
    pos_in_src = net.src[pos].astype(np.int64)  # edges are sorted by dst
    pos_in_ptr = np.concatenate(([0], np.cumsum(np.bincount(net.dst[pos], minlength=n))))
    neg = np.flatnonzero(net.sign < 0)
    z_all = net.src[neg].astype(np.int64)
    v_all = net.dst[neg].astype(np.int64)
    fan = pos_in_ptr[v_all + 1] - pos_in_ptr[v_all]
    start = 0
    while start < len(neg):
        # grow the batch until its expansion reaches the chunk size
        csum = np.cumsum(fan[start:])
        stop = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        z = z_all[start:stop]
        v = v_all[start:stop]
        f = fan[start:stop]
        total = int(f.sum())
        if total:
            zz = np.repeat(z, f)
            offs = np.arange(total) - np.repeat(np.cumsum(f) - f, f)
            uu = pos_in_src[np.repeat(pos_in_ptr[v], f) + offs]
            keys = zz * n + uu
            idx = np.searchsorted(pos_keys, keys)
            idx[idx == len(pos_keys)] = 0
            hit = pos_keys[idx] == keys
            counts += np.bincount(zz[hit], minlength=n)
        start = stop
    return counts


def stress_triads(net: TrustNetwork, k: int) -> SeedRanking:
    counts = stress_triad_counts(net)
    nodes = np.flatnonzero(counts > 0)
    return _top_k(nodes, counts[nodes].astype(np.float64), k, "stress-triads")


def newcomer_start_times(net: TrustNetwork, inverted: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """(newcomer ids, start times).

    A newcomer has in- and out-edges and every in-edge older than its oldest
    out-edge; ``inverted`` flips this to every in-edge newer than it. The
    start time is the oldest in-edge timestamp.
    """
    if net.timestamps is None:
        raise StrategyError("strategy requires timestamped edges")
    n = net.node_count
    ts = net.timestamps
    big = np.iinfo(np.int64).max
    small = np.iinfo(np.int64).min
    in_min = np.full(n, big, dtype=np.int64)
    in_max = np.full(n, small, dtype=np.int64)
    out_min = np.full(n, big, dtype=np.int64)
    np.minimum.at(in_min, net.dst, ts)
    np.maximum.at(in_max, net.dst, ts)
    np.minimum.at(out_min, net.src, ts)
    has_both = (net.in_degree() > 0) & (net.out_degree() > 0)
    if inverted:
        ok = has_both & (in_min > out_min)
    else:
        ok = has_both & (in_max < out_min)
    nodes = np.flatnonzero(ok)
    return nodes, in_min[nodes]


def newcomers(net: TrustNetwork, k: int, which: str, inverted: bool = False) -> SeedRanking:
    if which not in ("least-new", "most-new"):
        raise ValueError("which must be 'least-new' or 'most-new'")
    nodes, start = newcomer_start_times(net, inverted)
    order = np.lexsort((nodes, start))
    nodes = nodes[order]
    older = (len(nodes) + 1) // 2
    pool = nodes[:older] if which == "least-new" else nodes[older:]
    outdeg = net.out_degree()[pool].astype(np.float64)
    return _top_k(pool, outdeg, k, which)


def select_seeds(strategy: str, k: int, net: TrustNetwork, g: Optional[DiffusionGraph] = None,
                 newcomer_inverted: bool = False) -> SeedRanking:
    """Dispatch by strategy name (full name or two-letter abbreviation)."""
    name = ALIASES.get(strategy.lower(), strategy.lower())
    if name in WEIGHT_BASED:
        if g is None:
            raise StrategyError(f"{name} needs sampled weights")
        return rank_m_sources(g, k) if name == "m-sources" else rank_i_sources(g, k)
    if name == "stress-triads":
        return stress_triads(net, k)
    if name in ("least-new", "most-new"):
        return newcomers(net, k, name, inverted=newcomer_inverted)
    raise StrategyError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def canonical_strategy(strategy: str) -> str:
    name = ALIASES.get(strategy.lower(), strategy.lower())
    if name not in STRATEGIES:
        raise StrategyError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    return name
