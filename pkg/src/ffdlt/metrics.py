"""Measurements over simulation traces and their aggregation across runs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .engine import NONCOMPETITIVE, NONPROGRESSIVE, SimulationTrace
from .graph import DiffusionGraph


class MetricError(ValueError):
    pass


@dataclass
class MetricSeries:
    """Per-step values for t = 0..horizon."""

    name: str
    values: np.ndarray
    campaign: str = "-"

    @property
    def final(self) -> float:
        return float(self.values[-1]) if len(self.values) else 0.0

    def __len__(self):
        return len(self.values)


@dataclass
class SharedStats:
    spread_A: int
    spread_B: int
    shared_fraction: float
    pct_A_first: float
    avg_time_any: float
    avg_time_A_first: float
    avg_time_B_first: float
    shared_count: int = 0
    ties: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def spread_series(trace: SimulationTrace) -> list[MetricSeries]:
    """|S_t| per step; one series per campaign for competitive traces."""
    if trace.model == NONCOMPETITIVE:
        return [MetricSeries("spread", trace.active_mask(slice(None)).sum(axis=1).astype(float), "A")]
    return [
        MetricSeries("spread", trace.active_mask(slice(None), c).sum(axis=1).astype(float), camp)
        for c, camp in enumerate(("A", "B"))
    ]


def stressed_split(trace: SimulationTrace, g: DiffusionGraph) -> tuple[MetricSeries, MetricSeries]:
    """Split active nodes into those with at least one active foe and the rest."""
    if trace.model != NONCOMPETITIVE:
        raise MetricError("stressed split is defined for non-competitive traces only")
    base = g.base
    foe = g.weight < 0
    fsrc = base.src[foe]
    fdst = base.dst[foe]
    act = trace.active_mask(slice(None))
    # for each step, count nodes v active with some active u where u->v is distrust
    hit = np.zeros_like(act)
    both = act[:, fsrc] & act[:, fdst]
    for t in range(act.shape[0]):
        hit[t, fdst[both[t]]] = True
    stressed = hit.sum(axis=1).astype(float)
    total = act.sum(axis=1).astype(float)
    return MetricSeries("stressed", stressed, "A"), MetricSeries("unstressed", total - stressed, "A")


def _check_paired(a: SimulationTrace, b: SimulationTrace):
    keys = ("graph_digest", "node_params_digest", "seeds_A", "seeds_B", "delta")
    for k in keys:
        if a.meta.get(k) != b.meta.get(k):
            raise MetricError(f"traces are not paired: {k} differs")
    if a.model != b.model:
        raise MetricError("traces are not paired: model differs")
    if a.meta.get("lambda") != 0:
        raise MetricError("base trace must have lambda = 0")


def _pad(values: np.ndarray, length: int) -> np.ndarray:
    if len(values) >= length:
        return values[:length]
    return np.concatenate((values, np.repeat(values[-1:], length - len(values))))


def activation_loss(trace_base: SimulationTrace, trace_quiesced: SimulationTrace) -> MetricSeries:
    """Per-step percentage drop in spread caused by lambda > 0.

    Traces of different length are compared after extending the shorter one
    with its final state.
    """
    _check_paired(trace_base, trace_quiesced)
    length = max(len(trace_base.states), len(trace_quiesced.states))
    base = _pad(trace_base.active_mask(slice(None)).sum(axis=1).astype(float), length)
    quiet = _pad(trace_quiesced.active_mask(slice(None)).sum(axis=1).astype(float), length)
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = np.where(base > 0, 100.0 * (base - quiet) / np.where(base > 0, base, 1.0), 0.0)
    return MetricSeries("activation_loss", loss, "A")


@dataclass
class TransitionCounts:
    unique: int
    total: int


def _transition_stats(trace: SimulationTrace, kind: str, source_campaign: bool) -> dict[str, TransitionCounts]:
    ev = trace.events_of(kind)
    out = {}
    for c, camp in enumerate(("A", "B")):
        # switch events carry the new campaign; report by the campaign left
        mask = ev["campaign"] == (1 - c if source_campaign else c)
        nodes = ev["node"][mask]
        out[camp] = TransitionCounts(len(np.unique(nodes)), int(mask.sum()))
    return out


def switch_stats(trace: SimulationTrace) -> dict[str, TransitionCounts]:
    """Switches keyed by the campaign switched away from ("A" means A -> B)."""
    if trace.model == NONCOMPETITIVE:
        raise MetricError("switches are undefined for non-competitive traces")
    return _transition_stats(trace, "switch", source_campaign=True)


def deactivation_stats(trace: SimulationTrace) -> dict[str, TransitionCounts]:
    """Deactivations keyed by the campaign the node was active for."""
    if trace.model != NONPROGRESSIVE:
        raise MetricError("deactivations are only admitted by the non-progressive model")
    return _transition_stats(trace, "deactivate", source_campaign=False)


def cumulative_transition_series(trace: SimulationTrace, kind: str) -> list[MetricSeries]:
    """Cumulative per-step counts of switch/deactivate events, per source campaign."""
    ev = trace.events_of(kind)
    steps = trace.horizon + 1
    out = []
    for c, camp in enumerate(("A", "B")):
        want = (1 - c) if kind == "switch" else c
        sel = ev["step"][ev["campaign"] == want]
        per = np.bincount(sel, minlength=steps)[:steps]
        out.append(MetricSeries("switches" if kind == "switch" else "deactivations",
                                np.cumsum(per).astype(float), camp))
    return out


def first_activation_steps(trace: SimulationTrace) -> dict[int, int]:
    """Step at which each finally-active node was first activated."""
    acts = trace.events_of("activate")
    first: dict[int, int] = {}
    for step, node in zip(acts["step"].tolist(), acts["node"].tolist()):
        if node not in first:
            first[node] = step
    final = trace.active(-1)
    return {v: s for v, s in first.items() if v in final}


def shared_spread_stats(trace_a: SimulationTrace, trace_b: SimulationTrace) -> SharedStats:
    """Overlap of two independent non-competitive diffusions on one graph.

    Activation times are absolute steps; users reached at the same step by
    both campaigns count as reached by A first.
    """
    if trace_a.meta.get("graph_digest") != trace_b.meta.get("graph_digest"):
        raise MetricError("traces were produced on different graphs")
    if trace_a.model != NONCOMPETITIVE or trace_b.model != NONCOMPETITIVE:
        raise MetricError("shared spread compares non-competitive traces")
    ta = first_activation_steps(trace_a)
    tb = first_activation_steps(trace_b)
    shared = sorted(set(ta) & set(tb))
    spread_a, spread_b = len(ta), len(tb)
    if not shared:
        return SharedStats(spread_a, spread_b, 0.0, 0.0, 0.0, 0.0, 0.0)
    sa = np.array([ta[v] for v in shared], dtype=float)
    sb = np.array([tb[v] for v in shared], dtype=float)
    a_first = sa <= sb
    return SharedStats(
        spread_A=spread_a,
        spread_B=spread_b,
        shared_fraction=len(shared) / spread_a,
        pct_A_first=float(a_first.mean()),
        avg_time_any=float(np.minimum(sa, sb).mean()),
        avg_time_A_first=float(sa[a_first].mean()) if a_first.any() else 0.0,
        avg_time_B_first=float(sb[~a_first].mean()) if (~a_first).any() else 0.0,
        shared_count=len(shared),
        ties=int((sa == sb).sum()),
    )


@dataclass
class Summary:
    count: int
    mean: float
    std: float
    min: float
    max: float

    def as_dict(self) -> dict:
        return asdict(self)


class RunningStats:
    """Welford accumulator; population variance."""

    def __init__(self):
        self.count = 0
        self._mean = 0.0
        self._m2 = 0.0
        self.min = math.inf
        self.max = -math.inf

    def push(self, x: float) -> None:
        x = float(x)
        self.count += 1
        d = x - self._mean
        self._mean += d / self.count
        self._m2 += d * (x - self._mean)
        self.min = min(self.min, x)
        self.max = max(self.max, x)

    def summary(self) -> Summary:
        if not self.count:
            raise ValueError("no values")
        return Summary(self.count, self._mean, math.sqrt(max(self._m2, 0.0) / self.count), self.min, self.max)


def aggregate_runs(runs: Sequence[Mapping[str, float]]) -> dict[str, Summary]:
    """Mean / population std / min / max per metric, folded in run order."""
    if not runs:
        raise ValueError("aggregate_runs needs at least one run")
    acc: dict[str, RunningStats] = {}
    for run in runs:
        for key, value in run.items():
            acc.setdefault(key, RunningStats()).push(value)
    return {k: v.summary() for k, v in acc.items()}


def mean_series(series: Iterable[np.ndarray]) -> np.ndarray:
    """Step-wise mean of series of unequal length (each padded with its last value)."""
    series = [np.asarray(s, dtype=float) for s in series]
    length = max(len(s) for s in series)
    return np.mean([_pad(s, length) for s in series], axis=0)
