"""Discrete-time friend-foe LT diffusion: non-competitive, semi-progressive
and non-progressive runs.

The step loop lives in a kernel. The compiled one (``_ckernel``) is used when
it imports; ``FFDLT_BACKEND=python`` forces the numpy fallback.
"""
from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

import numpy as np

from . import _pykernel
from .dynamics import ModelParams, NodeParams, State
from .graph import DiffusionGraph
from .rng import tie_seed_from

try:
    from . import _ckernel
except ImportError:  # pragma: no cover - depends on build
    _ckernel = None

NONCOMPETITIVE = "nc"
SEMIPROGRESSIVE = "sp"
NONPROGRESSIVE = "np"
MODELS = {NONCOMPETITIVE: 0, SEMIPROGRESSIVE: 1, NONPROGRESSIVE: 2}

EVENT_KINDS = ("quiesce", "activate", "switch", "deactivate")
CAMPAIGNS = ("A", "B")


def available_backends() -> list[str]:
    return (["compiled"] if _ckernel is not None else []) + ["python"]


def default_backend() -> str:
    requested = os.environ.get("FFDLT_BACKEND", "").lower()
    if requested in ("python", "compiled"):
        if requested == "compiled" and _ckernel is None:
            raise RuntimeError("compiled kernel requested but ffdlt._ckernel is not built")
        return requested
    return "compiled" if _ckernel is not None else "python"


def _kernel(backend: Optional[str]):
    backend = backend or default_backend()
    if backend == "compiled":
        if _ckernel is None:
            raise RuntimeError("compiled kernel is not available")
        return _ckernel.simulate
    if backend == "python":
        return _pykernel.simulate
    raise ValueError(f"unknown backend {backend!r}")


@dataclass
class SimulationTrace:
    """Event log plus per-step node states of one diffusion run.

    ``states[t, v]`` holds a :class:`State` code for step ``t``;
    ``events`` is a structured array with fields step, node, kind, campaign
    (kind indexes :data:`EVENT_KINDS`, campaign 0 = A, 1 = B).
    """

    model: str
    states: np.ndarray
    events: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.states.shape[0] - 1

    @property
    def node_count(self) -> int:
        return self.states.shape[1]

    def active_mask(self, t: int = -1, campaign: Optional[int] = None) -> np.ndarray:
        s = self.states[t]
        if campaign is None:
            return (s == State.ACTIVE_A) | (s == State.ACTIVE_B)
        return s == (State.ACTIVE_A if campaign == 0 else State.ACTIVE_B)

    def quiescent_mask(self, t: int = -1, campaign: Optional[int] = None) -> np.ndarray:
        s = self.states[t]
        if campaign is None:
            return s >= State.QUIESCENT_A
        return s == (State.QUIESCENT_A if campaign == 0 else State.QUIESCENT_B)

    def active(self, t: int = -1, campaign: Optional[int] = None) -> set[int]:
        return set(np.flatnonzero(self.active_mask(t, campaign)).tolist())

    def quiescent(self, t: int = -1, campaign: Optional[int] = None) -> set[int]:
        return set(np.flatnonzero(self.quiescent_mask(t, campaign)).tolist())

    def events_of(self, kind: str) -> np.ndarray:
        return self.events[self.events["kind"] == EVENT_KINDS.index(kind)]

    def event_tuples(self) -> list[tuple[int, int, str, str]]:
        return [
            (int(e["step"]), int(e["node"]), EVENT_KINDS[e["kind"]], CAMPAIGNS[e["campaign"]])
            for e in self.events
        ]

    def same_dynamics(self, other: "SimulationTrace") -> bool:
        return (
            self.model == other.model
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.events, other.events)
        )

    def write(self, stream: IO[str]) -> None:
        """Line-delimited events: a JSON metadata line, then ``step,node,kind,campaign`` rows."""
        header = dict(self.meta, model=self.model, horizon=self.horizon, node_count=self.node_count)
        stream.write(json.dumps(header, sort_keys=True, default=_json_default) + "\n")
        stream.write("step,node,kind,campaign\n")
        for step, node, kind, camp in self.event_tuples():
            stream.write(f"{step},{node},{kind},{camp}\n")

    def dumps(self) -> str:
        buf = io.StringIO()
        self.write(buf)
        return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


EVENT_DTYPE = np.dtype([("step", np.int32), ("node", np.int32), ("kind", np.int8), ("campaign", np.int8)])


def read_trace_events(stream: IO[str]) -> tuple[dict, list[tuple[int, int, str, str]]]:
    """Parse the output of :meth:`SimulationTrace.write`."""
    meta = json.loads(stream.readline())
    header = stream.readline().strip()
    if header != "step,node,kind,campaign":
        raise ValueError(f"unexpected trace header {header!r}")
    rows = []
    for line in stream:
        if line.strip():
            s, v, k, c = line.strip().split(",")
            rows.append((int(s), int(v), k, c))
    return meta, rows


def _seed_array(seeds: Iterable[int], n: int, name: str) -> np.ndarray:
    arr = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if len(arr) and (arr[0] < 0 or arr[-1] >= n):
        raise ValueError(f"{name} contains a node outside the graph")
    return arr.astype(np.int32)


def _run(model, g, seeds_a, seeds_b, delay_b, node_params, mp, rng, backend):
    n = g.node_count
    if len(node_params) != n:
        raise ValueError("node params do not match graph size")
    sa = _seed_array(seeds_a, n, "seeds_a")
    sb = _seed_array(seeds_b, n, "seeds_b")
    horizon = mp.horizon
    if model != NONCOMPETITIVE:
        if len(np.intersect1d(sa, sb)):
            raise ValueError("seed sets of the two campaigns overlap")
        if horizon is None:
            raise ValueError("competitive runs need a finite horizon")
        if not 0 <= delay_b < horizon:
            raise ValueError("delay_b must satisfy 0 <= delay_b < horizon")
    tie_seed = tie_seed_from(rng)
    base = g.base
    sim = _kernel(backend)
    states, st, nd, kd, cp, skipped, steps_run = sim(
        base.in_indptr, base.src, g.weight, node_params.theta, node_params.tau,
        float(mp.delta), float(mp.lam), -1 if horizon is None else int(horizon),
        MODELS[model], sa, sb, int(delay_b), float(mp.tie_break.prob_a), tie_seed,
    )
    events = np.empty(len(st), dtype=EVENT_DTYPE)
    events["step"], events["node"], events["kind"], events["campaign"] = st, nd, kd, cp
    meta = {
        "seeds_A": sa.tolist(),
        "seeds_B": sb.tolist(),
        "delay_B": int(delay_b),
        "skipped_B_seeds": int(skipped),
        "steps_run": int(steps_run),
        "delta": mp.delta,
        "lambda": mp.lam,
        "prob_A": mp.tie_break.prob_a,
        "tie_seed": tie_seed,
        "graph_digest": g.digest(),
        "node_params_digest": node_params.digest(),
    }
    return SimulationTrace(model, states, events, meta)


def run_noncompetitive(g: DiffusionGraph, seeds: Iterable[int], node_params: NodeParams,
                       mp: ModelParams, rng=None, backend: Optional[str] = None) -> SimulationTrace:
    """Single-campaign diffusion; seeds are active for campaign A at t=0."""
    return _run(NONCOMPETITIVE, g, seeds, (), 0, node_params, mp, rng, backend)


def run_semiprogressive(g: DiffusionGraph, seeds_a, seeds_b, delay_b: int, node_params: NodeParams,
                        mp: ModelParams, rng=None, backend: Optional[str] = None) -> SimulationTrace:
    return _run(SEMIPROGRESSIVE, g, seeds_a, seeds_b, delay_b, node_params, mp, rng, backend)


def run_nonprogressive(g: DiffusionGraph, seeds_a, seeds_b, delay_b: int, node_params: NodeParams,
                       mp: ModelParams, rng=None, backend: Optional[str] = None) -> SimulationTrace:
    """Semi-progressive rules plus deactivation of nodes whose trusted active
    support from both campaigns falls below ``theta``."""
    return _run(NONPROGRESSIVE, g, seeds_a, seeds_b, delay_b, node_params, mp, rng, backend)


def run_model(model: str, g, seeds_a, seeds_b, delay_b, node_params, mp, rng=None, backend=None):
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    if model == NONCOMPETITIVE:
        return run_noncompetitive(g, seeds_a, node_params, mp, rng, backend)
    return _run(model, g, seeds_a, seeds_b, delay_b, node_params, mp, rng, backend)


def last_activation_step(trace: SimulationTrace) -> int:
    acts = trace.events_of("activate")
    return int(acts["step"].max()) if len(acts) else 0


def compute_horizon(g: DiffusionGraph, seeds_a, node_params: NodeParams, mp: ModelParams,
                    backend: Optional[str] = None) -> int:
    """End time of the bad campaign's non-competitive diffusion (at least 1)."""
    unbounded = ModelParams(delta=mp.delta, lam=mp.lam, horizon=None, tie_break=mp.tie_break)
    trace = run_noncompetitive(g, seeds_a, node_params, unbounded, backend=backend)
    return max(1, last_activation_step(trace))
