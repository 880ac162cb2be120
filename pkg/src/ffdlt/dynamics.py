"""Node-level dynamics: time-varying activation threshold and quiescence."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Optional

import numpy as np

from .graph import DiffusionGraph


class State(IntEnum):
    """Per-node state codes used in trace snapshots."""

    INACTIVE = 0
    ACTIVE_A = 1
    ACTIVE_B = 2
    QUIESCENT_A = 3
    QUIESCENT_B = 4


@dataclass(frozen=True)
class TieBreakRule:
    """Fixed-probability tie breaking: campaign A wins with ``prob_a``."""

    prob_a: float = 1.0
    kind: str = "fixed-probability"

    def __post_init__(self):
        if not 0.0 <= self.prob_a <= 1.0:
            raise ValueError("prob_a must lie in [0, 1]")
        if self.kind != "fixed-probability":
            raise ValueError(f"unsupported tie-break rule {self.kind!r}")


@dataclass(frozen=True, eq=False)
class NodeParams:
    theta: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        tau = np.ascontiguousarray(self.tau, dtype=np.float64)
        if theta.shape != tau.shape:
            raise ValueError("theta and tau must have the same length")
        if np.any(theta <= 0) or np.any(theta > 1):
            raise ValueError("theta must lie in (0, 1]")
        if np.any(tau < 0):
            raise ValueError("tau must be non-negative")
        theta.flags.writeable = False
        tau.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "tau", tau)

    def __len__(self):
        return len(self.theta)

    @classmethod
    def uniform(cls, n: int, rng: np.random.Generator, tau_max: float = 5.0) -> "NodeParams":
        """theta ~ U(0, 1], tau ~ U[0, tau_max]."""
        theta = 1.0 - rng.random(n)
        tau = tau_max * rng.random(n)
        return cls(theta, tau)

    @classmethod
    def constant(cls, n: int, theta: float, tau: float = 0.0) -> "NodeParams":
        return cls(np.full(n, theta), np.full(n, tau))

    def digest(self) -> str:
        import hashlib

        return hashlib.sha256(self.theta.tobytes() + self.tau.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class ModelParams:
    """Global model parameters.

    ``horizon=None`` runs until no state can change any more.
    """

    delta: float = 0.0
    lam: float = 0.0
    horizon: Optional[int] = None
    tie_break: TieBreakRule = TieBreakRule()

    def __post_init__(self):
        if self.delta < 0 or self.lam < 0:
            raise ValueError("delta and lambda must be non-negative")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.delta > 0.5 or self.lam > 5:
            warnings.warn(
                f"delta={self.delta}, lambda={self.lam} outside the usual ranges [0, 0.5] / [0, 5]",
                stacklevel=2,
            )


def activation_threshold(theta: float, delta: float, t: int, t_last: Optional[int] = None) -> float:
    """Threshold a node must reach at step ``t``.

    Grows by ``delta`` per step the node has held its current state since
    ``t_last`` and saturates at 1. Nodes with no ``t_last`` use ``theta``.
    """
    if delta == 0 or t_last is None:
        return theta
    if t < t_last:
        raise ValueError("t precedes t_last")
    held = t - t_last
    if held >= (1.0 - theta) / delta:
        # saturated: theta + delta * (1 - theta) / delta is exactly 1
        return 1.0
    return min(theta + delta * held, 1.0)


def quiescence_duration(tau: float, lam: float, neg_mass: float) -> float:
    """Quiescence length; ``lam == 0`` disables the distrust term entirely."""
    if lam == 0:
        return tau
    return tau + math.exp(lam * neg_mass)


def trusted_influence(v: int, active: Iterable[int], g: DiffusionGraph) -> float:
    """Sum of positive in-weights of ``v`` from nodes in ``active``."""
    return _in_mass(v, active, g, positive=True)


def distrusted_active_mass(v: int, active: Iterable[int], g: DiffusionGraph) -> float:
    """Sum of |w| over distrust in-edges of ``v`` whose source is in ``active``."""
    return _in_mass(v, active, g, positive=False)


def _in_mass(v, active, g, positive):
    base = g.base
    mask = np.zeros(base.node_count, dtype=bool)
    idx = np.fromiter(active, dtype=np.int64) if not isinstance(active, np.ndarray) else active
    if len(idx):
        mask[idx] = True
    total = 0.0
    for e in range(base.in_indptr[v], base.in_indptr[v + 1]):
        w = g.weight[e]
        if mask[base.src[e]] and ((w > 0) if positive else (w < 0)):
            total += abs(w)
    return total
