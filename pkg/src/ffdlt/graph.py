"""Signed trust networks: loading, restriction and influence-weight sampling.

Edges are stored sorted by ``(dst, src)`` so the in-neighbourhood of every
node is a contiguous slice (``in_indptr``). The diffusion kernels rely on
this order for their summations, so it must not change.
"""
from __future__ import annotations

import gzip
import io
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

SNAP_SIGNED = "snap-signed"
KONECT_TIMESTAMPED = "konect-timestamped"
FORMATS = (SNAP_SIGNED, KONECT_TIMESTAMPED)


class ParseError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class TrustNetwork:
    """Directed signed graph with dense node ids ``0..node_count-1``.

    ``labels[i]`` is the dataset id of dense node ``i``. ``timestamps`` is
    None when the source format carries no times.
    """

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    sign: np.ndarray
    timestamps: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    in_indptr: np.ndarray = field(init=False, repr=False)
    out_indptr: np.ndarray = field(init=False, repr=False)
    out_order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.node_count)
        src = np.ascontiguousarray(self.src, dtype=np.int32)
        dst = np.ascontiguousarray(self.dst, dtype=np.int32)
        sign = np.ascontiguousarray(self.sign, dtype=np.int8)
        ts = self.timestamps
        if ts is not None:
            ts = np.ascontiguousarray(ts, dtype=np.int64)
        order = np.lexsort((src, dst))
        if len(order) and not np.all(order == np.arange(len(order))):
            src, dst, sign = src[order], dst[order], sign[order]
            if ts is not None:
                ts = ts[order]
        labels = self.labels
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "labels", np.asarray(labels))
        object.__setattr__(
            self, "in_indptr", np.concatenate(([0], np.cumsum(np.bincount(dst, minlength=n)))).astype(np.int64)
        )
        out_order = np.argsort(src, kind="stable")
        object.__setattr__(self, "out_order", out_order)
        object.__setattr__(
            self, "out_indptr", np.concatenate(([0], np.cumsum(np.bincount(src, minlength=n)))).astype(np.int64)
        )
        for arr in (self.src, self.dst, self.sign, self.in_indptr, self.out_indptr, self.out_order):
            arr.flags.writeable = False
        self.validate()

    def validate(self) -> None:
        n = self.node_count
        if len(self.src) != len(self.dst) or len(self.src) != len(self.sign):
            raise ValueError("edge arrays differ in length")
        if len(self.src):
            if self.src.min() < 0 or self.dst.min() < 0 or max(self.src.max(), self.dst.max()) >= n:
                raise ValueError("node id out of range")
            if not np.all(np.abs(self.sign) == 1):
                raise ValueError("edge signs must be +1 or -1")
            key = self.dst.astype(np.int64) * n + self.src
            if np.any(np.diff(key) == 0):
                raise ValueError("parallel edges present")
            if np.any(self.src == self.dst):
                raise ValueError("self-loops present")
        if self.timestamps is not None and len(self.timestamps) != len(self.src):
            raise ValueError("timestamp array length mismatch")
        if len(self.labels) != n:
            raise ValueError("label table length mismatch")

    @property
    def edge_count(self) -> int:
        return int(len(self.src))

    @property
    def has_timestamps(self) -> bool:
        return self.timestamps is not None

    def in_edges(self, v: int) -> np.ndarray:
        """Edge indices of the in-edges of ``v``."""
        return np.arange(self.in_indptr[v], self.in_indptr[v + 1])

    def out_edges(self, v: int) -> np.ndarray:
        return self.out_order[self.out_indptr[v]:self.out_indptr[v + 1]]

    def in_neighbors(self, v: int, sign: Optional[int] = None) -> np.ndarray:
        e = self.in_edges(v)
        if sign is not None:
            e = e[self.sign[e] == sign]
        return self.src[e]

    def out_neighbors(self, v: int, sign: Optional[int] = None) -> np.ndarray:
        e = self.out_edges(v)
        if sign is not None:
            e = e[self.sign[e] == sign]
        return self.dst[e]

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def signed_in_degree(self, sign: int) -> np.ndarray:
        return np.bincount(self.dst[self.sign == sign], minlength=self.node_count)

    def subgraph(self, nodes: Iterable[int], edge_mask: Optional[np.ndarray] = None) -> "TrustNetwork":
        """Induced subgraph on ``nodes``, relabelled densely in ascending order.

        ``edge_mask`` additionally filters the kept edges.
        """
        nodes = np.unique(np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes, dtype=np.int64))
        remap = np.full(self.node_count, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        keep = (remap[self.src] >= 0) & (remap[self.dst] >= 0)
        if edge_mask is not None:
            keep &= edge_mask
        return TrustNetwork(
            node_count=len(nodes),
            src=remap[self.src[keep]],
            dst=remap[self.dst[keep]],
            sign=self.sign[keep],
            timestamps=None if self.timestamps is None else self.timestamps[keep],
            labels=self.labels[nodes],
        )

    def same_structure(self, other: "TrustNetwork") -> bool:
        if self.node_count != other.node_count:
            return False
        if not (
            np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.sign, other.sign)
            and np.array_equal(self.labels, other.labels)
        ):
            return False
        if (self.timestamps is None) != (other.timestamps is None):
            return False
        return self.timestamps is None or np.array_equal(self.timestamps, other.timestamps)


@dataclass(frozen=True, eq=False)
class DiffusionGraph:
    """A trust network plus one sample of signed influence weights.

    ``weight[e]`` belongs to edge ``e`` of ``base`` (same order).
    """

    base: TrustNetwork
    weight: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=np.float64)
        if w.shape != (self.base.edge_count,):
            raise ValueError("weight vector does not match edge count")
        if np.any(np.abs(w) > 1.0):
            raise ValueError("weights must lie in [-1, 1]")
        if np.any(w * self.base.sign < 0):
            raise ValueError("weight sign disagrees with edge sign")
        w.flags.writeable = False
        object.__setattr__(self, "weight", w)

    @property
    def node_count(self) -> int:
        return self.base.node_count

    def cumulative_in_weight(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-node (sum of positive in-weights, sum of |negative in-weights|)."""
        n = self.base.node_count
        w = self.weight
        pos = np.bincount(self.base.dst, weights=np.where(w > 0, w, 0.0), minlength=n)
        neg = np.bincount(self.base.dst, weights=np.where(w < 0, -w, 0.0), minlength=n)
        return pos, neg

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for arr in (self.base.src, self.base.dst, self.weight):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def _open_text(source: Union[str, os.PathLike, IO]) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        if path.endswith(".gz"):
            return gzip.open(path, "rt", encoding="utf-8", errors="replace")
        return open(path, "r", encoding="utf-8", errors="replace")
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream; sniff gzip magic
    head = source.peek(2)[:2] if hasattr(source, "peek") else b""
    if head == b"\x1f\x8b":
        source = gzip.GzipFile(fileobj=source)
    return io.TextIOWrapper(source, encoding="utf-8", errors="replace")


def parse_edge_list(source: Union[str, os.PathLike, IO], format: str = SNAP_SIGNED) -> TrustNetwork:
    """Parse a signed edge list into a :class:`TrustNetwork`.

    ``snap-signed`` lines are ``src dst sign``; ``konect-timestamped`` lines
    are ``src dst weight timestamp`` with the sign taken from ``weight``.
    Lines starting with ``#`` or ``%`` are comments. Node ids are remapped to
    a dense range in ascending order of the original ids. Parallel edges are
    collapsed to the sign of their summed signs (dropped when that sum is 0)
    with the earliest timestamp. Self-loops are dropped.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown edge-list format {format!r}; expected one of {FORMATS}")
    konect = format == KONECT_TIMESTAMPED
    srcs: list[int] = []
    dsts: list[int] = []
    signs: list[int] = []
    times: list[int] = []
    stream = _open_text(source)
    try:
        for line_no, line in enumerate(stream, start=1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            parts = s.split()
            try:
                if konect:
                    if len(parts) < 4:
                        raise ParseError("expected 'src dst weight timestamp'", line_no)
                    u, v = int(parts[0]), int(parts[1])
                    wt = float(parts[2])
                    sg = (wt > 0) - (wt < 0)
                    ts = int(float(parts[3]))
                    times.append(ts)
                else:
                    if len(parts) < 3:
                        raise ParseError("expected 'src dst sign'", line_no)
                    u, v = int(parts[0]), int(parts[1])
                    sg = int(float(parts[2]))
                    if sg == 0:
                        raise ParseError("edge sign must be nonzero", line_no)
                    sg = 1 if sg > 0 else -1
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise ParseError(f"non-numeric field in {s!r}", line_no) from None
            srcs.append(u)
            dsts.append(v)
            signs.append(sg)
    finally:
        if isinstance(source, (str, os.PathLike)):
            stream.close()
    return _build(
        np.asarray(srcs, dtype=np.int64),
        np.asarray(dsts, dtype=np.int64),
        np.asarray(signs, dtype=np.int64),
        np.asarray(times, dtype=np.int64) if konect else None,
    )


def _build(src, dst, sign, ts) -> TrustNetwork:
    labels = np.unique(np.concatenate((src, dst)))
    n = len(labels)
    u = np.searchsorted(labels, src)
    v = np.searchsorted(labels, dst)
    keep = u != v
    u, v, sign = u[keep], v[keep], sign[keep]
    if ts is not None:
        ts = ts[keep]
    key = v * max(n, 1) + u
    uniq, inv = np.unique(key, return_inverse=True)
    sign_sum = np.bincount(inv, weights=sign, minlength=len(uniq))
    ok = sign_sum != 0
    first_ts = None
    if ts is not None:
        first_ts = np.full(len(uniq), np.iinfo(np.int64).max, dtype=np.int64)
        np.minimum.at(first_ts, inv, ts)
        first_ts = first_ts[ok]
    uniq = uniq[ok]
    return TrustNetwork(
        node_count=n,
        src=(uniq % max(n, 1)),
        dst=(uniq // max(n, 1)),
        sign=np.sign(sign_sum[ok]).astype(np.int8),
        timestamps=first_ts,
        labels=labels,
    )


def write_edge_list(net: TrustNetwork, stream: IO[str], format: Optional[str] = None) -> None:
    """Write ``net`` back in edge-list form using the original node ids."""
    if format is None:
        format = KONECT_TIMESTAMPED if net.has_timestamps else SNAP_SIGNED
    lab = net.labels
    if format == KONECT_TIMESTAMPED:
        if net.timestamps is None:
            raise ValueError("network has no timestamps")
        for u, v, s, t in zip(net.src, net.dst, net.sign, net.timestamps):
            stream.write(f"{lab[u]} {lab[v]} {int(s)} {int(t)}\n")
    else:
        for u, v, s in zip(net.src, net.dst, net.sign):
            stream.write(f"{lab[u]} {lab[v]} {int(s)}\n")


def _scc_labels(net: TrustNetwork) -> np.ndarray:
    n = net.node_count
    adj = csr_matrix((np.ones(net.edge_count, dtype=np.int8), (net.src, net.dst)), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="strong")
    return labels


def largest_scc(net: TrustNetwork) -> np.ndarray:
    """Sorted node ids of the largest strongly connected component.

    Equal-size components are ordered by their smallest node id.
    """
    if net.node_count == 0:
        raise ValueError("empty network")
    labels = _scc_labels(net)
    sizes = np.bincount(labels)
    min_id = np.full(len(sizes), net.node_count, dtype=np.int64)
    np.minimum.at(min_id, labels, np.arange(net.node_count))
    best = np.lexsort((min_id, -sizes))[0]
    return np.flatnonzero(labels == best)


def restrict_for_diffusion(net: TrustNetwork, mode: str = "full") -> TrustNetwork:
    """Restrict the diffusion context.

    ``full`` returns ``net``. ``lcc`` keeps the largest SCC plus its
    in-frontier: zero-in-degree nodes with at least one edge into the SCC,
    keeping only those edges.
    """
    if mode == "full":
        return net
    if mode != "lcc":
        raise ValueError(f"unknown restriction mode {mode!r}")
    core = largest_scc(net)
    in_core = np.zeros(net.node_count, dtype=bool)
    in_core[core] = True
    indeg = net.in_degree()
    frontier_edge = (indeg[net.src] == 0) & in_core[net.dst]
    frontier = np.unique(net.src[frontier_edge])
    keep_edge = (in_core[net.src] & in_core[net.dst]) | frontier_edge
    return net.subgraph(np.concatenate((core, frontier)), edge_mask=keep_edge)


def induced_lcc(net: TrustNetwork) -> TrustNetwork:
    """Subgraph induced by the largest SCC only (no frontier)."""
    return net.subgraph(largest_scc(net))


def trust_fraction(net: TrustNetwork) -> float:
    if net.edge_count == 0:
        raise ValueError("trust fraction undefined for a graph without edges")
    return float(np.count_nonzero(net.sign > 0)) / net.edge_count


def sample_weights(net: TrustNetwork, p: float, rng: np.random.Generator) -> DiffusionGraph:
    """Draw one set of influence weights.

    Each trust edge ``(u, v)`` gets ``X / n**2`` with ``X ~ Binomial(n, p)``
    and ``n`` the number of trusted in-neighbours of ``v``; distrust edges
    get ``-X / n**2`` with ``n`` counted over distrusted in-neighbours. Every
    weight is at most ``1/n`` in magnitude, so both cumulative in-weight
    constraints hold exactly. Draws are made in edge order.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    pos_deg = net.signed_in_degree(1)
    neg_deg = net.signed_in_degree(-1)
    n_e = np.where(net.sign > 0, pos_deg[net.dst], neg_deg[net.dst]).astype(np.int64)
    draws = rng.binomial(n_e, p) if len(n_e) else np.zeros(0, dtype=np.int64)
    w = net.sign * (draws / (n_e.astype(np.float64) ** 2))
    _clamp_cumulative(net, w)
    return DiffusionGraph(net, w)


def _clamp_cumulative(net: TrustNetwork, w: np.ndarray) -> None:
    # n copies of fl(1/n) can sum to 1 + ulp; shrink the affected nodes'
    # weights until the in-order sums are <= 1.
    n = net.node_count
    for side in (w > 0, w < 0):
        while True:
            sums = np.bincount(net.dst, weights=np.where(side, np.abs(w), 0.0), minlength=n)
            over = sums > 1.0
            if not over.any():
                break
            hit = side & over[net.dst]
            w[hit] *= 1.0 - 2.0 ** -50
