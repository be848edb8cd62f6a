"""Signed directed graphs, incidence machinery, and random ensembles.

Node ids are 1-based throughout the public API.  An edge (src, dst, w)
couples oscillator dst to oscillator src with signed weight w != 0;
undirected graphs are stored as symmetric pairs of directed edges that
share a single magnitude and sign.  The edge list is sorted
lexicographically by (src, dst) at construction and that canonical
order is what every incidence-matrix column refers to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

GRAPH_KINDS = (
    "undirected-ER",
    "directed-oriented",
    "directed-oriented-cycle",
    "tree",
)


class GraphError(ValueError):
    """Structurally invalid graph or unattainable generator parameters."""


class Edge(NamedTuple):
    src: int
    dst: int
    weight: float


@dataclass(frozen=True, eq=False)
class SignedDigraph:
    """Immutable signed digraph with canonical (src, dst) edge ordering."""

    n: int
    edges: tuple[Edge, ...]
    undirected: bool = False

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.array([e.weight for e in self.edges], dtype=float)
        w.setflags(write=False)
        return w

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(e.src, e.dst): k for k, e in enumerate(self.edges)}

    @cached_property
    def incoming(self) -> tuple[tuple[int, ...], ...]:
        """Canonical column ids of the edges entering each node (index i-1)."""
        cols: list[list[int]] = [[] for _ in range(self.n)]
        for k, e in enumerate(self.edges):
            cols[e.dst - 1].append(k)
        return tuple(tuple(c) for c in cols)

    def node_ids(self) -> range:
        return range(1, self.n + 1)


def build_graph(
    n: int,
    edges: Iterable[tuple[int, int, float]],
    undirected: bool = False,
) -> SignedDigraph:
    """Validate and canonicalize an edge list into a SignedDigraph.

    Raises GraphError on ids outside 1..n, self loops, zero or non-finite
    weights, duplicate (src, dst) pairs, or, for undirected graphs, on a
    missing or unequal reverse edge.
    """
    if not isinstance(n, int) or n < 1:
        raise GraphError(f"node count must be a positive integer, got {n!r}")
    seen: set[tuple[int, int]] = set()
    canon: list[Edge] = []
    for src, dst, w in edges:
        if not (isinstance(src, (int, np.integer)) and isinstance(dst, (int, np.integer))):
            raise GraphError(f"node ids must be integers, got ({src!r}, {dst!r})")
        src, dst = int(src), int(dst)
        if not (1 <= src <= n and 1 <= dst <= n):
            raise GraphError(f"edge ({src}, {dst}) outside node range 1..{n}")
        if src == dst:
            raise GraphError(f"self loop at node {src}")
        w = float(w)
        if not np.isfinite(w) or w == 0.0:
            raise GraphError(f"edge ({src}, {dst}) has invalid weight {w!r}")
        if (src, dst) in seen:
            raise GraphError(f"duplicate edge ({src}, {dst})")
        seen.add((src, dst))
        canon.append(Edge(src, dst, w))
    canon.sort(key=lambda e: (e.src, e.dst))
    g = SignedDigraph(n=n, edges=tuple(canon), undirected=bool(undirected))
    if undirected:
        for e in g.edges:
            k = g.edge_index.get((e.dst, e.src))
            if k is None or g.edges[k].weight != e.weight:
                raise GraphError(
                    f"undirected graph needs a matching reverse of ({e.src}, {e.dst})"
                )
    return g


@dataclass(frozen=True, eq=False)
class IncidenceBundle:
    """Incidence matrix D, in-incidence D_hat, and diagonal coupling K.

    Column e corresponds to g.edges[e]; D has +1 at the head row and -1
    at the tail row, D_hat keeps only the +1 entries, and K carries the
    edge weights on its diagonal.
    """

    D: np.ndarray
    Dhat: np.ndarray
    K: np.ndarray
    edge_index: dict[tuple[int, int], int]


def incidence_bundle(g: SignedDigraph) -> IncidenceBundle:
    D = np.zeros((g.n, g.m))
    Dhat = np.zeros((g.n, g.m))
    for k, e in enumerate(g.edges):
        D[e.dst - 1, k] = 1.0
        D[e.src - 1, k] = -1.0
        Dhat[e.dst - 1, k] = 1.0
    K = np.diag(g.weights)
    for a in (D, Dhat, K):
        a.setflags(write=False)
    return IncidenceBundle(D=D, Dhat=Dhat, K=K, edge_index=dict(g.edge_index))


def normalize_input_set(g: SignedDigraph, S: Iterable[int]) -> tuple[int, ...]:
    """Sorted, validated tuple of distinct 1-based input-node ids."""
    out = sorted({int(i) for i in S})
    for i in out:
        if not 1 <= i <= g.n:
            raise GraphError(f"input node {i} outside 1..{g.n}")
    return tuple(out)


@dataclass(frozen=True)
class PartitionIndex:
    """Edge/node reindexing induced by an input set S.

    node_order lists non-input ids ascending, then input ids ascending.
    edge_order lists canonical column ids in four blocks: edges among
    non-inputs, edges from inputs to non-inputs, edges from non-inputs
    into inputs, edges among inputs.  Within a block the canonical
    relative order is preserved.
    """

    node_order: tuple[int, ...]
    edge_order: tuple[int, ...]
    block_sizes: tuple[int, int, int, int]

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        out = []
        pos = 0
        for size in self.block_sizes:
            out.append(self.edge_order[pos : pos + size])
            pos += size
        return tuple(out)


def partition(g: SignedDigraph, S: Iterable[int]) -> PartitionIndex:
    """Classify every edge by input membership of its endpoints."""
    inputs = set(normalize_input_set(g, S))
    non_inputs = tuple(i for i in g.node_ids() if i not in inputs)
    blocks: tuple[list[int], ...] = ([], [], [], [])
    for k, e in enumerate(g.edges):
        s_in, d_in = e.src in inputs, e.dst in inputs
        if not s_in and not d_in:
            blocks[0].append(k)
        elif s_in and not d_in:
            blocks[1].append(k)
        elif not s_in and d_in:
            blocks[2].append(k)
        else:
            blocks[3].append(k)
    return PartitionIndex(
        node_order=non_inputs + tuple(sorted(inputs)),
        edge_order=tuple(blocks[0] + blocks[1] + blocks[2] + blocks[3]),
        block_sizes=tuple(len(b) for b in blocks),
    )


def edges_into(g: SignedDigraph, S: Iterable[int]) -> tuple[int, ...]:
    """Canonical column ids of edges whose head lies in S (ascending)."""
    inputs = set(normalize_input_set(g, S))
    return tuple(k for k, e in enumerate(g.edges) if e.dst in inputs)


def _weakly_connected(n: int, pairs: Sequence[tuple[int, int]]) -> bool:
    if n == 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n + 1)]
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    seen = {1}
    stack = [1]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def _prufer_tree(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    if n == 2:
        return [(1, 2)]
    seq = [int(x) for x in rng.integers(1, n + 1, size=n - 2)]
    degree = [1] * (n + 1)
    for v in seq:
        degree[v] += 1
    pairs = []
    import heapq

    leaves = [v for v in range(1, n + 1) if degree[v] == 1]
    heapq.heapify(leaves)
    for v in seq:
        leaf = heapq.heappop(leaves)
        pairs.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    a = heapq.heappop(leaves)
    b = heapq.heappop(leaves)
    pairs.append((a, b))
    return pairs


def generate_ensemble(
    kind: str,
    n: int,
    edge_prob: float = 0.3,
    weight_range: tuple[float, float] = (1.0, 5.0),
    neg_fraction: float = 0.0,
    rng_seed: int = 0,
    max_retries: int = 1000,
) -> SignedDigraph:
    """Draw one random graph of the given kind, deterministically per seed.

    Magnitudes come from weight_range uniformly; round(neg_fraction * u)
    of the u sign units (undirected pairs for undirected-ER, directed
    edges otherwise) are negated, chosen uniformly without replacement.
    ER-type draws are rejected until weakly connected, up to max_retries.
    """
    if kind not in GRAPH_KINDS:
        raise GraphError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")
    if n < 2:
        raise GraphError("ensembles need at least 2 nodes")
    lo, hi = float(weight_range[0]), float(weight_range[1])
    if not (0.0 < lo <= hi):
        raise GraphError(f"weight range must satisfy 0 < lo <= hi, got {weight_range!r}")
    if not 0.0 <= neg_fraction <= 1.0:
        raise GraphError(f"neg_fraction must lie in [0, 1], got {neg_fraction!r}")
    if not 0.0 <= edge_prob <= 1.0:
        raise GraphError(f"edge_prob must lie in [0, 1], got {edge_prob!r}")
    rng = np.random.default_rng(rng_seed)
    all_pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]

    units: list[tuple[int, int]] = []
    oriented: list[tuple[int, int]] = []
    for _ in range(max_retries):
        if kind == "directed-oriented-cycle":
            oriented = [(i, i + 1) for i in range(1, n)] + [(n, 1)]
            units = oriented
        elif kind == "tree":
            base = _prufer_tree(rng, n)
            flips = rng.random(len(base)) < 0.5
            oriented = [(b, a) if f else (a, b) for (a, b), f in zip(base, flips)]
            units = oriented
        else:
            draws = rng.random(len(all_pairs)) < edge_prob
            base = [p for p, take in zip(all_pairs, draws) if take]
            if kind == "undirected-ER":
                units = base
                oriented = []
            else:
                flips = rng.random(len(base)) < 0.5
                oriented = [(b, a) if f else (a, b) for (a, b), f in zip(base, flips)]
                units = oriented
        pairs = units if kind == "undirected-ER" else oriented
        if _weakly_connected(n, pairs):
            break
    else:
        raise GraphError(
            f"no weakly connected {kind} graph found in {max_retries} draws "
            f"(n={n}, edge_prob={edge_prob})"
        )

    u = len(units)
    mags = rng.uniform(lo, hi, size=u)
    signs = np.ones(u)
    k_neg = int(round(neg_fraction * u))
    if k_neg > 0:
        neg_idx = rng.choice(u, size=k_neg, replace=False)
        signs[neg_idx] = -1.0
    w = mags * signs

    if kind == "undirected-ER":
        edges = []
        for (a, b), wk in zip(units, w):
            edges.append((a, b, wk))
            edges.append((b, a, wk))
        return build_graph(n, edges, undirected=True)
    return build_graph(n, [(a, b, wk) for (a, b), wk in zip(oriented, w)])


def save_graph(
    path: str | Path,
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray | None = None,
) -> None:
    """Write the JSON interchange form (1-based ids, optional omega)."""
    payload = {
        "n": g.n,
        "undirected": g.undirected,
        "edges": [{"src": e.src, "dst": e.dst, "w": e.weight} for e in g.edges],
    }
    if omega is not None:
        om = np.asarray(omega, dtype=float)
        if om.shape != (g.n,):
            raise GraphError(f"omega must have length {g.n}, got shape {om.shape}")
        payload["omega"] = [float(x) for x in om]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_graph(path: str | Path) -> tuple[SignedDigraph, np.ndarray]:
    """Read the JSON interchange form; missing omega defaults to zeros."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise GraphError(f"cannot read graph file {path}: {exc}") from exc
    try:
        n = payload["n"]
        edges = [(e["src"], e["dst"], e["w"]) for e in payload["edges"]]
        undirected = bool(payload.get("undirected", False))
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph file {path}: {exc}") from exc
    g = build_graph(n, edges, undirected=undirected)
    omega = np.zeros(g.n)
    if payload.get("omega") is not None:
        raw = payload["omega"]
        if len(raw) != g.n:
            raise GraphError(f"omega length {len(raw)} does not match n={g.n}")
        omega = np.array([float(x) for x in raw])
    return g, omega
