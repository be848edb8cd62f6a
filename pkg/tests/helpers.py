"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from kuramoto_pin import build_graph


def cycle3(w12=1.0, w23=1.0, w31=1.0):
    return build_graph(3, [(1, 2, w12), (2, 3, w23), (3, 1, w31)])


def directed_cycle(signs, weight=1.0):
    """Cycle 1->2->...->L->1 with the given +/- sign pattern."""
    n = len(signs)
    edges = []
    for i, s in enumerate(signs):
        src = i + 1
        dst = src % n + 1
        edges.append((src, dst, s * weight))
    return build_graph(n, edges)


def undirected_triangle(w=1.0):
    return build_graph(
        3,
        [(1, 2, w), (2, 1, w), (1, 3, w), (3, 1, w), (2, 3, w), (3, 2, w)],
        undirected=True,
    )


def random_subset(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    mask = rng.random(n) < 0.4
    return tuple(int(i + 1) for i in range(n) if mask[i])


def pin_reachable(g, rs) -> bool:
    """True when every retained node touches an input through retained edges."""
    pins = set(rs.input_nodes)
    parent: dict = {v: v for v in rs.node_map}
    parent["pin"] = "pin"

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for col in rs.edge_map:
        e = g.edges[col]
        a = "pin" if e.src in pins else e.src
        parent[find(a)] = find(e.dst)
    return all(find(v) == find("pin") for v in rs.node_map)
