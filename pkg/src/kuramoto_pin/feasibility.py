"""Admissible initial phase differences: intervals, LP oracle, parity rules.

Every edge confines its phase difference z_e = theta_dst - theta_src to
an open half-circle: (-pi/2, pi/2) for positive weights, (pi/2, 3pi/2)
for negative ones, read on the real line.  The LP oracle decides
exactly whether some theta places every z_e inside its interval shrunk
by a margin; the parity rules give the combinatorial sufficient
conditions, which the cycle audit cross-checks against the oracle,
logging every disagreement instead of hiding it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .graph import Edge, GraphError, SignedDigraph, build_graph, normalize_input_set

_HALF_PI = math.pi / 2.0
_MAX_MARGIN = math.pi / 4.0
_PARITY_NODE_CAP = 12


@dataclass(frozen=True)
class EdgeInterval:
    """Open admissible interval for z_e of one canonical edge column."""

    index: int
    src: int
    dst: int
    lo: float
    hi: float


@dataclass(frozen=True)
class PathDiagnostic:
    """Worst path found for one underlying edge during the parity check."""

    edge: tuple[int, int]
    edge_sign: int
    n_paths: int
    ok: bool
    failing_path: tuple[int, ...] | None
    failing_counts: tuple[int, int] | None  # (positive, negative) on that path


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    """Combined verdicts; fields are None when the check was not run."""

    margin: float | None = None
    lp_feasible: bool | None = None
    witness_theta0: np.ndarray | None = None
    witness_margin: float | None = None
    parity_ok: bool | None = None
    parity_details: tuple[PathDiagnostic, ...] | None = None
    parity_note: str | None = None

    def to_dict(self) -> dict:
        d: dict = {
            "margin": self.margin,
            "lp_feasible": self.lp_feasible,
            "witness_margin": self.witness_margin,
            "parity_ok": self.parity_ok,
        }
        if self.witness_theta0 is not None:
            d["witness_theta0"] = [float(x) for x in self.witness_theta0]
        if self.parity_details is not None:
            d["parity_details"] = [
                {
                    "edge": list(p.edge),
                    "edge_sign": p.edge_sign,
                    "n_paths": p.n_paths,
                    "ok": p.ok,
                    "failing_path": list(p.failing_path) if p.failing_path else None,
                    "failing_counts": list(p.failing_counts) if p.failing_counts else None,
                }
                for p in self.parity_details
            ]
        if self.parity_note is not None:
            d["parity_note"] = self.parity_note
        return d


def assumption_intervals(g: SignedDigraph) -> tuple[EdgeInterval, ...]:
    """Per-edge open intervals keyed by the sign of the edge weight."""
    out = []
    for k, e in enumerate(g.edges):
        if e.weight > 0:
            lo, hi = -_HALF_PI, _HALF_PI
        else:
            lo, hi = _HALF_PI, 3.0 * _HALF_PI
        out.append(EdgeInterval(index=k, src=e.src, dst=e.dst, lo=lo, hi=hi))
    return tuple(out)


def _validate_margin(margin: float) -> float:
    margin = float(margin)
    if not 0.0 <= margin < _MAX_MARGIN:
        raise ValueError(f"margin must lie in [0, pi/4), got {margin!r}")
    return margin


def lp_feasibility_oracle(
    g: SignedDigraph,
    margin: float = 0.05,
    pinned: Iterable[int] = (),
) -> FeasibilityReport:
    """Exact feasibility of the margin-shrunk interval system over theta.

    Maximizes a uniform extra slack t subject to
    lo_e + margin + t <= theta_dst - theta_src <= hi_e - margin - t for
    every edge, with pinned nodes fixed at 0 (node 1 is fixed only as a
    gauge when nothing is pinned).  The witness is returned along with
    its distance to the nearest unshrunk interval boundary.
    """
    margin = _validate_margin(margin)
    pins = normalize_input_set(g, pinned)
    intervals = assumption_intervals(g)
    nvar = g.n + 1  # theta_1..theta_n, slack t
    c = np.zeros(nvar)
    c[-1] = -1.0
    rows = []
    rhs = []
    for iv in intervals:
        s, d = iv.src - 1, iv.dst - 1
        low = np.zeros(nvar)
        low[s], low[d], low[-1] = 1.0, -1.0, 1.0
        rows.append(low)
        rhs.append(-(iv.lo + margin))
        high = np.zeros(nvar)
        high[s], high[d], high[-1] = -1.0, 1.0, 1.0
        rows.append(high)
        rhs.append(iv.hi - margin)
    bounds: list[tuple[float | None, float | None]] = [(None, None)] * g.n + [(None, None)]
    for p in pins:
        bounds[p - 1] = (0.0, 0.0)
    if not pins:
        bounds[0] = (0.0, 0.0)
    if not rows:
        theta = np.zeros(g.n)
        return FeasibilityReport(
            margin=margin, lp_feasible=True, witness_theta0=theta, witness_margin=math.inf
        )
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0:
        return FeasibilityReport(margin=margin, lp_feasible=False)
    t_star = float(res.x[-1])
    feasible = t_star > 1e-9 if margin == 0.0 else t_star >= -1e-9
    if not feasible:
        return FeasibilityReport(margin=margin, lp_feasible=False)
    theta = np.array(res.x[: g.n])
    return FeasibilityReport(
        margin=margin,
        lp_feasible=True,
        witness_theta0=theta,
        witness_margin=interval_clearance(g, theta),
    )


def interval_clearance(g: SignedDigraph, theta: Sequence[float] | np.ndarray) -> float:
    """Smallest distance of any z_e to its unshrunk interval boundary."""
    th = np.asarray(theta, dtype=float)
    if th.shape != (g.n,):
        raise ValueError(f"theta must have shape ({g.n},), got {th.shape}")
    worst = math.inf
    for iv in assumption_intervals(g):
        z = th[iv.dst - 1] - th[iv.src - 1]
        worst = min(worst, z - iv.lo, iv.hi - z)
    return worst


def sample_initial_phases(
    g: SignedDigraph,
    S: Iterable[int] = (),
    rng_seed: int = 0,
    margin: float = 0.05,
    max_attempts: int = 200,
) -> np.ndarray | None:
    """Random interior initial phases with input nodes held at zero.

    Perturbs the LP witness on the non-input coordinates and rejects
    until the margin still clears on every edge; None when the pinned
    interval system is infeasible.  Deterministic per rng_seed.
    """
    margin = _validate_margin(margin)
    pins = normalize_input_set(g, S)
    report = lp_feasibility_oracle(g, margin=margin, pinned=pins)
    if not report.lp_feasible:
        return None
    witness = report.witness_theta0
    slack = max(report.witness_margin - margin, 0.0)
    if not np.isfinite(slack):
        slack = _HALF_PI - margin
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    free = [i for i in range(g.n) if (i + 1) not in pins]
    scale = 0.45 * slack
    for attempt in range(max_attempts):
        cand = witness.copy()
        if free and scale > 0.0:
            cand[free] += rng.uniform(-scale, scale, size=len(free))
        if interval_clearance(g, cand) >= margin:
            return cand
        if (attempt + 1) % 20 == 0:
            scale *= 0.5
    return witness.copy()


def _underlying_units(g: SignedDigraph) -> dict[tuple[int, int], float]:
    """Collapse to the simple underlying graph; weights must agree per pair."""
    units: dict[tuple[int, int], float] = {}
    for e in g.edges:
        key = (min(e.src, e.dst), max(e.src, e.dst))
        if key in units:
            if units[key] != e.weight:
                raise GraphError(
                    "parity conditions need an undirected or directed oriented "
                    f"graph; pair {key} carries two distinct weights"
                )
        else:
            units[key] = e.weight
    return units


def _is_directed_cycle(g: SignedDigraph) -> bool:
    if g.undirected or g.m != g.n or g.n < 3:
        return False
    indeg = [0] * (g.n + 1)
    outdeg = [0] * (g.n + 1)
    for e in g.edges:
        indeg[e.dst] += 1
        outdeg[e.src] += 1
    if any(indeg[v] != 1 or outdeg[v] != 1 for v in g.node_ids()):
        return False
    nxt = {e.src: e.dst for e in g.edges}
    seen = set()
    v = 1
    for _ in range(g.n):
        if v in seen:
            return False
        seen.add(v)
        v = nxt[v]
    return v == 1 and len(seen) == g.n


def _cycle_parity(e_pos: int, e_neg: int) -> bool:
    d = e_pos - e_neg
    if d >= 1 and d % 4 in (1, 2):
        return True
    if -d >= 2 and (-d) % 4 in (2, 3):
        return True
    return False


def check_cycle_parity(g: SignedDigraph) -> bool:
    """Sign-count parity rule for a single directed oriented cycle."""
    if not _is_directed_cycle(g):
        raise GraphError("cycle parity rule needs a single directed oriented cycle")
    e_pos = sum(1 for e in g.edges if e.weight > 0)
    return _cycle_parity(e_pos, g.m - e_pos)


def _path_ok(edge_sign: int, pos: int, neg: int) -> bool:
    # Each guarded clause applies when its count difference is nonnegative;
    # the path passes when at least one applicable clause admits it.
    d = pos - neg
    if edge_sign > 0:
        return (d >= 0 and d % 4 in (0, 1)) or (-d >= 0 and (-d) % 4 in (1, 3))
    return (d >= 0 and d % 4 in (2, 3)) or (-d >= 0 and (-d) % 4 in (1, 2))


def check_parity_general(g: SignedDigraph, node_cap: int = _PARITY_NODE_CAP) -> FeasibilityReport:
    """Per-edge parity conditions over every simple alternative path.

    For each underlying edge {i, j}, every simple path between i and j
    of length greater than one must satisfy the sign-count condition
    matching the edge's sign.  Trees pass vacuously; single cycles use
    the cycle rule directly.  Capped at node_cap nodes because path
    enumeration is exhaustive.
    """
    units = _underlying_units(g)
    adj: dict[int, list[int]] = {v: [] for v in g.node_ids()}
    for (a, b) in units:
        adj[a].append(b)
        adj[b].append(a)

    parent = list(range(g.n + 1))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    acyclic = True
    for (a, b) in units:
        ra, rb = find(a), find(b)
        if ra == rb:
            acyclic = False
        else:
            parent[ra] = rb

    if acyclic:
        # No pair of nodes has an alternative path in a forest.
        return FeasibilityReport(
            parity_ok=True, parity_details=(), parity_note="tree: vacuously true"
        )
    connected = len({find(v) for v in g.node_ids()}) == 1
    if _is_directed_cycle(g) or (
        connected and len(units) == g.n and all(len(v) == 2 for v in adj.values())
    ):
        e_pos = sum(1 for w in units.values() if w > 0)
        ok = _cycle_parity(e_pos, len(units) - e_pos)
        return FeasibilityReport(
            parity_ok=ok, parity_details=(), parity_note="cycle: sign-count rule"
        )
    if g.n > node_cap:
        raise GraphError(f"general parity check capped at {node_cap} nodes, graph has {g.n}")

    sign = {k: (1 if w > 0 else -1) for k, w in units.items()}
    path_cache: dict[tuple[int, int], list[tuple[int, int, tuple[int, ...]]]] = {}

    def paths_between(a: int, b: int) -> list[tuple[int, int, tuple[int, ...]]]:
        key = (min(a, b), max(a, b))
        if key in path_cache:
            return path_cache[key]
        found: list[tuple[int, int, tuple[int, ...]]] = []
        start, goal = key

        def dfs(v: int, visited: list[int], pos: int, neg: int) -> None:
            for w in adj[v]:
                if w == goal:
                    if len(visited) >= 2:  # length > 1 means at least one via node
                        s = sign[(min(v, w), max(v, w))]
                        found.append(
                            (pos + (s > 0), neg + (s < 0), tuple(visited + [w]))
                        )
                    continue
                if w in visited:
                    continue
                s = sign[(min(v, w), max(v, w))]
                dfs(w, visited + [w], pos + (s > 0), neg + (s < 0))

        dfs(start, [start], 0, 0)
        path_cache[key] = found
        return found

    details = []
    all_ok = True
    for (a, b), w in sorted(units.items()):
        esign = 1 if w > 0 else -1
        worst: tuple[tuple[int, ...], tuple[int, int]] | None = None
        paths = paths_between(a, b)
        for pos, neg, nodes in paths:
            if not _path_ok(esign, pos, neg):
                worst = (nodes, (pos, neg))
                break
        ok = worst is None
        all_ok &= ok
        details.append(
            PathDiagnostic(
                edge=(a, b),
                edge_sign=esign,
                n_paths=len(paths),
                ok=ok,
                failing_path=worst[0] if worst else None,
                failing_counts=worst[1] if worst else None,
            )
        )
    return FeasibilityReport(parity_ok=all_ok, parity_details=tuple(details))


def check_feasibility(g: SignedDigraph, margin: float = 0.05) -> FeasibilityReport:
    """Run both the parity conditions and the LP oracle on one graph."""
    lp = lp_feasibility_oracle(g, margin=margin)
    try:
        parity = check_parity_general(g)
        parity_ok, details, note = parity.parity_ok, parity.parity_details, parity.parity_note
    except GraphError as exc:
        parity_ok, details, note = None, None, str(exc)
    return FeasibilityReport(
        margin=lp.margin,
        lp_feasible=lp.lp_feasible,
        witness_theta0=lp.witness_theta0,
        witness_margin=lp.witness_margin,
        parity_ok=parity_ok,
        parity_details=details,
        parity_note=note,
    )


@dataclass(frozen=True)
class CycleAuditRecord:
    length: int
    signs: str  # '+'/'-' per cycle edge in order
    e_pos: int
    e_neg: int
    parity_ok: bool
    lp_feasible: bool

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "signs": self.signs,
            "e_pos": self.e_pos,
            "e_neg": self.e_neg,
            "parity_ok": self.parity_ok,
            "lp_feasible": self.lp_feasible,
        }


@dataclass(frozen=True)
class CycleAuditResult:
    records: tuple[CycleAuditRecord, ...]
    discrepancies: tuple[CycleAuditRecord, ...]  # parity true, oracle infeasible
    conservative: tuple[CycleAuditRecord, ...]  # parity false, oracle feasible
    log_path: str | None


def cycle_audit(
    min_len: int = 3,
    max_len: int = 8,
    margin: float = 0.05,
    log_path: str | Path | None = None,
) -> CycleAuditResult:
    """Exhaustive parity-vs-oracle cross-check on signed directed cycles.

    Every sign pattern on every cycle length in [min_len, max_len] is
    scored by both checkers, with node 1 pinned to zero for the oracle.
    A discrepancy is a parity-accepted pattern the exact oracle rejects;
    all discrepancies go to the JSON-lines log when a path is given.
    """
    if not 3 <= min_len <= max_len:
        raise ValueError("cycle audit needs 3 <= min_len <= max_len")
    records = []
    for length in range(min_len, max_len + 1):
        topology = [(i, i + 1) for i in range(1, length)] + [(length, 1)]
        for signs in product((1.0, -1.0), repeat=length):
            g = build_graph(length, [(s, d, w) for (s, d), w in zip(topology, signs)])
            parity = check_cycle_parity(g)
            lp = lp_feasibility_oracle(g, margin=margin, pinned=(1,))
            e_pos = sum(1 for w in signs if w > 0)
            records.append(
                CycleAuditRecord(
                    length=length,
                    signs="".join("+" if w > 0 else "-" for w in signs),
                    e_pos=e_pos,
                    e_neg=length - e_pos,
                    parity_ok=parity,
                    lp_feasible=bool(lp.lp_feasible),
                )
            )
    discrepancies = tuple(r for r in records if r.parity_ok and not r.lp_feasible)
    conservative = tuple(r for r in records if not r.parity_ok and r.lp_feasible)
    written = None
    if log_path is not None:
        p = Path(log_path)
        with p.open("w") as fh:
            for r in discrepancies:
                fh.write(json.dumps(r.to_dict()) + "\n")
        written = str(p)
    return CycleAuditResult(
        records=tuple(records),
        discrepancies=discrepancies,
        conservative=conservative,
        log_path=written,
    )
