"""Seeded sweep harness comparing the selection algorithms.

A sweep fixes one graph kind and walks an axis: either a grid of
negative-edge fractions (identical natural frequencies, delta = 0) or
bins of the frequency-to-coupling ratio WF (heterogeneous frequencies,
delta from the edge-wise spread bound), scoring every realization with
each requested algorithm.  Rows are fully determined by the master
seed: per-realization seeds come from a stable content hash, records
are sorted before emission, and wall-time capture defaults to off so a
repeated sweep is byte-identical no matter how many workers ran it.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import GRAPH_KINDS, SignedDigraph, generate_ensemble
from .selection import (
    QEstimatorConfig,
    SelectionResult,
    select_greedy_lambda,
    select_optimal,
    select_random,
    select_submodular,
)
from .spectral import EPS_STRICT, hetero_threshold, reduce_system

CSV_COLUMNS = (
    "graph_kind",
    "point",
    "realization",
    "seed",
    "algorithm",
    "num_inputs",
    "lambda_min",
    "delta",
    "wall_ms",
)

ALGORITHMS = ("submodular", "greedy", "random", "optimal")


class ConfigError(ValueError):
    """Invalid sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    graph_kind: str
    sweep_axis: str = "neg_fraction"  # or "wf"
    grid: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    n: int = 10
    realizations: int = 100
    delta_mode: str = "homogeneous"  # or "heterogeneous"
    edge_prob: float = 0.3
    weight_range: tuple[float, float] = (1.0, 5.0)
    omega_range: tuple[float, float] = (0.0, 2.0)
    neg_fraction: float = 0.3  # held fixed on WF sweeps
    master_seed: int = 0
    algorithms: tuple[str, ...] = ALGORITHMS
    sample_count: int = 2000
    optimal_cap: int = 16
    record_wall_time: bool = False

    def __post_init__(self) -> None:
        if self.graph_kind not in GRAPH_KINDS:
            raise ConfigError(f"unknown graph kind {self.graph_kind!r}")
        if self.sweep_axis not in ("neg_fraction", "wf"):
            raise ConfigError(f"sweep_axis must be 'neg_fraction' or 'wf', got {self.sweep_axis!r}")
        if self.delta_mode not in ("homogeneous", "heterogeneous"):
            raise ConfigError(f"unknown delta_mode {self.delta_mode!r}")
        if self.sweep_axis == "wf" and self.delta_mode == "homogeneous":
            raise ConfigError("WF sweeps need heterogeneous frequencies")
        if len(self.grid) < (2 if self.sweep_axis == "wf" else 1):
            raise ConfigError("grid too short for the chosen axis")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid values must be strictly increasing")
        if self.realizations < 1:
            raise ConfigError("realizations must be positive")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ConfigError(f"unknown algorithms {sorted(unknown)}")
        if "optimal" in self.algorithms and self.n > self.optimal_cap:
            raise ConfigError(
                f"optimal selection capped at {self.optimal_cap} nodes, n={self.n}"
            )

    def to_dict(self) -> dict:
        return {
            "graph_kind": self.graph_kind,
            "sweep_axis": self.sweep_axis,
            "grid": list(self.grid),
            "n": self.n,
            "realizations": self.realizations,
            "delta_mode": self.delta_mode,
            "edge_prob": self.edge_prob,
            "weight_range": list(self.weight_range),
            "omega_range": list(self.omega_range),
            "neg_fraction": self.neg_fraction,
            "master_seed": self.master_seed,
            "algorithms": list(self.algorithms),
            "sample_count": self.sample_count,
            "optimal_cap": self.optimal_cap,
            "record_wall_time": self.record_wall_time,
        }

    @staticmethod
    def from_dict(raw: dict) -> "SweepConfig":
        known = {
            "graph_kind",
            "sweep_axis",
            "grid",
            "n",
            "realizations",
            "delta_mode",
            "edge_prob",
            "weight_range",
            "omega_range",
            "neg_fraction",
            "master_seed",
            "algorithms",
            "sample_count",
            "optimal_cap",
            "record_wall_time",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        kwargs = dict(raw)
        for key in ("grid", "weight_range", "omega_range", "algorithms"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return SweepConfig(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class SweepRecord:
    graph_kind: str
    point: float
    realization: int
    seed: int
    algorithm: str
    num_inputs: int
    lambda_min: float
    delta: float
    wall_ms: float

    def row(self) -> list:
        return [
            self.graph_kind,
            self.point,
            self.realization,
            self.seed,
            self.algorithm,
            self.num_inputs,
            self.lambda_min,
            self.delta,
            self.wall_ms,
        ]


def realization_seed(master_seed: int, point, index: int) -> int:
    """Stable 63-bit seed from (master seed, axis point, realization)."""
    token = f"{master_seed}|{point!r}|{index}".encode()
    return int.from_bytes(hashlib.sha256(token).digest()[:8], "big") >> 1


def wf_parameter(g: SignedDigraph, omega: Sequence[float] | np.ndarray) -> float:
    """||D^T omega||_2 divided by the largest signed in-weight sum."""
    om = np.asarray(omega, dtype=float)
    if om.shape != (g.n,):
        raise ValueError(f"omega must have shape ({g.n},), got {om.shape}")
    d_in = np.zeros(g.n)
    for e in g.edges:
        d_in[e.dst - 1] += e.weight
    top = float(d_in.max())
    if top == 0.0:
        raise ValueError("WF parameter undefined: all in-weight sums are zero")
    diffs = np.array([om[e.dst - 1] - om[e.src - 1] for e in g.edges])
    return float(np.linalg.norm(diffs) / top)


def _derived_int(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([seed, tag]).generate_state(1, np.uint64)[0] >> 1)


def _run_algorithms(
    cfg: SweepConfig,
    g: SignedDigraph,
    omega: np.ndarray,
    delta: float,
    point: float,
    realization: int,
    seed: int,
) -> list[SweepRecord]:
    records = []
    for alg in cfg.algorithms:
        start = time.perf_counter() if cfg.record_wall_time else 0.0
        try:
            if alg == "submodular":
                res = select_submodular(
                    g,
                    omega,
                    delta,
                    QEstimatorConfig(
                        sample_count=cfg.sample_count, rng_seed=_derived_int(seed, 3)
                    ),
                )
            elif alg == "greedy":
                res = select_greedy_lambda(g, omega, delta)
            elif alg == "random":
                res = select_random(g, omega, delta, rng_seed=_derived_int(seed, 2))
            else:
                res = select_optimal(g, omega, delta, cap=cfg.optimal_cap)
            num, lam = len(res.S), res.lambda_min
        except Exception:  # record the failure row, keep sweeping
            num, lam = -1, math.nan
        wall = (time.perf_counter() - start) * 1e3 if cfg.record_wall_time else 0.0
        records.append(
            SweepRecord(
                graph_kind=cfg.graph_kind,
                point=point,
                realization=realization,
                seed=seed,
                algorithm=alg,
                num_inputs=num,
                lambda_min=lam,
                delta=delta,
                wall_ms=wall,
            )
        )
    return records


def _realize(cfg: SweepConfig, point, index: int) -> tuple[SignedDigraph, np.ndarray, float, int]:
    seed = realization_seed(cfg.master_seed, point, index)
    neg = float(point) if cfg.sweep_axis == "neg_fraction" else cfg.neg_fraction
    g = generate_ensemble(
        cfg.graph_kind,
        cfg.n,
        edge_prob=cfg.edge_prob,
        weight_range=cfg.weight_range,
        neg_fraction=neg,
        rng_seed=seed,
    )
    if cfg.delta_mode == "homogeneous":
        omega = np.zeros(cfg.n)
        delta = 0.0
    else:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        omega = rng.uniform(cfg.omega_range[0], cfg.omega_range[1], size=cfg.n)
        delta = hetero_threshold(g, omega)
    return g, omega, delta, seed


def _neg_fraction_task(cfg: SweepConfig, point: float, index: int) -> list[SweepRecord]:
    g, omega, delta, seed = _realize(cfg, point, index)
    return _run_algorithms(cfg, g, omega, delta, point, index, seed)


def _wf_task(cfg: SweepConfig, index: int) -> list[SweepRecord]:
    g, omega, delta, seed = _realize(cfg, "wf", index)
    wf = wf_parameter(g, omega)
    edges = cfg.grid
    if not edges[0] <= wf < edges[-1]:
        return []  # outside the binning range; dropped by design
    bin_id = int(np.searchsorted(edges, wf, side="right")) - 1
    mid = (edges[bin_id] + edges[bin_id + 1]) / 2.0
    return _run_algorithms(cfg, g, omega, delta, mid, index, seed)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> tuple[list[SweepRecord], dict]:
    """Execute every (point, realization, algorithm) cell; sorted records.

    WF sweeps draw realizations * (len(grid) - 1) graphs at the fixed
    neg_fraction and bin them by realized WF, so bin populations vary.
    Worker count affects scheduling only, never the emitted rows.
    """
    if workers < 1:
        raise ConfigError("workers must be positive")
    tasks = []
    if cfg.sweep_axis == "neg_fraction":
        for point in cfg.grid:
            for r in range(cfg.realizations):
                tasks.append((cfg, point, r))
        runner = _neg_fraction_task
        if workers == 1:
            chunks = [runner(*t[:3]) for t in tasks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(lambda t: runner(*t[:3]), tasks))
    else:
        total = cfg.realizations * (len(cfg.grid) - 1)
        indices = list(range(total))
        if workers == 1:
            chunks = [_wf_task(cfg, i) for i in indices]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(lambda i: _wf_task(cfg, i), indices))
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.graph_kind, r.point, r.realization, r.algorithm))
    return records, summarize(records)


def summarize(records: Iterable[SweepRecord]) -> dict:
    """Per-point per-algorithm means plus the submodular-optimal gap."""
    records = list(records)
    by_cell: dict[tuple, list[int]] = {}
    for r in records:
        if r.num_inputs < 0:
            continue
        by_cell.setdefault((r.graph_kind, r.point, r.algorithm), []).append(r.num_inputs)
    points = []
    for (kind, point, alg), vals in sorted(by_cell.items()):
        arr = np.array(vals, dtype=float)
        sem = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
        points.append(
            {
                "graph_kind": kind,
                "point": point,
                "algorithm": alg,
                "mean_num_inputs": float(arr.mean()),
                "sem": sem,
                "count": len(arr),
            }
        )
    paired: dict[tuple, dict[str, int]] = {}
    for r in records:
        if r.num_inputs < 0:
            continue
        paired.setdefault((r.graph_kind, r.point, r.realization), {})[r.algorithm] = r.num_inputs
    gaps = [
        cell["submodular"] - cell["optimal"]
        for cell in paired.values()
        if "submodular" in cell and "optimal" in cell
    ]
    return {
        "points": points,
        "gap_submodular_optimal": float(np.mean(gaps)) if gaps else None,
        "gap_count": len(gaps),
    }


def emit_results(
    records: Iterable[SweepRecord],
    path: str | Path,
    fmt: str = "csv",
) -> None:
    """Write records as CSV (fixed column schema) or JSON."""
    path = Path(path)
    records = list(records)
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in records:
                writer.writerow(rec.row())
    elif fmt == "json":
        payload = [dict(zip(CSV_COLUMNS, rec.row())) for rec in records]
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}")


def load_records(path: str | Path) -> list[SweepRecord]:
    """Read back a CSV emitted by emit_results."""
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"unexpected CSV header {header!r}")
        for row in reader:
            out.append(
                SweepRecord(
                    graph_kind=row[0],
                    point=float(row[1]),
                    realization=int(row[2]),
                    seed=int(row[3]),
                    algorithm=row[4],
                    num_inputs=int(row[5]),
                    lambda_min=float(row[6]),
                    delta=float(row[7]),
                    wall_ms=float(row[8]),
                )
            )
    return out


def validate_records(records: Iterable[SweepRecord], n: int | None = None) -> None:
    """Re-check the certificate inequality on every successful row."""
    for r in records:
        if r.num_inputs < 0:
            continue
        if n is not None and r.num_inputs > n:
            raise ValueError(f"row has num_inputs={r.num_inputs} > n={n}")
        if not r.lambda_min > r.delta + EPS_STRICT:
            raise ValueError(
                f"row fails re-validation: lambda_min={r.lambda_min} delta={r.delta}"
            )
