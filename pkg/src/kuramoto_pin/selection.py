"""Control-input selection by submodular surrogate maximization.

The surrogate for an input set S with pinned edge columns E(S) is

    Q(E(S)) = E[ min{ w^T R w + alpha * sum_{j in E(S)} w_j^2, delta } ]

with w drawn Gaussian and normalized to the unit sphere.  Q saturates
at delta exactly when lambda_min(R + alpha * diag(E(S))) >= delta, is
monotone in E(S), and has diminishing returns sample-by-sample, which
is what the greedy argmax exploits.  Termination is always decided by
the exact eigenvalue test lambda_min(R(S)) > delta + EPS_STRICT, never
by the Monte-Carlo estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .graph import SignedDigraph, normalize_input_set
from .spectral import EPS_STRICT, lambda_min, reduce_system

_BOUND_TOL = 1e-12


class QEstimate(NamedTuple):
    """Monte-Carlo estimate with its standard error."""

    value: float
    stderr: float


@dataclass(frozen=True)
class QEstimatorConfig:
    sample_count: int = 2000
    alpha: float | None = None  # None resolves via choose_alpha
    rng_seed: int = 0
    shared_samples: bool = True


@dataclass(frozen=True)
class IterationRecord:
    """One greedy step: chosen node, its surrogate value, exact lambda_min."""

    node: int
    q_value: float | None
    q_stderr: float | None
    lambda_min: float


@dataclass(frozen=True)
class BoundReport:
    """A-posteriori cardinality bound data for a greedy run of T steps.

    log_ratio_stated is log((delta - lambda_min(R)) / (delta - Q(E(S_{T-1}))))
    with Q(empty) = lambda_min(R); log_ratio_observed substitutes the
    recorded final estimate Q(E(S_T)) for delta in both places.  Either
    is None when its ratio is undefined (nonpositive numerator or
    denominator) or when T = 0.
    """

    delta: float
    q_empty: float
    q_penultimate: float | None
    q_final: float | None
    log_ratio_stated: float | None
    log_ratio_observed: float | None


@dataclass(frozen=True)
class SelectionResult:
    S: tuple[int, ...]
    algorithm: str
    delta: float
    lambda_min: float
    terminated_ok: bool
    iterations: tuple[IterationRecord, ...] = ()
    alpha: float | None = None
    sample_count: int | None = None
    rng_seed: int | None = None
    bound_report: BoundReport | None = None

    def to_dict(self) -> dict:
        # lambda_min is +inf when every node is pinned; emit the string
        # "inf" so the payload stays strict JSON.
        lam = self.lambda_min if math.isfinite(self.lambda_min) else "inf"
        d = {
            "algorithm": self.algorithm,
            "S": list(self.S),
            "delta": self.delta,
            "lambda_min": lam,
            "terminated_ok": self.terminated_ok,
            "iterations": [
                {
                    "node": r.node,
                    "q_value": r.q_value,
                    "q_stderr": r.q_stderr,
                    "lambda_min": r.lambda_min,
                }
                for r in self.iterations
            ],
        }
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.sample_count is not None:
            d["sample_count"] = self.sample_count
        if self.rng_seed is not None:
            d["rng_seed"] = self.rng_seed
        if self.bound_report is not None:
            b = self.bound_report
            d["bound_report"] = {
                "delta": b.delta,
                "q_empty": b.q_empty,
                "q_penultimate": b.q_penultimate,
                "q_final": b.q_final,
                "log_ratio_stated": b.log_ratio_stated,
                "log_ratio_observed": b.log_ratio_observed,
            }
        return d


def choose_alpha(R_full: np.ndarray, delta: float) -> float:
    """Penalty weight guaranteeing full pinning lifts the spectrum past delta."""
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    R = np.asarray(R_full, dtype=float)
    if R.shape[0] == 0:
        return 1.0
    return max(1.0, delta - lambda_min(R) + float(np.linalg.norm(R, "fro")))


def _unit_sphere_samples(rng: np.random.Generator, count: int, m: int) -> np.ndarray:
    W = rng.standard_normal((count, m))
    norms = np.linalg.norm(W, axis=1)
    norms[norms == 0.0] = 1.0
    return W / norms[:, None]


def _capped_values(
    R: np.ndarray,
    W: np.ndarray,
    alpha: float,
    pinned_cols: Sequence[int],
    delta: float,
) -> np.ndarray:
    qf = np.einsum("ij,ij->i", W @ R, W)
    if len(pinned_cols):
        qf = qf + alpha * (W[:, list(pinned_cols)] ** 2).sum(axis=1)
    return np.minimum(qf, delta)


def _mean_stderr(vals: np.ndarray) -> QEstimate:
    n = vals.size
    se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return QEstimate(float(vals.mean()), se)


def q_estimate(
    R_full: np.ndarray,
    pinned_edges: Iterable[int],
    delta: float,
    cfg: QEstimatorConfig | None = None,
) -> QEstimate:
    """Monte-Carlo surrogate value for a pinned edge-column set.

    Deterministic per cfg.rng_seed: calls sharing a seed share samples,
    which makes monotonicity and diminishing returns hold sample-by-
    sample rather than only in expectation.  With no columns at all
    (m = 0) the surrogate is delta exactly.
    """
    cfg = cfg or QEstimatorConfig()
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    if cfg.sample_count < 1:
        raise ValueError("sample_count must be positive")
    R = np.asarray(R_full, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    m = R.shape[0]
    if m == 0:
        return QEstimate(delta, 0.0)
    pinned = sorted({int(k) for k in pinned_edges})
    for k in pinned:
        if not 0 <= k < m:
            raise ValueError(f"pinned edge index {k} outside 0..{m - 1}")
    alpha = cfg.alpha if cfg.alpha is not None else choose_alpha(R, delta)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed))
    W = _unit_sphere_samples(rng, cfg.sample_count, m)
    return _mean_stderr(_capped_values(R, W, alpha, pinned, delta))


def _full_R(g: SignedDigraph, omega: Sequence[float] | np.ndarray) -> np.ndarray:
    return reduce_system(g, omega, ()).RS


def _lam_pinned(R: np.ndarray, pinned_cols: set[int]) -> float:
    keep = [k for k in range(R.shape[0]) if k not in pinned_cols]
    if not keep:
        return math.inf
    return float(np.linalg.eigvalsh(R[np.ix_(keep, keep)])[0])


def _lam_penalized(R: np.ndarray, alpha: float, cols: set[int]) -> float:
    Rp = R.copy()
    idx = sorted(cols)
    Rp[idx, idx] += alpha
    return float(np.linalg.eigvalsh(Rp)[0])


def _resolve_argmax(
    rows: list[tuple[int, QEstimate, list[int]]],
    R: np.ndarray,
    alpha: float,
    pinned: set[int],
) -> tuple[int, QEstimate]:
    # Surrogate first; statistically tied leaders fall back to the exact
    # penalized eigenvalue, then to the lowest node id.
    best_val = max(est.value for _, est, _ in rows)
    best_se = next(est.stderr for _, est, _ in rows if est.value == best_val)
    tied = [
        row
        for row in rows
        if row[1].value >= best_val - 3.0 * math.hypot(best_se, row[1].stderr)
    ]
    if len(tied) == 1:
        return tied[0][0], tied[0][1]
    scored = [
        (_lam_penalized(R, alpha, pinned | set(extra)), cand, est)
        for cand, est, extra in tied
    ]
    top = max(lam for lam, _, _ in scored)
    tol = 1e-9 * max(1.0, abs(top))
    for lam, cand, est in scored:
        if lam >= top - tol:
            return cand, est
    raise AssertionError("unreachable")


def select_submodular(
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray,
    delta: float,
    cfg: QEstimatorConfig | None = None,
) -> SelectionResult:
    """Greedy input selection by the Monte-Carlo surrogate argmax.

    Each iteration draws one shared sample set (stream keyed by
    (rng_seed, iteration)) and scores every candidate node by the
    surrogate of the union E(S) + E(candidate).  Candidates whose
    estimates are statistically indistinguishable from the leader
    (within 3 combined standard errors, which includes the fully
    capped delta=0 regime where every estimate is exactly delta) are
    re-ranked by the exact penalized eigenvalue
    lambda_min(R + alpha*diag(E(S) + E(candidate))); remaining ties
    break toward the lowest node id.  The loop stops as soon as the
    exact test lambda_min(R(S)) > delta + EPS_STRICT holds; pinning
    all nodes empties the edge set (lambda_min = +inf), so termination
    is unconditional.
    """
    cfg = cfg or QEstimatorConfig()
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    om = np.asarray(omega, dtype=float)
    R = _full_R(g, om)
    alpha = cfg.alpha if cfg.alpha is not None else choose_alpha(R, delta)
    in_cols = g.incoming
    q_empty = lambda_min(R) if R.shape[0] else math.inf

    S: list[int] = []
    pinned: set[int] = set()
    records: list[IterationRecord] = []
    lam = _lam_pinned(R, pinned)
    iteration = 0
    while lam <= delta + EPS_STRICT and len(S) < g.n:
        iteration += 1
        shared_W = None
        if cfg.shared_samples:
            rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, iteration]))
            shared_W = _unit_sphere_samples(rng, cfg.sample_count, R.shape[0])
            base = np.einsum("ij,ij->i", shared_W @ R, shared_W)
            Wsq = shared_W**2
            pin_base = (
                alpha * Wsq[:, sorted(pinned)].sum(axis=1) if pinned else np.zeros(len(Wsq))
            )
        rows: list[tuple[int, QEstimate, list[int]]] = []
        for cand in g.node_ids():
            if cand in S:
                continue
            extra = [c for c in in_cols[cand - 1] if c not in pinned]
            if cfg.shared_samples:
                vals = np.minimum(
                    base + pin_base + alpha * Wsq[:, extra].sum(axis=1), delta
                )
                est = _mean_stderr(vals)
            else:
                rng = np.random.default_rng(
                    np.random.SeedSequence([cfg.rng_seed, iteration, cand])
                )
                W = _unit_sphere_samples(rng, cfg.sample_count, R.shape[0])
                est = _mean_stderr(
                    _capped_values(R, W, alpha, sorted(pinned | set(extra)), delta)
                )
            rows.append((cand, est, extra))
        node, est = _resolve_argmax(rows, R, alpha, pinned)
        S.append(node)
        pinned.update(in_cols[node - 1])
        lam = _lam_pinned(R, pinned)
        records.append(
            IterationRecord(node=node, q_value=est.value, q_stderr=est.stderr, lambda_min=lam)
        )

    result = SelectionResult(
        S=tuple(sorted(S)),
        algorithm="submodular",
        delta=delta,
        lambda_min=lam,
        terminated_ok=True,
        iterations=tuple(records),
        alpha=alpha,
        sample_count=cfg.sample_count,
        rng_seed=cfg.rng_seed,
    )
    return _attach_bound_report(result, q_empty)


def _attach_bound_report(result: SelectionResult, q_empty: float) -> SelectionResult:
    T = len(result.iterations)
    if T == 0:
        return result
    q_final = result.iterations[-1].q_value
    q_pen = q_empty if T == 1 else result.iterations[-2].q_value

    def _log_ratio(top_ref: float) -> float | None:
        num = top_ref - q_empty
        den = top_ref - q_pen
        if num <= _BOUND_TOL or den <= _BOUND_TOL:
            return None
        return math.log(num / den)

    report = BoundReport(
        delta=result.delta,
        q_empty=q_empty,
        q_penultimate=q_pen,
        q_final=q_final,
        log_ratio_stated=_log_ratio(result.delta),
        log_ratio_observed=_log_ratio(q_final) if q_final is not None else None,
    )
    return SelectionResult(
        S=result.S,
        algorithm=result.algorithm,
        delta=result.delta,
        lambda_min=result.lambda_min,
        terminated_ok=result.terminated_ok,
        iterations=result.iterations,
        alpha=result.alpha,
        sample_count=result.sample_count,
        rng_seed=result.rng_seed,
        bound_report=report,
    )


def optimality_bound(result: SelectionResult, R_full: np.ndarray) -> float | None:
    """Stated a-posteriori log-ratio for a greedy run; None when undefined."""
    T = len(result.iterations)
    if T == 0:
        return None
    q_empty = lambda_min(np.asarray(R_full, dtype=float))
    q_pen = q_empty if T == 1 else result.iterations[-2].q_value
    if q_pen is None:
        return None
    num = result.delta - q_empty
    den = result.delta - q_pen
    if num <= _BOUND_TOL or den <= _BOUND_TOL:
        return None
    return math.log(num / den)


def select_greedy_lambda(
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray,
    delta: float,
) -> SelectionResult:
    """Greedy input selection scoring candidates by exact lambda_min(R(S+i))."""
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    R = _full_R(g, np.asarray(omega, dtype=float))
    in_cols = g.incoming
    S: list[int] = []
    pinned: set[int] = set()
    records: list[IterationRecord] = []
    lam = _lam_pinned(R, pinned)
    while lam <= delta + EPS_STRICT and len(S) < g.n:
        best: tuple[int, float] | None = None
        for cand in g.node_ids():
            if cand in S:
                continue
            lam_c = _lam_pinned(R, pinned | set(in_cols[cand - 1]))
            if best is None or lam_c > best[1]:
                best = (cand, lam_c)
        node, lam = best
        S.append(node)
        pinned.update(in_cols[node - 1])
        records.append(IterationRecord(node=node, q_value=None, q_stderr=None, lambda_min=lam))
    return SelectionResult(
        S=tuple(sorted(S)),
        algorithm="greedy",
        delta=delta,
        lambda_min=lam,
        terminated_ok=True,
        iterations=tuple(records),
    )


def select_random(
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray,
    delta: float,
    rng_seed: int = 0,
) -> SelectionResult:
    """Add uniformly random nodes until the exact certificate holds."""
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    R = _full_R(g, np.asarray(omega, dtype=float))
    in_cols = g.incoming
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    S: list[int] = []
    pinned: set[int] = set()
    records: list[IterationRecord] = []
    lam = _lam_pinned(R, pinned)
    while lam <= delta + EPS_STRICT and len(S) < g.n:
        remaining = [i for i in g.node_ids() if i not in S]
        node = remaining[int(rng.integers(len(remaining)))]
        S.append(node)
        pinned.update(in_cols[node - 1])
        lam = _lam_pinned(R, pinned)
        records.append(IterationRecord(node=node, q_value=None, q_stderr=None, lambda_min=lam))
    return SelectionResult(
        S=tuple(sorted(S)),
        algorithm="random",
        delta=delta,
        lambda_min=lam,
        terminated_ok=True,
        iterations=tuple(records),
        rng_seed=rng_seed,
    )


def select_optimal(
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray,
    delta: float,
    cap: int = 16,
) -> SelectionResult:
    """Exhaustive minimum-cardinality certified set (lexicographic ties).

    Subsets are scanned by cardinality then lexicographic order, so the
    first certified subset found is the canonical optimum.  Rejected
    for n > cap to keep the 2^n scan at desk scale.
    """
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    if g.n > cap:
        raise ValueError(f"exhaustive search capped at {cap} nodes, graph has {g.n}")
    R = _full_R(g, np.asarray(omega, dtype=float))
    in_cols = g.incoming
    for k in range(g.n + 1):
        for combo in combinations(g.node_ids(), k):
            pinned: set[int] = set()
            for i in combo:
                pinned.update(in_cols[i - 1])
            lam = _lam_pinned(R, pinned)
            if lam > delta + EPS_STRICT:
                return SelectionResult(
                    S=tuple(combo),
                    algorithm="optimal",
                    delta=delta,
                    lambda_min=lam,
                    terminated_ok=True,
                )
    raise RuntimeError("unreachable: pinning every node certifies vacuously")
