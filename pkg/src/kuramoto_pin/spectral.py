"""Reduced coupling matrices and spectral synchronization certificates.

Removing an input set S deletes the rows of S and the columns of every
edge entering S from the incidence matrices.  The reduced coupling
matrix is M(S) = D(S)^T Dhat(S) K(S) and its symmetric part R(S)
carries the certificates: positive definiteness for identical natural
frequencies, and lambda_min(R(S)) > ||D(S)^T omega(S)||_2 for
heterogeneous ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import SignedDigraph, incidence_bundle, normalize_input_set, partition

# Strictness tolerance: a certificate needs lambda_min > delta + EPS_STRICT.
EPS_STRICT = 1e-8


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Matrices of the non-input dynamics for one input set.

    edge_map[j] is the canonical column id behind reduced column j
    (edges among non-inputs first, then edges from inputs, preserving
    canonical order within each block); node_map[i] is the 1-based node
    id behind reduced row i (non-inputs ascending).
    """

    DS: np.ndarray
    DhatS: np.ndarray
    KS: np.ndarray
    MS: np.ndarray
    RS: np.ndarray
    omegaS: np.ndarray
    edge_map: tuple[int, ...]
    node_map: tuple[int, ...]
    input_nodes: tuple[int, ...]

    @property
    def n_reduced(self) -> int:
        return self.DS.shape[0]

    @property
    def m_reduced(self) -> int:
        return self.DS.shape[1]


def reduce_system(
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray,
    S: Iterable[int],
) -> ReducedSystem:
    """Delete input rows and input-entering columns, then form M(S), R(S)."""
    inputs = normalize_input_set(g, S)
    om = np.asarray(omega, dtype=float)
    if om.shape != (g.n,):
        raise ValueError(f"omega must have shape ({g.n},), got {om.shape}")
    part = partition(g, inputs)
    blocks = part.blocks
    keep_edges = blocks[0] + blocks[1]
    keep_nodes = part.node_order[: g.n - len(inputs)]
    rows = [i - 1 for i in keep_nodes]
    cols = list(keep_edges)
    b = incidence_bundle(g)
    DS = b.D[np.ix_(rows, cols)]
    DhatS = b.Dhat[np.ix_(rows, cols)]
    KS = b.K[np.ix_(cols, cols)]
    MS = DS.T @ DhatS @ KS
    RS = (MS + MS.T) / 2.0
    omegaS = om[rows]
    for a in (DS, DhatS, KS, MS, RS, omegaS):
        a.setflags(write=False)
    return ReducedSystem(
        DS=DS,
        DhatS=DhatS,
        KS=KS,
        MS=MS,
        RS=RS,
        omegaS=omegaS,
        edge_map=keep_edges,
        node_map=keep_nodes,
        input_nodes=inputs,
    )


def lambda_min(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix; +inf for the 0x0 case.

    The input is symmetrized defensively before the solve.  Non-square
    input is rejected.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        return math.inf
    return float(np.linalg.eigvalsh((A + A.T) / 2.0)[0])


def submatrix_R(R_full: np.ndarray, removed_edges: Iterable[int]) -> np.ndarray:
    """Principal submatrix of R with the given canonical columns removed.

    Retained indices keep their ascending canonical order, so removing
    nothing returns R unchanged.
    """
    R = np.asarray(R_full, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {R.shape}")
    removed = {int(k) for k in removed_edges}
    m = R.shape[0]
    for k in removed:
        if not 0 <= k < m:
            raise ValueError(f"removed edge index {k} outside 0..{m - 1}")
    keep = [k for k in range(m) if k not in removed]
    return R[np.ix_(keep, keep)].copy()


def hetero_threshold(g: SignedDigraph, omega: Sequence[float] | np.ndarray) -> float:
    """Frequency-spread bound dominating ||D(S)^T omega(S)||_2 for every S.

    Each edge (j, i) contributes max{(omega_j - omega_i)^2, omega_i^2,
    omega_j^2}; the bound is the square root of the total.
    """
    om = np.asarray(omega, dtype=float)
    if om.shape != (g.n,):
        raise ValueError(f"omega must have shape ({g.n},), got {om.shape}")
    total = 0.0
    for e in g.edges:
        wj, wi = om[e.src - 1], om[e.dst - 1]
        total += max((wj - wi) ** 2, wi**2, wj**2)
    return math.sqrt(total)


def dtw_norm(rs: ReducedSystem) -> float:
    """||D(S)^T omega(S)||_2, the disturbance felt by the edge dynamics."""
    if rs.m_reduced == 0:
        return 0.0
    return float(np.linalg.norm(rs.DS.T @ rs.omegaS))


@dataclass(frozen=True)
class Certificate:
    """Outcome of comparing lambda_min(R(S)) against a threshold delta."""

    lambda_min: float
    delta: float
    satisfied: bool
    margin: float


def certify(lam: float, delta: float) -> Certificate:
    if not delta >= 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    return Certificate(
        lambda_min=lam,
        delta=delta,
        satisfied=bool(lam > delta + EPS_STRICT),
        margin=lam - delta,
    )
