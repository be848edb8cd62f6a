"""Fixed-step integration of pinned oscillator networks and sync detectors.

The non-input phases follow
    theta_dot = omega(S) - Dhat(S) K(S) sin(D(S)^T theta)
with input phases held at zero.  Phases are kept unwrapped (no mod-2pi
reduction) so the interval monitors read raw phase differences, and
phase velocities are reconstructed from the vector field at the stored
states rather than by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .feasibility import assumption_intervals
from .graph import SignedDigraph
from .spectral import ReducedSystem, reduce_system


class SimulationError(RuntimeError):
    """Integration produced non-finite state."""


@dataclass(frozen=True)
class SimConfig:
    step_h: float = 0.01
    horizon_T: float = 200.0
    detector_tol: float = 1e-6
    detector_window: float = 5.0

    def __post_init__(self) -> None:
        if not self.step_h > 0:
            raise ValueError("step_h must be positive")
        if not self.horizon_T >= self.step_h:
            raise ValueError("horizon_T must cover at least one step")
        if not (self.detector_tol > 0 and self.detector_window > 0):
            raise ValueError("detector tolerance and window must be positive")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense output on the fixed step grid.

    theta and theta_dot have one column per node (inputs pinned at 0);
    z has one column per retained edge, ordered like rs.edge_map.
    V_series is the edge energy sum(1 - cos z_e) and sinz_inf_series is
    the sup norm of sin z, both per step.
    """

    times: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    z: np.ndarray
    V_series: np.ndarray
    sinz_inf_series: np.ndarray
    rs: ReducedSystem
    config: SimConfig

    @property
    def input_nodes(self) -> tuple[int, ...]:
        return self.rs.input_nodes

    @property
    def edge_map(self) -> tuple[int, ...]:
        return self.rs.edge_map


def simulate(
    g: SignedDigraph,
    omega: Sequence[float] | np.ndarray,
    S: Iterable[int],
    theta0: Sequence[float] | np.ndarray,
    config: SimConfig | None = None,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta run with inputs clamped to zero.

    theta0 must already be zero on the input coordinates (tolerance
    1e-12); a non-finite state aborts with SimulationError.
    """
    config = config or SimConfig()
    rs = reduce_system(g, omega, S)
    th0 = np.asarray(theta0, dtype=float)
    if th0.shape != (g.n,):
        raise ValueError(f"theta0 must have shape ({g.n},), got {th0.shape}")
    for i in rs.input_nodes:
        if abs(th0[i - 1]) > 1e-12:
            raise ValueError(f"theta0 must vanish on input node {i}")

    h = config.step_h
    steps = int(round(config.horizon_T / h))
    times = np.arange(steps + 1) * h

    A = rs.DhatS @ rs.KS  # maps sin(z) to coupling accelerations
    DS = rs.DS
    om = rs.omegaS
    free = [i - 1 for i in rs.node_map]

    Y = np.empty((steps + 1, rs.n_reduced))
    y = th0[free].copy()
    Y[0] = y

    def rhs(state: np.ndarray) -> np.ndarray:
        return om - A @ np.sin(DS.T @ state)

    for k in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        Y[k + 1] = y
        if (k + 1) % 500 == 0 and not np.all(np.isfinite(y)):
            raise SimulationError(f"non-finite state at t={times[k + 1]:.3f}")
    if not np.all(np.isfinite(Y)):
        raise SimulationError("non-finite state in stored trajectory")

    theta = np.zeros((steps + 1, g.n))
    theta[:, free] = Y
    Z = Y @ DS
    theta_dot = np.zeros((steps + 1, g.n))
    theta_dot[:, free] = om - np.sin(Z) @ A.T
    V = (1.0 - np.cos(Z)).sum(axis=1) if rs.m_reduced else np.zeros(steps + 1)
    sinz_inf = (
        np.abs(np.sin(Z)).max(axis=1) if rs.m_reduced else np.zeros(steps + 1)
    )
    for a in (times, theta, theta_dot, Z, V, sinz_inf):
        a.setflags(write=False)
    return Trajectory(
        times=times,
        theta=theta,
        theta_dot=theta_dot,
        z=Z,
        V_series=V,
        sinz_inf_series=sinz_inf,
        rs=rs,
        config=config,
    )


class DetectorResult(NamedTuple):
    ok: bool
    residual: float


def _trailing_mask(traj: Trajectory, window: float) -> np.ndarray:
    t_end = traj.times[-1]
    if t_end < window:
        raise ValueError(f"trajectory covers {t_end}s, shorter than window {window}s")
    return traj.times >= t_end - window


def detect_frequency_sync(traj: Trajectory, config: SimConfig | None = None) -> DetectorResult:
    """Max |theta_dot| over the trailing window against the tolerance."""
    config = config or traj.config
    mask = _trailing_mask(traj, config.detector_window)
    residual = float(np.abs(traj.theta_dot[mask]).max()) if traj.theta.shape[1] else 0.0
    return DetectorResult(residual < config.detector_tol, residual)


def detect_phase_sync(traj: Trajectory, config: SimConfig | None = None) -> DetectorResult:
    """Max |theta| over the trailing window against the tolerance."""
    config = config or traj.config
    mask = _trailing_mask(traj, config.detector_window)
    residual = float(np.abs(traj.theta[mask]).max()) if traj.theta.shape[1] else 0.0
    return DetectorResult(residual < config.detector_tol, residual)


def storage_function(z: Sequence[float] | np.ndarray) -> float:
    """Edge energy sum(1 - cos z_e); zero exactly on multiples of 2pi."""
    zz = np.asarray(z, dtype=float)
    return float((1.0 - np.cos(zz)).sum())


def discrete_sinz_energy(traj: Trajectory) -> float:
    """Left Riemann sum of ||sin z(t)||_2^2 over the whole run."""
    if traj.rs.m_reduced == 0:
        return 0.0
    sq = (np.sin(traj.z[:-1]) ** 2).sum(axis=1)
    return float(sq.sum() * traj.config.step_h)


@dataclass(frozen=True)
class BoundsReport:
    sup_sinz_inf: float
    intervals_ok: bool
    first_violation_time: float | None
    first_violation_edge: tuple[int, int] | None

    def to_dict(self) -> dict:
        return {
            "sup_sinz_inf": self.sup_sinz_inf,
            "intervals_ok": self.intervals_ok,
            "first_violation_time": self.first_violation_time,
            "first_violation_edge": (
                list(self.first_violation_edge) if self.first_violation_edge else None
            ),
        }


def monitor_bounds(traj: Trajectory, g: SignedDigraph) -> BoundsReport:
    """Check every retained z_e stays strictly inside its open interval."""
    intervals = assumption_intervals(g)
    sup = float(traj.sinz_inf_series.max()) if traj.rs.m_reduced else 0.0
    first_t: float | None = None
    first_e: tuple[int, int] | None = None
    for j, col in enumerate(traj.edge_map):
        iv = intervals[col]
        zj = traj.z[:, j]
        bad = np.nonzero((zj <= iv.lo) | (zj >= iv.hi))[0]
        if bad.size:
            t = float(traj.times[bad[0]])
            if first_t is None or t < first_t:
                first_t = t
                first_e = (iv.src, iv.dst)
    return BoundsReport(
        sup_sinz_inf=sup,
        intervals_ok=first_t is None,
        first_violation_time=first_t,
        first_violation_edge=first_e,
    )


@dataclass(frozen=True)
class MetzlerReport:
    """Diagnostic on the velocity dynamics matrix -Dhat(S) Kc(S) D(S)^T.

    Off-diagonal nonnegativity and vanishing row sums hold exactly when
    every effective weight K_e cos(z_e(t)) stays positive; rows of nodes
    fed by an input keep a nonpositive surplus instead of zero.
    """

    all_weights_positive: bool
    min_weight: float
    first_nonpositive_time: float | None
    offdiag_ok: bool
    interior_rowsum_max_abs: float
    input_rowsum_max: float

    def to_dict(self) -> dict:
        return {
            "all_weights_positive": self.all_weights_positive,
            "min_weight": self.min_weight,
            "first_nonpositive_time": self.first_nonpositive_time,
            "offdiag_ok": self.offdiag_ok,
            "interior_rowsum_max_abs": self.interior_rowsum_max_abs,
            "input_rowsum_max": self.input_rowsum_max,
        }


def metzler_diagnostic(
    traj: Trajectory, g: SignedDigraph, sample_every: int = 100
) -> MetzlerReport:
    rs = traj.rs
    if rs.m_reduced == 0:
        return MetzlerReport(True, math.inf, None, True, 0.0, 0.0)
    weights = np.array([g.edges[c].weight for c in rs.edge_map])
    idx = np.arange(0, traj.z.shape[0], max(1, sample_every))
    eff = weights[None, :] * np.cos(traj.z[idx])  # K_e cos(z_e) per sampled time
    min_w = float(eff.min())
    bad_rows = np.nonzero((eff <= 0.0).any(axis=1))[0]
    first_bad = float(traj.times[idx[bad_rows[0]]]) if bad_rows.size else None

    inputs = set(rs.input_nodes)
    has_input_feed = np.zeros(rs.n_reduced, dtype=bool)
    for j, col in enumerate(rs.edge_map):
        if g.edges[col].src in inputs:
            has_input_feed[rs.node_map.index(g.edges[col].dst)] = True

    offdiag_ok = True
    interior_max = 0.0
    input_max = -math.inf if has_input_feed.any() else 0.0
    eye = ~np.eye(rs.n_reduced, dtype=bool)
    for row_i, kt in enumerate(idx):
        Kc = np.diag(eff[row_i])
        Amat = -rs.DhatS @ Kc @ rs.DS.T
        if (Amat[eye] < -1e-12).any():
            offdiag_ok = False
        rowsums = Amat.sum(axis=1)
        if (~has_input_feed).any():
            interior_max = max(interior_max, float(np.abs(rowsums[~has_input_feed]).max()))
        if has_input_feed.any():
            input_max = max(input_max, float(rowsums[has_input_feed].max()))
    return MetzlerReport(
        all_weights_positive=min_w > 0.0,
        min_weight=min_w,
        first_nonpositive_time=first_bad,
        offdiag_ok=offdiag_ok,
        interior_rowsum_max_abs=interior_max,
        input_rowsum_max=float(input_max),
    )
