import math

import numpy as np
import pytest

from kuramoto_pin import (
    SimConfig,
    Trajectory,
    build_graph,
    detect_frequency_sync,
    detect_phase_sync,
    discrete_sinz_energy,
    metzler_diagnostic,
    monitor_bounds,
    sample_initial_phases,
    simulate,
    storage_function,
)
from helpers import cycle3

TWO_NODE = build_graph(2, [(1, 2, 1.0)])


def test_two_node_homogeneous_monotone_decay():
    traj = simulate(TWO_NODE, np.zeros(2), (1,), [0.0, 1.0], SimConfig(horizon_T=60.0))
    th2 = traj.theta[:, 1]
    assert np.all(np.diff(th2) < 0.0)
    assert th2[-1] < 1e-6
    assert detect_phase_sync(traj).ok
    assert detect_frequency_sync(traj).ok
    assert np.all(np.diff(traj.V_series) <= 1e-12)


def test_two_node_heterogeneous_locks_at_arcsin():
    traj = simulate(TWO_NODE, [0.0, 0.5], (1,), np.zeros(2), SimConfig(horizon_T=60.0))
    assert traj.theta[-1, 1] == pytest.approx(math.asin(0.5), abs=1e-4)
    assert traj.sinz_inf_series.max() <= 0.5 + 1e-3
    assert detect_frequency_sync(traj).ok
    sync = detect_phase_sync(traj)
    assert not sync.ok
    assert sync.residual == pytest.approx(math.pi / 6, abs=1e-3)


def test_all_pinned_network_is_frozen():
    traj = simulate(TWO_NODE, [0.3, -0.2], (1, 2), np.zeros(2))
    assert traj.rs.m_reduced == 0
    assert traj.z.shape == (traj.times.size, 0)
    np.testing.assert_array_equal(traj.theta, 0.0)
    np.testing.assert_array_equal(traj.theta_dot, 0.0)
    np.testing.assert_array_equal(traj.V_series, 0.0)
    assert detect_frequency_sync(traj) == (True, 0.0)
    assert discrete_sinz_energy(traj) == 0.0


def test_storage_function_values():
    assert storage_function(np.zeros(4)) == 0.0
    assert storage_function([math.pi]) == pytest.approx(2.0)
    splay = np.full(3, 2.0 * math.pi / 3.0)
    assert storage_function(splay) == pytest.approx(4.5)
    assert storage_function([2.0 * math.pi]) == pytest.approx(0.0, abs=1e-12)


def test_storage_nonincreasing_on_certified_run():
    g = cycle3()
    th0 = sample_initial_phases(g, S=(1,), rng_seed=2)
    traj = simulate(g, np.zeros(3), (1,), th0, SimConfig(horizon_T=40.0))
    assert np.all(np.diff(traj.V_series) <= 1e-6)
    assert detect_frequency_sync(traj).ok


def test_z_matches_theta_differences():
    g = cycle3()
    th0 = sample_initial_phases(g, S=(2,), rng_seed=7)
    traj = simulate(g, np.zeros(3), (2,), th0, SimConfig(horizon_T=10.0))
    for j, col in enumerate(traj.edge_map):
        e = g.edges[col]
        expect = traj.theta[:, e.dst - 1] - traj.theta[:, e.src - 1]
        np.testing.assert_allclose(traj.z[:, j], expect, atol=1e-10)


def test_theta0_validation():
    with pytest.raises(ValueError):
        simulate(TWO_NODE, np.zeros(2), (1,), [0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        simulate(TWO_NODE, np.zeros(2), (1,), [0.5, 0.0])


def test_sim_config_validation():
    for kwargs in (
        {"step_h": 0.0},
        {"step_h": -0.1},
        {"horizon_T": 0.005},
        {"detector_tol": 0.0},
        {"detector_window": 0.0},
    ):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


def test_detector_window_must_fit():
    traj = simulate(TWO_NODE, np.zeros(2), (1,), [0.0, 0.1], SimConfig(horizon_T=2.0))
    with pytest.raises(ValueError):
        detect_frequency_sync(traj, SimConfig(detector_window=5.0))


def test_discrete_energy_is_left_riemann_sum():
    traj = simulate(TWO_NODE, [0.0, 0.5], (1,), np.zeros(2), SimConfig(horizon_T=5.0))
    manual = float((np.sin(traj.z[:-1]) ** 2).sum() * traj.config.step_h)
    assert discrete_sinz_energy(traj) == pytest.approx(manual, rel=1e-12)
    assert manual > 0.0


def test_monitor_bounds_flags_boundary_start():
    traj = simulate(TWO_NODE, np.zeros(2), (1,), [0.0, math.pi], SimConfig(horizon_T=5.0))
    rep = monitor_bounds(traj, TWO_NODE)
    assert not rep.intervals_ok
    assert rep.first_violation_time == 0.0
    assert rep.first_violation_edge == (1, 2)
    d = rep.to_dict()
    assert d["first_violation_edge"] == [1, 2]


def test_monitor_bounds_clean_run():
    g = cycle3()
    th0 = sample_initial_phases(g, S=(1,), rng_seed=3)
    traj = simulate(g, np.zeros(3), (1,), th0, SimConfig(horizon_T=20.0))
    rep = monitor_bounds(traj, g)
    assert rep.intervals_ok
    assert rep.first_violation_time is None
    assert rep.sup_sinz_inf < 1.0


def test_metzler_positive_weights_inside_region():
    g = cycle3()
    th0 = sample_initial_phases(g, S=(1,), rng_seed=5)
    traj = simulate(g, np.zeros(3), (1,), th0, SimConfig(horizon_T=20.0))
    rep = metzler_diagnostic(traj, g)
    assert rep.all_weights_positive
    assert rep.first_nonpositive_time is None
    assert rep.offdiag_ok
    assert rep.interior_rowsum_max_abs <= 1e-12
    assert rep.input_rowsum_max <= 1e-12


def test_metzler_negative_edge_near_pi_is_effectively_positive():
    g = build_graph(2, [(1, 2, -1.0)])
    traj = simulate(g, np.zeros(2), (1,), [0.0, math.pi], SimConfig(horizon_T=5.0))
    rep = metzler_diagnostic(traj, g, sample_every=10)
    assert rep.all_weights_positive
    assert rep.min_weight == pytest.approx(1.0, abs=1e-6)


def test_simulate_deterministic():
    g = cycle3()
    th0 = sample_initial_phases(g, S=(3,), rng_seed=9)
    a = simulate(g, np.zeros(3), (3,), th0, SimConfig(horizon_T=5.0))
    b = simulate(g, np.zeros(3), (3,), th0, SimConfig(horizon_T=5.0))
    np.testing.assert_array_equal(a.theta, b.theta)
    np.testing.assert_array_equal(a.z, b.z)
    assert isinstance(a, Trajectory)
    assert a.theta.flags.writeable is False
