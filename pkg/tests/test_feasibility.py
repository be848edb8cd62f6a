import json
import math

import numpy as np
import pytest

from kuramoto_pin import (
    GraphError,
    assumption_intervals,
    build_graph,
    check_cycle_parity,
    check_feasibility,
    check_parity_general,
    cycle_audit,
    generate_ensemble,
    interval_clearance,
    lp_feasibility_oracle,
    sample_initial_phases,
)
from helpers import cycle3, directed_cycle

HALF_PI = math.pi / 2.0


def test_intervals_keyed_by_sign():
    g = build_graph(3, [(1, 2, 2.0), (2, 3, -0.5)])
    ivs = assumption_intervals(g)
    assert [(iv.index, iv.src, iv.dst) for iv in ivs] == [(0, 1, 2), (1, 2, 3)]
    assert (ivs[0].lo, ivs[0].hi) == (-HALF_PI, HALF_PI)
    assert (ivs[1].lo, ivs[1].hi) == (HALF_PI, 3 * HALF_PI)


def test_margin_validation():
    g = cycle3()
    for bad in (-0.1, math.pi / 4, 1.0):
        with pytest.raises(ValueError):
            lp_feasibility_oracle(g, margin=bad)


def test_lp_positive_cycle_feasible_at_origin():
    r = lp_feasibility_oracle(cycle3())
    assert r.lp_feasible
    assert r.witness_margin == pytest.approx(HALF_PI)
    np.testing.assert_allclose(r.witness_theta0, 0.0, atol=1e-9)


def test_lp_opposed_signs_on_one_pair_infeasible():
    g = build_graph(2, [(1, 2, 1.0), (2, 1, -1.0)])
    r = lp_feasibility_oracle(g)
    assert not r.lp_feasible
    assert r.witness_theta0 is None


def test_lp_respects_pins():
    # both negative edges point at node 2, so theta_2 = pi works with 1, 3 pinned
    g = build_graph(3, [(1, 2, -1.0), (3, 2, -1.0)])
    r = lp_feasibility_oracle(g, pinned=(1, 3))
    assert r.lp_feasible
    assert r.witness_theta0[0] == pytest.approx(0.0, abs=1e-9)
    assert r.witness_theta0[2] == pytest.approx(0.0, abs=1e-9)
    assert r.witness_theta0[1] == pytest.approx(math.pi, abs=1e-6)
    assert interval_clearance(g, r.witness_theta0) >= 0.05 - 1e-9
    # flipping one sign leaves no interval for theta_2
    h = build_graph(3, [(1, 2, -1.0), (3, 2, 1.0)])
    assert not lp_feasibility_oracle(h, pinned=(1, 3)).lp_feasible


def test_lp_witness_clears_margin_on_signed_trees():
    for seed in range(30):
        g = generate_ensemble("tree", 8, neg_fraction=0.5, rng_seed=seed)
        r = lp_feasibility_oracle(g, margin=0.1)
        assert r.lp_feasible
        assert interval_clearance(g, r.witness_theta0) >= 0.1 - 1e-9


def test_lp_invariant_under_node_relabeling():
    g = generate_ensemble("directed-oriented", 7, neg_fraction=0.4, rng_seed=11)
    perm = [3, 1, 7, 2, 6, 4, 5]
    h = build_graph(7, [(perm[e.src - 1], perm[e.dst - 1], e.weight) for e in g.edges])
    assert lp_feasibility_oracle(g).lp_feasible == lp_feasibility_oracle(h).lp_feasible


def test_clearance_arithmetic():
    g = build_graph(3, [(1, 2, 1.0), (2, 3, -1.0)])
    th = np.array([0.0, 0.2, -0.1])
    # z = (0.2, -0.3); the negative edge sits 1.87.. outside (pi/2, 3pi/2)
    assert interval_clearance(g, th) == pytest.approx(-0.3 - HALF_PI)
    with pytest.raises(ValueError):
        interval_clearance(g, np.zeros(4))


CYCLE_PARITY_CASES = [
    ((1, 1, -1), True),
    ((-1, -1, -1), True),
    ((1, 1, 1, -1), True),
    ((1, 1, 1), False),
    ((1, 1, 1, 1, -1), False),
    ((1, 1, 1, 1, 1, -1), False),
    ((1,) * 7 + (-1,) * 3, False),
    ((-1, -1, -1, -1), False),
    ((-1,) * 6, True),
]


def test_cycle_parity_sign_counts():
    for signs, want in CYCLE_PARITY_CASES:
        assert check_cycle_parity(directed_cycle(signs)) is want, signs


def test_cycle_parity_rejects_non_cycles():
    with pytest.raises(GraphError):
        check_cycle_parity(build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)]))


def test_parity_general_tree_vacuous():
    r = check_parity_general(generate_ensemble("tree", 9, neg_fraction=0.5, rng_seed=3))
    assert r.parity_ok is True
    assert r.parity_note == "tree: vacuously true"
    assert r.parity_details == ()


def test_parity_general_matches_cycle_rule():
    for signs, want in CYCLE_PARITY_CASES:
        r = check_parity_general(directed_cycle(signs))
        assert r.parity_ok is want
        assert r.parity_note == "cycle: sign-count rule"


def test_parity_general_reports_failing_path():
    # positive edge (1,2) bridged by two all-positive 2-paths
    g = build_graph(4, [(1, 2, 1.0), (1, 3, 1.0), (3, 2, 1.0), (1, 4, 1.0), (4, 2, 1.0)])
    r = check_parity_general(g)
    assert r.parity_ok is False
    d = next(x for x in r.parity_details if x.edge == (1, 2))
    assert not d.ok
    assert d.n_paths == 2
    assert d.failing_counts == (2, 0)
    assert d.failing_path[0] == 1 and d.failing_path[-1] == 2


def test_parity_general_bridged_triangles_pass():
    g = build_graph(
        6,
        [(1, 2, 1.0), (2, 3, -1.0), (1, 3, 1.0), (3, 4, 1.0),
         (4, 5, 1.0), (5, 6, -1.0), (4, 6, 1.0)],
    )
    r = check_parity_general(g)
    assert r.parity_ok is True
    assert len(r.parity_details) == 7
    bridge = next(x for x in r.parity_details if x.edge == (3, 4))
    assert bridge.n_paths == 0 and bridge.ok


def test_parity_general_node_cap():
    edges = [(i, i + 1, 1.0) for i in range(1, 13)] + [(13, 1, 1.0), (1, 3, 1.0)]
    with pytest.raises(GraphError):
        check_parity_general(build_graph(13, edges))


def test_conservative_all_positive_3cycle():
    r = check_feasibility(cycle3())
    assert r.lp_feasible is True
    assert r.parity_ok is False


def test_check_feasibility_survives_parity_rejection():
    g = build_graph(2, [(1, 2, 1.0), (2, 1, -1.0)])
    r = check_feasibility(g)
    assert r.lp_feasible is False
    assert r.parity_ok is None
    assert "two distinct weights" in r.parity_note
    json.dumps(r.to_dict())


def test_sample_initial_phases():
    g = generate_ensemble("directed-oriented", 8, neg_fraction=0.0, rng_seed=6)
    a = sample_initial_phases(g, S=(2, 5), rng_seed=4)
    b = sample_initial_phases(g, S=(2, 5), rng_seed=4)
    np.testing.assert_array_equal(a, b)
    assert a[1] == 0.0 and a[4] == 0.0
    assert interval_clearance(g, a) >= 0.05 - 1e-9
    c = sample_initial_phases(g, S=(2, 5), rng_seed=5)
    assert not np.array_equal(a, c)


def test_sample_signed_tree_unpinned():
    g = generate_ensemble("tree", 8, neg_fraction=0.5, rng_seed=6)
    th = sample_initial_phases(g, rng_seed=1)
    assert interval_clearance(g, th) >= 0.05 - 1e-9


def test_sample_returns_none_when_infeasible():
    g = build_graph(2, [(1, 2, 1.0), (2, 1, -1.0)])
    assert sample_initial_phases(g) is None


def test_sample_all_pinned_is_zero():
    g = cycle3()
    th = sample_initial_phases(g, S=(1, 2, 3), rng_seed=0)
    np.testing.assert_allclose(th, 0.0, atol=1e-9)


def test_cycle_audit_small_lengths(tmp_path):
    log = tmp_path / "audit.jsonl"
    res = cycle_audit(3, 4, log_path=log)
    assert len(res.records) == 8 + 16
    got = sorted((r.length, r.signs) for r in res.discrepancies)
    assert got == [(3, "---"), (4, "+---"), (4, "-+--"), (4, "--+-"), (4, "---+")]
    assert sorted((r.length, r.signs) for r in res.conservative) == [(3, "+++"), (4, "++++")]
    lines = [json.loads(x) for x in log.read_text().splitlines()]
    assert len(lines) == len(res.discrepancies)
    for row in lines:
        assert set(row) == {"length", "signs", "e_pos", "e_neg", "parity_ok", "lp_feasible"}
        assert row["parity_ok"] and not row["lp_feasible"]
        assert row["e_neg"] - row["e_pos"] >= 2
        assert (row["e_neg"] - row["e_pos"]) % 4 in (2, 3)


def test_cycle_audit_validates_range():
    with pytest.raises(ValueError):
        cycle_audit(2, 5)
