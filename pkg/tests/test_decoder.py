from __future__ import annotations

import numpy as np
import pytest

from qecregimes.errors import BudgetExceeded, SyndromeError
from qecregimes.sim.decoder import (
    build_tables,
    class_resolved_weights,
    decode_shot,
    failure_weight,
    gap_sample,
    mwpm,
    parity_constrained_weight,
)
from qecregimes.sim.geometry import build_geometry, syndrome
from qecregimes.sim.oracles import CosetOracle


def _random_errors(g, p, count, seed):
    rng = np.random.default_rng(seed)
    return [rng.random(g.n_qubits) < p for _ in range(count)]


@pytest.fixture(scope="module", params=[("planar", 3), ("planar", 5), ("torus", 3), ("torus", 4)],
                ids=lambda x: f"{x[0]}{x[1]}")
def setup(request):
    kind, L = request.param
    g = build_geometry(kind, L)
    return g, build_tables(g), CosetOracle(g)


def test_mwpm_matches_coset_minimum(setup):
    g, tables, oracle = setup
    for flips in _random_errors(g, 0.15, 150, seed=g.L):
        w, _ = mwpm(g, syndrome(g, flips), tables)
        assert w == oracle.min_weight(flips)


def test_class_weights_match_oracle(setup):
    g, tables, oracle = setup
    for flips in _random_errors(g, 0.15, 100, seed=10 + g.L):
        assert class_resolved_weights(g, flips, tables) == oracle.weights(flips)


def test_class_min_is_matching(setup):
    g, tables, _ = setup
    for flips in _random_errors(g, 0.2, 50, seed=3):
        w, _ = mwpm(g, syndrome(g, flips), tables)
        weights = class_resolved_weights(g, flips, tables)
        pairs = weights if g.kind == "torus" else (weights,)
        for same, opp in pairs:
            assert min(same, opp) == w


def test_no_error_is_success():
    for kind in ("planar", "torus"):
        g = build_geometry(kind, 5)
        t = build_tables(g)
        flips = np.zeros(g.n_qubits, dtype=bool)
        assert decode_shot(g, flips, t) == "success"


def test_logical_error_fails():
    g = build_geometry("planar", 5)
    t = build_tables(g)
    assert decode_shot(g, g.logicals[0].copy(), t) == "failure"


def test_half_distance_tie():
    # On an even-distance planar code, half a logical ties with the other half.
    g = build_geometry("planar", 4)
    t = build_tables(g)
    flips = np.zeros(g.n_qubits, dtype=bool)
    flips[np.flatnonzero(g.logicals[0])[:2]] = True
    assert decode_shot(g, flips, t) == "tie"


def test_mwpm_rejects_odd_torus_syndrome():
    g = build_geometry("torus", 3)
    t = build_tables(g)
    with pytest.raises(SyndromeError):
        mwpm(g, [0, 1, 2], t)


def test_parity_weight_empty_syndrome():
    g = build_geometry("torus", 5)
    t = build_tables(g)
    de, do = t.cover[0]
    assert parity_constrained_weight([], de, do, 0, 5) == 0
    assert parity_constrained_weight([], de, do, 1, 5) == 5


def test_budget_exceeded():
    g = build_geometry("torus", 6)
    t = build_tables(g)
    rng = np.random.default_rng(0)
    de, do = t.cover[0]
    raised = False
    for _ in range(50):
        flips = rng.random(g.n_qubits) < 0.3
        d = syndrome(g, flips)
        for target in (0, 1):
            try:
                parity_constrained_weight(d, de, do, target, g.L, node_budget=1)
            except BudgetExceeded:
                raised = True
    assert raised


def test_failure_weight_rule():
    assert failure_weight((1, 2), "planar") == 0.0
    assert failure_weight((2, 2), "planar") == 0.5
    assert failure_weight((3, 2), "planar") == 1.0
    assert failure_weight(((1, 2), (2, 2)), "torus") == 0.5
    assert failure_weight(((2, 2), (2, 2)), "torus") == 0.75
    assert failure_weight(((1, 2), (3, 2)), "torus") == 1.0


def test_gap_sample_sign():
    g = build_geometry("planar", 5)
    t = build_tables(g)
    for flips in _random_errors(g, 0.12, 50, seed=4):
        s = gap_sample(g, flips, t)
        assert s.delta_e % 2 == 0
        assert s.delta_e == 2 * (s.w_opp - s.w_same)
        outcome = decode_shot(g, flips, t)
        assert (s.delta_e < 0) == (outcome == "failure")
        assert (s.delta_e == 0) == (outcome == "tie")


def test_gap_sample_planar_only():
    g = build_geometry("torus", 3)
    with pytest.raises(ValueError):
        gap_sample(g, np.zeros(g.n_qubits, dtype=bool), build_tables(g))
