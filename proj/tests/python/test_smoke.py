"""End-to-end smoke tests for the _pymsmwc extension module."""

import json
import math

import numpy as np
import pytest

import _pymsmwc as m


def test_solve_step_matches_closed_form():
    w = m.solve_step(
        anchor=np.array([0.5, 0.5]),
        cost=np.array([1.0, -1.0]),
        rates=np.array([0.1, 0.1]),
    )
    # equal rates reduce to anchor * exp(-rate * cost), renormalized
    assert w[0] == pytest.approx(0.450166002688, abs=1e-10)
    assert w[1] == pytest.approx(0.549833997312, abs=1e-10)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_solve_step_respects_floors():
    w = m.solve_step(
        anchor=np.array([0.6, 0.4]),
        cost=np.array([6.0, -1.0]),
        rates=np.array([0.5, 0.5]),
        lower_bounds=np.array([0.1, 0.1]),
    )
    assert w[0] == pytest.approx(0.1, abs=1e-10)
    assert w[1] == pytest.approx(0.9, abs=1e-10)


def test_scalar_divergence_values():
    assert m.f_kl(0.3, 0.5) == pytest.approx(0.046752312870, abs=1e-10)
    assert m.f_kl(0.5, 0.1) == pytest.approx(0.404718956217, abs=1e-10)
    assert m.f_kl(0.0, 0.7) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        m.f_kl(-0.1, 0.5)


def test_vector_divergence():
    a = np.array([0.4, 0.6])
    rates = np.array([0.1, 0.1])
    assert m.bregman(a, a, rates) == pytest.approx(0.0, abs=1e-14)
    assert m.bregman(np.array([0.5, 0.5]), a, rates) > 0.0


def test_simplex_learner_round_loop():
    learner = m.SimplexLearner(dim=2, horizon=40, fixed_rate=0.25)
    assert learner.dim == 2
    zero = np.zeros(2)
    w = learner.begin_round(zero)
    assert w[0] == pytest.approx(0.5, abs=1e-9)
    learner.end_round(np.array([1.0, -1.0]), zero)
    assert learner.rates[0] == pytest.approx(0.25)
    assert learner.anchor.sum() == pytest.approx(1.0, abs=1e-9)

    # keep pushing the same split; the floor at 1/(d*T) must hold
    for _ in range(39):
        w = learner.begin_round(zero)
        assert w.sum() == pytest.approx(1.0, abs=1e-9)
        assert w.min() >= 1.0 / 80.0 - 1e-12
        learner.end_round(np.array([1.0, -1.0]), zero)
    assert learner.anchor[0] == pytest.approx(1.0 / 80.0, abs=1e-9)


def test_adaptive_learner_starts_at_cap():
    learner = m.SimplexLearner(dim=3, horizon=100)
    learner.begin_round(np.zeros(3))
    assert learner.rates[0] == pytest.approx(1.0 / 64.0)
    learner.end_round(np.ones(3), np.zeros(3))


def test_run_experiment_summary():
    config = {
        "environment": {"kind": "gap_stochastic", "d": 2, "T": 20, "seed": 5, "gap": 0.3},
        "learner": {"algo": "adaptive"},
        "predictor": "last",
    }
    summary = json.loads(m.run_experiment(json.dumps(config)))
    assert summary["rounds"] == 20
    assert summary["seed"] == 5
    assert "learner_cumulative" in summary["final"]
    assert set(summary["final"]["regret"]) == {"e1", "e2"}
    assert all(rep["holds"] for rep in summary["bound_reports"])

    # identical configs give identical summaries
    assert m.run_experiment(json.dumps(config)) == m.run_experiment(json.dumps(config))

    with pytest.raises(Exception):
        m.run_experiment(json.dumps({"learner": {"algo": "adaptive"}}))


def test_self_check_entropy_module():
    results = m.self_check("entropy_omd")
    assert len(results) == 3
    assert all(ok for _, ok in results)
