"""Tests for the cloud-side synthesis, filtering, and cost accounting."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dplqg.lqg import (
    EstimatorState,
    SynthesisResult,
    control,
    filter_step,
    incremental_cost,
    moving_average_cost,
    synthesize,
)
from dplqg.network import AgentModel, assemble_network
from dplqg.privacy import PrivacySpec
from dplqg.riccati import solve_dare_control, solve_dare_filter
from dplqg.rng import GaussianStream


def _two_state_network(epsilon=1.0, delta=0.1, b=1.0):
    agent = AgentModel(
        A=np.array([[1.0, 0.1], [0.0, 1.0]]),
        B=np.array([[0.0], [1.0]]),
        C=np.eye(2),
        W=np.array([[1.0, 0.5], [0.5, 1.0]]),
        privacy=PrivacySpec(epsilon=epsilon, delta=delta, adjacency_bound=b),
        x0_mean=np.zeros(2),
    )
    model = assemble_network([agent], Q=np.eye(2), R=np.array([[1.0]]))
    return model, agent


def test_synthesize_composes_the_two_riccati_solves():
    model, _ = _two_state_network()
    syn = synthesize(model)
    ctrl = solve_dare_control(model.A, model.B, model.Q, model.R)
    filt = solve_dare_filter(model.A, model.C, model.W, model.V)
    assert np.array_equal(syn.K, ctrl.K)
    assert np.array_equal(syn.L, ctrl.L)
    assert np.array_equal(syn.Sigma, filt.Sigma)
    assert np.array_equal(syn.SigmaBar, filt.SigmaBar)
    assert np.array_equal(syn.kalman_gain, filt.kalman_gain)
    # accessor dataclasses round-trip
    assert np.array_equal(syn.control.L, syn.L)
    assert np.array_equal(syn.filter.Sigma, syn.Sigma)


def test_feedback_gain_ignores_privacy_level():
    # Separation: L depends on (A, B, Q, R) only. Rebuilding the network
    # with a very different privacy level must not move L by a single bit,
    # while the filter quantities must all change.
    model_tight, _ = _two_state_network(epsilon=0.1, delta=0.01)
    model_loose, _ = _two_state_network(epsilon=3.0, delta=0.5)
    syn_tight = synthesize(model_tight)
    syn_loose = synthesize(model_loose)
    assert np.array_equal(syn_tight.L, syn_loose.L)
    assert np.array_equal(syn_tight.K, syn_loose.K)
    assert not np.array_equal(syn_tight.Sigma, syn_loose.Sigma)
    assert not np.array_equal(syn_tight.kalman_gain, syn_loose.kalman_gain)


def test_control_is_matrix_vector_product():
    L = np.array([[-0.5, -0.7]])
    est = EstimatorState(x_hat=np.array([2.0, -1.0]), k=4)
    u = control(est, L)
    assert u.shape == (1,)
    assert u[0] == -0.5 * 2.0 + -0.7 * -1.0


def test_filter_step_scalar_hand_computation():
    # Scalar system, all quantities chosen so the update is checkable by
    # hand: f = closed loop, g = gain.
    f = 0.8
    g = 0.25
    syn = SynthesisResult(
        K=np.eye(1), L=np.array([[-0.2]]), Sigma=np.eye(1),
        SigmaBar=np.eye(1), kalman_gain=np.array([[g]]),
    )
    est = EstimatorState(x_hat=np.array([2.0]), k=0)
    y_next = np.array([1.0])
    out = filter_step(est, y_next, syn.filter, np.array([[f]]), np.eye(1))
    predicted = f * 2.0
    expected = predicted + g * (1.0 - predicted)
    assert out.k == 1
    assert out.x_hat[0] == expected


def test_filter_step_advances_index_and_shape():
    model, _ = _two_state_network()
    syn = synthesize(model)
    closed = model.A + model.B @ syn.L
    est = EstimatorState(x_hat=np.zeros(2), k=7)
    out = filter_step(est, np.array([0.3, -0.2]), syn.filter, closed, model.C)
    assert out.k == 8
    assert out.x_hat.shape == (2,)


def test_stationary_filter_error_matches_filtered_covariance():
    # Scalar plant in closed loop: the empirical mean-square estimation
    # error of the stationary filter should approach SigmaBar. Moderate
    # sample size here; the long version lives in the acceptance suite.
    a, w_var = 0.9, 0.4
    agent = AgentModel(
        A=np.array([[a]]), B=np.array([[1.0]]), C=np.eye(1),
        W=np.array([[w_var]]),
        privacy=PrivacySpec(epsilon=1.0, delta=0.1, adjacency_bound=1.0),
        x0_mean=np.zeros(1),
    )
    model = assemble_network([agent], Q=np.eye(1), R=np.eye(1))
    syn = synthesize(model)
    sigma = model.sigmas[0]
    g = syn.kalman_gain[0, 0]
    L = syn.L[0, 0]

    stream = GaussianStream(404)
    steps = 30_000
    x = 0.0
    x_hat = 0.0
    sq_err = []
    for k in range(steps):
        y = x + sigma * stream.standard_normal(1)[0]
        if k > 0:
            pred = a * x_hat + 1.0 * u_prev
            x_hat = pred + g * (y - pred)
        sq_err.append((x - x_hat) ** 2)
        u_prev = L * x_hat
        x = a * x + u_prev + np.sqrt(w_var) * stream.standard_normal(1)[0]
    empirical = float(np.mean(sq_err[200:]))
    assert_allclose(empirical, syn.SigmaBar[0, 0], rtol=0.1)


def test_incremental_cost_quadratic_form():
    Q = np.array([[2.0, 0.5], [0.5, 1.0]])
    R = np.array([[3.0]])
    x = np.array([1.0, -2.0])
    u = np.array([0.5])
    expected = x @ Q @ x + u @ R @ u
    assert incremental_cost(x, u, Q, R) == expected
    assert incremental_cost(np.zeros(2), np.zeros(1), Q, R) == 0.0


def test_incremental_cost_dimension_checks():
    with pytest.raises(ValueError):
        incremental_cost(np.zeros(2), np.zeros(1), np.eye(3), np.eye(1))
    with pytest.raises(ValueError):
        incremental_cost(np.zeros(2), np.zeros(1), np.eye(2), np.eye(2))


def test_moving_average_cost():
    costs = [4.0, 2.0, 6.0, 0.0]
    assert moving_average_cost(costs, 1) == 4.0
    assert moving_average_cost(costs, 2) == 3.0
    assert moving_average_cost(costs, 4) == 3.0
    with pytest.raises(ValueError):
        moving_average_cost(costs, 0)
    with pytest.raises(ValueError):
        moving_average_cost(costs, 5)
    with pytest.raises(ValueError):
        moving_average_cost(np.zeros((2, 2)), 1)
