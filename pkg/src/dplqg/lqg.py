"""Cloud-side estimation and control on privatized measurements.

The aggregator never sees true states. It runs a stationary Kalman filter
on the noisy outputs ybar(k) = C x(k) + v(k) (v is the calibrated privacy
noise) and applies the certainty-equivalent feedback u(k) = L xhat(k). By
separation, L comes from the regulator Riccati equation alone and the
filter gain from the filter Riccati equation alone, so changing privacy
levels never changes L.

The estimate is initialized to the public mean xhat(0) = E[x(0)] and the
filter consumes measurements from step 1 on:

    xhat(k+1) = (A + B L) xhat(k)
                + SigmaBar C^T V^{-1} (ybar(k+1) - C (A + B L) xhat(k))

where SigmaBar C^T V^{-1} is FilterSynthesis.kalman_gain.
"""

from dataclasses import dataclass

import numpy as np

from .riccati import (
    ControlSynthesis,
    FilterSynthesis,
    solve_dare_control,
    solve_dare_filter,
)


@dataclass(frozen=True)
class EstimatorState:
    """Estimator value at one step: the estimate and its time index."""

    x_hat: np.ndarray
    k: int


@dataclass(frozen=True)
class SynthesisResult:
    """Everything the cloud precomputes before the first step."""

    K: np.ndarray
    L: np.ndarray
    Sigma: np.ndarray
    SigmaBar: np.ndarray
    kalman_gain: np.ndarray

    @property
    def control(self):
        return ControlSynthesis(K=self.K, L=self.L)

    @property
    def filter(self):
        return FilterSynthesis(
            Sigma=self.Sigma, SigmaBar=self.SigmaBar, kalman_gain=self.kalman_gain
        )


def synthesize(model):
    """Solve both Riccati equations for a NetworkModel.

    The regulator solve sees only (A, B, Q, R) and the filter solve only
    (A, C, W, V); the privacy level therefore affects the estimator but not
    the feedback gain.
    """
    control = solve_dare_control(model.A, model.B, model.Q, model.R)
    filt = solve_dare_filter(model.A, model.C, model.W, model.V)
    return SynthesisResult(
        K=control.K,
        L=control.L,
        Sigma=filt.Sigma,
        SigmaBar=filt.SigmaBar,
        kalman_gain=filt.kalman_gain,
    )


def control(est, L):
    """Certainty-equivalent input u = L xhat for the current estimate."""
    L = np.asarray(L, dtype=float)
    return L @ est.x_hat


def filter_step(est, y_bar_next, synthesis, closed_loop, C):
    """Advance the stationary filter by one measurement.

    Parameters
    ----------
    est : EstimatorState
        Estimate at step k (already incorporating ybar(k)).
    y_bar_next : array_like
        Privatized measurement ybar(k+1).
    synthesis : FilterSynthesis
        Supplies the stationary gain SigmaBar C^T V^{-1}.
    closed_loop : array_like
        The matrix A + B L driving the estimate prediction.
    C : array_like
        Output matrix.

    Returns
    -------
    EstimatorState
        Estimate at step k+1.
    """
    closed_loop = np.asarray(closed_loop, dtype=float)
    C = np.asarray(C, dtype=float)
    y_bar_next = np.asarray(y_bar_next, dtype=float)
    predicted = closed_loop @ est.x_hat
    innovation = y_bar_next - C @ predicted
    return EstimatorState(
        x_hat=predicted + synthesis.kalman_gain @ innovation, k=est.k + 1
    )


def incremental_cost(x, u, Q, R):
    """Stage cost x^T Q x + u^T R u.

    Q and R are assumed valid cost matrices (validated once at network
    assembly, not per step). Dimension mismatches raise ValueError.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    if Q.shape != (x.size, x.size):
        raise ValueError(f"Q has shape {Q.shape}, state has size {x.size}")
    if R.shape != (u.size, u.size):
        raise ValueError(f"R has shape {R.shape}, input has size {u.size}")
    return float(x @ Q @ x + u @ R @ u)


def moving_average_cost(stage_costs, k):
    """Arithmetic mean of the first k stage costs.

    k must be at least 1 and no larger than the number of recorded costs.
    """
    costs = np.asarray(stage_costs, dtype=float)
    if costs.ndim != 1:
        raise ValueError("stage costs must be a flat sequence")
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > costs.size:
        raise ValueError(f"only {costs.size} stage costs recorded, asked for {k}")
    return float(costs[:k].mean())
