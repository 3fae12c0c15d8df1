"""What the eavesdropper cannot learn: entropy bounds on the estimate error.

The wire leaks enough to reproduce the cloud's estimate, so the residual
protection is the steady-state error covariance Sigma of that estimate: the
differential entropy of the estimation error grows with log det Sigma.
This module provides closed-form guarantees on that quantity for diagonal
output maps:

* a floor: lambda_max(Sigma) >= variance_floor(A, W, C, V), always;
* a cap: when a spectral condition on A holds, Sigma is dominated by an
  explicit matrix and log det Sigma is strictly below an explicit number
  that grows with the privacy noise. More privacy noise (larger sigma)
  provably forces a noisier eavesdropper estimate.

All bounds take the aggregate matrices (A, W, C, V) with C diagonal and V
diagonal positive (V carries the per-coordinate privacy noise variances).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InapplicableBoundError
from .riccati import solve_dare_filter


def _validate_bound_inputs(A, W, C, V):
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    C = np.asarray(C, dtype=float)
    V = np.asarray(V, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"A must be square, got {A.shape}")
    for name, M in (("W", W), ("C", C), ("V", V)):
        if M.shape != (n, n):
            raise ValueError(f"{name} must be {n} x {n}, got {M.shape}")
    if np.count_nonzero(C - np.diag(np.diag(C))):
        raise ValueError("C must be diagonal for the closed-form bounds")
    if np.count_nonzero(V - np.diag(np.diag(V))):
        raise ValueError("V must be diagonal")
    if not np.all(np.diag(V) > 0.0):
        raise ValueError("V must have positive diagonal")
    scale = max(1.0, float(np.abs(W).max()))
    if not np.allclose(W, W.T, rtol=0.0, atol=1e-10 * scale):
        raise ValueError("W must be symmetric")
    if not np.all(np.diag(W) > 0.0):
        raise ValueError("W must have positive diagonal")
    return A, 0.5 * (W + W.T), C, V


def posterior_variance_diag(W, C, V):
    """Per-coordinate posterior variances (1/W_ii + C_ii^2/V_ii)^{-1}.

    Entry i is the variance left after one scalar measurement with gain
    C_ii and noise variance V_ii updates a prior of variance W_ii:

        V_ii W_ii / (V_ii + C_ii^2 W_ii).

    Returns the diagonal as a vector. Entries are positive, increase with
    V_ii, and approach W_ii as the privacy noise grows.
    """
    W = np.asarray(W, dtype=float)
    C = np.asarray(C, dtype=float)
    V = np.asarray(V, dtype=float)
    n = W.shape[0]
    _, W, C, V = _validate_bound_inputs(np.eye(n), W, C, V)
    w = np.diag(W)
    c = np.diag(C)
    v = np.diag(V)
    return v * w / (v + c * c * w)


def variance_floor(A, W, C, V):
    """Unconditional floor on lambda_max, the worst error direction.

    floor = s_min(A)^2 * max_i posterior_variance_i + lambda_min(W).
    The steady prediction covariance satisfies lambda_max(Sigma) >= floor
    for every model, hypothesis-free.
    """
    A, W, C, V = _validate_bound_inputs(A, W, C, V)
    s = np.linalg.svd(A, compute_uv=False)
    gamma_max = float(posterior_variance_diag(W, C, V).max())
    return float(s[-1] ** 2 * gamma_max + np.linalg.eigvalsh(W)[0])


def _privacy_leverage(C, V):
    """min_i C_ii^2 / V_ii, i.e. lambda_min(C^T V^{-1} C) for diagonal C, V."""
    c = np.diag(np.asarray(C, dtype=float))
    v = np.diag(np.asarray(V, dtype=float))
    return float((c * c / v).min())


def covariance_bound_condition(A, W, C, V):
    """Spectral condition under which the closed-form covariance cap holds.

    Requires s_max(A)^2 < 1 + variance_floor * min_i(C_ii^2 / V_ii).
    Returns (holds, margin) with margin = right side minus left side;
    a positive margin means the cap applies.
    """
    A, W, C, V = _validate_bound_inputs(A, W, C, V)
    s = np.linalg.svd(A, compute_uv=False)
    floor = variance_floor(A, W, C, V)
    margin = 1.0 + floor * _privacy_leverage(C, V) - float(s[0] ** 2)
    return margin > 0.0, float(margin)


def covariance_upper_bound(A, W, C, V):
    """Matrix cap: Sigma is dominated by coef * A A^T + W in the PSD order.

    coef = lambda_max(W) / (1 + variance_floor * min_i(C_ii^2/V_ii)
    - s_max(A)^2). Raises InapplicableBoundError when the spectral condition
    fails; no bound is emitted in that case.
    """
    A, W, C, V = _validate_bound_inputs(A, W, C, V)
    holds, margin = covariance_bound_condition(A, W, C, V)
    if not holds:
        raise InapplicableBoundError(
            f"covariance cap condition fails (margin {margin:.6g})",
            margin=margin,
        )
    coef = float(np.linalg.eigvalsh(W)[-1]) / margin
    return coef * (A @ A.T) + W


def logdet(M):
    """log det of a symmetric positive definite matrix via Cholesky.

    Twice the sum of the logs of the Cholesky diagonal; raises ValueError
    when the matrix is not positive definite.
    """
    M = np.asarray(M, dtype=float)
    try:
        chol = np.linalg.cholesky(0.5 * (M + M.T))
    except np.linalg.LinAlgError:
        raise ValueError("matrix is not positive definite") from None
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def homogeneous_entropy_estimate(A, process_var, sigma):
    """Back-of-envelope entropy cap for identical agents (W = w I, C = I).

    estimate = (s_min(A)^2 / (sigma^2 + w) + 1 / sigma^2)^{-1}
               * sum_i s_i(A)^2  +  n * w.

    Keeps only the terms of the full cap that matter when sigma^2 >> w and
    s_min(A)^2 << 1; doubling sigma then roughly quadruples the first term.
    """
    A = np.asarray(A, dtype=float)
    process_var = float(process_var)
    sigma = float(sigma)
    if not process_var > 0.0:
        raise ValueError("process_var must be positive")
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    s = np.linalg.svd(A, compute_uv=False)
    lead = 1.0 / (s[-1] ** 2 / (sigma * sigma + process_var) + 1.0 / (sigma * sigma))
    return float(lead * np.sum(s * s) + A.shape[0] * process_var)


@dataclass(frozen=True)
class EntropyBoundReport:
    """Everything the entropy audit produces for one model.

    posterior_floor_diag and variance_floor always exist;
    condition_holds and condition_margin state whether the cap applies; the
    remaining fields are the cap itself: logdet_covariance is the exact
    solved value, entropy_bound the closed-form strict upper bound,
    privacy_term the noise-dependent denominator term, and
    homogeneous_estimate the simplified cap when the model has identical
    isotropic agents (None otherwise).
    """

    posterior_floor_diag: tuple
    variance_floor: float
    condition_holds: bool
    condition_margin: float
    logdet_covariance: Optional[float] = None
    entropy_bound: Optional[float] = None
    privacy_term: Optional[float] = None
    homogeneous_estimate: Optional[float] = None

    def kv_lines(self):
        """Flat key = value lines for the text report."""

        def fmt(v):
            if v is None:
                return "none"
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, tuple):
                return ", ".join(repr(float(x)) for x in v)
            return repr(float(v))

        keys = (
            "condition_holds", "condition_margin", "variance_floor",
            "posterior_floor_diag", "logdet_covariance", "entropy_bound",
            "privacy_term", "homogeneous_estimate",
        )
        return [f"{key} = {fmt(getattr(self, key))}" for key in keys]


def _is_homogeneous(W, C, V):
    w = np.diag(W)
    c = np.diag(C)
    v = np.diag(V)
    isotropic_w = np.count_nonzero(W - w[0] * np.eye(W.shape[0])) == 0
    return (
        isotropic_w
        and np.all(c == 1.0)
        and np.all(v == v[0])
    )


def entropy_bound_report(A, W, C, V):
    """Solve for Sigma and certify log det Sigma against the closed-form cap.

    entropy_bound = lambda_max(W) / (1 + privacy_term - s_max(A)^2)
                    * sum_i s_i(A)^2 + trace(W)

    with privacy_term = s_min(A)^2 * max_i gamma_i * min_i(C_ii^2/V_ii)
    + lambda_min(W) * min_i(C_ii^2/V_ii), where gamma are the posterior
    variances. The bound is strict whenever the spectral condition holds;
    InapplicableBoundError (carrying the margin) is raised when it does not.
    """
    A, W, C, V = _validate_bound_inputs(A, W, C, V)
    gamma = posterior_variance_diag(W, C, V)
    floor = variance_floor(A, W, C, V)
    holds, margin = covariance_bound_condition(A, W, C, V)
    if not holds:
        raise InapplicableBoundError(
            f"covariance cap condition fails (margin {margin:.6g})",
            margin=margin,
        )
    s = np.linalg.svd(A, compute_uv=False)
    leverage = _privacy_leverage(C, V)
    privacy_term = float(
        s[-1] ** 2 * gamma.max() * leverage + np.linalg.eigvalsh(W)[0] * leverage
    )
    coef = float(np.linalg.eigvalsh(W)[-1]) / (1.0 + privacy_term - s[0] ** 2)
    bound = float(coef * np.sum(s * s) + np.trace(W))
    filt = solve_dare_filter(A, C, W, V)
    ld = logdet(filt.Sigma)
    homogeneous = None
    if _is_homogeneous(W, C, V):
        homogeneous = homogeneous_entropy_estimate(
            A, float(np.diag(W)[0]), math.sqrt(float(np.diag(V)[0]))
        )
    return EntropyBoundReport(
        posterior_floor_diag=tuple(float(g) for g in gamma),
        variance_floor=floor,
        condition_holds=True,
        condition_margin=margin,
        logdet_covariance=ld,
        entropy_bound=bound,
        privacy_term=privacy_term,
        homogeneous_estimate=homogeneous,
    )
