"""Discrete-time algebraic Riccati solvers for the regulator and the filter.

Both equations are solved by fixed-point iteration of the Riccati map with
symmetrization after every step, which is the dynamic-programming value
recursion and converges to the unique stabilizing solution under the
standing assumptions (positive definite weights, controllable input pair,
observable output pair). The iteration is deliberately simple and fully
deterministic; tests cross-check it against closed-form scalar solutions
and an independent dense solver.

Regulator equation (cost-to-go K, feedback u = L x):

    K = A^T K A - A^T K B (R + B^T K B)^{-1} B^T K A + Q
    L = -(R + B^T K B)^{-1} B^T K A

Filter equation (one-step prediction covariance Sigma, filtered covariance
SigmaBar, gain SigmaBar C^T V^{-1}):

    Sigma    = A Sigma A^T - A Sigma C^T (C Sigma C^T + V)^{-1} C Sigma A^T + W
    SigmaBar = Sigma - Sigma C^T (C Sigma C^T + V)^{-1} C Sigma

The two are duals: the filter solution for (A, C, W, V) equals the
regulator solution for (A^T, C^T, W, V).
"""

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError, ConvergenceError

MAX_ITERATIONS = 100_000
CONVERGENCE_RTOL = 1e-12
RESIDUAL_RTOL = 1e-9
RANK_TOL = 1e-8


@dataclass(frozen=True)
class ControlSynthesis:
    """Stationary regulator: Riccati solution K and feedback gain L."""

    K: np.ndarray
    L: np.ndarray


@dataclass(frozen=True)
class FilterSynthesis:
    """Stationary estimator covariances and gain.

    Sigma is the one-step prediction error covariance, SigmaBar the
    filtered (post-measurement) error covariance, kalman_gain the matrix
    SigmaBar C^T V^{-1} applied to the innovation.
    """

    Sigma: np.ndarray
    SigmaBar: np.ndarray
    kalman_gain: np.ndarray


def _as_square(M, name):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def _check_symmetric_pd(M, name):
    M = _as_square(M, name)
    scale = max(1.0, float(np.abs(M).max()))
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-10 * scale):
        raise AssumptionError(f"{name} must be symmetric")
    M = 0.5 * (M + M.T)
    eigs = np.linalg.eigvalsh(M)
    if eigs.min() <= 0.0:
        raise AssumptionError(
            f"{name} must be positive definite (min eigenvalue {eigs.min():.3e})"
        )
    return M


def _staircase_rank(blocks):
    """Numerical rank of a stacked matrix via singular values."""
    stacked = np.concatenate(blocks, axis=0)
    s = np.linalg.svd(stacked, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > RANK_TOL * s[0]))


def is_controllable(A, B):
    """Rank test on [B, AB, ..., A^{n-1} B] with relative tolerance 1e-8."""
    A = _as_square(A, "A")
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != A.shape[0]:
        raise ValueError(f"B must be {A.shape[0]} x m, got shape {B.shape}")
    n = A.shape[0]
    blocks = []
    term = B
    for _ in range(n):
        blocks.append(term.T)
        term = A @ term
    return _staircase_rank(blocks) == n


def is_observable(A, C):
    """Rank test on [C; CA; ...; C A^{n-1}] with relative tolerance 1e-8."""
    A = _as_square(A, "A")
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[1] != A.shape[0]:
        raise ValueError(f"C must be q x {A.shape[0]}, got shape {C.shape}")
    n = A.shape[0]
    blocks = []
    term = C
    for _ in range(n):
        blocks.append(term)
        term = term @ A
    return _staircase_rank(blocks) == n


def _iterate_to_fixed_point(riccati_map, X0, residual):
    """Run X <- map(X) with symmetrization until successive iterates settle.

    Convergence is declared when the relative Frobenius change drops below
    CONVERGENCE_RTOL; the converged iterate must then pass the residual
    check, otherwise ConvergenceError reports how far the solve got.
    """
    X = 0.5 * (X0 + X0.T)
    for iteration in range(1, MAX_ITERATIONS + 1):
        X_next = riccati_map(X)
        X_next = 0.5 * (X_next + X_next.T)
        change = np.linalg.norm(X_next - X) / max(1.0, np.linalg.norm(X_next))
        X = X_next
        if change < CONVERGENCE_RTOL:
            res = residual(X)
            if res <= RESIDUAL_RTOL:
                return X, iteration
            raise ConvergenceError(
                f"iteration stalled after {iteration} steps with residual {res:.3e}",
                iterations=iteration,
                residual=res,
            )
    res = residual(X)
    raise ConvergenceError(
        f"no fixed point within {MAX_ITERATIONS} iterations "
        f"(last residual {res:.3e})",
        iterations=MAX_ITERATIONS,
        residual=res,
    )


def solve_dare_control(A, B, Q, R):
    """Solve the regulator Riccati equation and return (K, L).

    Requires Q and R symmetric positive definite and (A, B) controllable;
    violations raise AssumptionError naming the failed condition. The
    returned closed loop A + B L is verified Schur stable.
    """
    A = _as_square(A, "A")
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != A.shape[0]:
        raise ValueError(f"B must be {A.shape[0]} x m, got shape {B.shape}")
    Q = _check_symmetric_pd(Q, "Q")
    R = _check_symmetric_pd(R, "R")
    if Q.shape[0] != A.shape[0]:
        raise ValueError("Q must match the state dimension")
    if R.shape[0] != B.shape[1]:
        raise ValueError("R must match the input dimension")
    if not is_controllable(A, B):
        raise AssumptionError("(A, B) is not controllable")

    def step(K):
        G = B.T @ K @ A
        return A.T @ K @ A - G.T @ np.linalg.solve(R + B.T @ K @ B, G) + Q

    def residual(K):
        return dare_residual_control(K, A, B, Q, R)

    K, _ = _iterate_to_fixed_point(step, Q, residual)
    L = -np.linalg.solve(R + B.T @ K @ B, B.T @ K @ A)
    closed = A + B @ L
    radius = float(np.abs(np.linalg.eigvals(closed)).max())
    if radius >= 1.0:
        raise ConvergenceError(
            f"closed loop not Schur stable (spectral radius {radius:.6f})",
            residual=residual(K),
        )
    return ControlSynthesis(K=K, L=L)


def solve_dare_filter(A, C, W, V):
    """Solve the filter Riccati equation and return (Sigma, SigmaBar, gain).

    Requires W and V symmetric positive definite and (A, C) observable;
    violations raise AssumptionError naming the failed condition.
    """
    A = _as_square(A, "A")
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[1] != A.shape[0]:
        raise ValueError(f"C must be q x {A.shape[0]}, got shape {C.shape}")
    W = _check_symmetric_pd(W, "W")
    V = _check_symmetric_pd(V, "V")
    if W.shape[0] != A.shape[0]:
        raise ValueError("W must match the state dimension")
    if V.shape[0] != C.shape[0]:
        raise ValueError("V must match the output dimension")
    if not is_observable(A, C):
        raise AssumptionError("(A, C) is not observable")

    def step(S):
        G = C @ S @ A.T
        return A @ S @ A.T - G.T @ np.linalg.solve(C @ S @ C.T + V, G) + W

    def residual(S):
        return dare_residual_filter(S, A, C, W, V)

    Sigma, _ = _iterate_to_fixed_point(step, W, residual)
    innovation_cov = C @ Sigma @ C.T + V
    SigmaBar = Sigma - Sigma @ C.T @ np.linalg.solve(innovation_cov, C @ Sigma)
    SigmaBar = 0.5 * (SigmaBar + SigmaBar.T)
    kalman_gain = SigmaBar @ C.T @ np.linalg.inv(V)
    return FilterSynthesis(Sigma=Sigma, SigmaBar=SigmaBar, kalman_gain=kalman_gain)


def dare_residual_control(K, A, B, Q, R):
    """Relative fixed-point defect of a regulator Riccati candidate.

    ||map(K) - K||_F normalized by max(||K||_F, ||Q||_F), so the zero
    candidate scores 1 against any Q and an exact solution scores ~0.
    """
    K = np.asarray(K, dtype=float)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    G = B.T @ K @ A
    rhs = A.T @ K @ A - G.T @ np.linalg.solve(R + B.T @ K @ B, G) + Q
    denom = max(np.linalg.norm(K), np.linalg.norm(Q))
    return float(np.linalg.norm(rhs - K) / denom)


def dare_residual_filter(Sigma, A, C, W, V):
    """Relative fixed-point defect of a filter Riccati candidate.

    Same normalization as dare_residual_control, with W in place of Q.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    W = np.asarray(W, dtype=float)
    V = np.asarray(V, dtype=float)
    G = C @ Sigma @ A.T
    rhs = A @ Sigma @ A.T - G.T @ np.linalg.solve(C @ Sigma @ C.T + V, G) + W
    denom = max(np.linalg.norm(Sigma), np.linalg.norm(W))
    return float(np.linalg.norm(rhs - Sigma) / denom)
