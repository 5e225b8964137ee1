"""Proximal-gradient reference solver and first-order optimality diagnostics.

Deliberately minimal and independent of the message-passing modules: the
soft threshold is restated inline (max form rather than branch form) so the
differential tests compare genuinely separate routes to the same optimum.
"""

from __future__ import annotations

import numpy as np

from .errors import OracleError


def lasso_objective(h, inst) -> float:
    """kappa*||h||_1 + 0.5*||y - a h||_2^2."""
    h = np.asarray(h, dtype=float)
    r = inst.y - inst.a @ h
    return float(inst.kappa * np.sum(np.abs(h)) + 0.5 * float(r @ r))


def stationarity_residual(h, inst) -> float:
    """Worst violation of the subgradient condition a^T (y - a h) in kappa * d||h||_1.

    On the support: |g_k - kappa*sign(h_k)|; off the support:
    max(|g_k| - kappa, 0); returns the max over all coordinates (0 at an
    exact minimizer).
    """
    h = np.asarray(h, dtype=float)
    g = inst.a.T @ (inst.y - inst.a @ h)
    on = h != 0.0
    worst = 0.0
    if np.any(on):
        worst = float(np.max(np.abs(g[on] - inst.kappa * np.sign(h[on]))))
    if np.any(~on):
        worst = max(worst, float(np.max(np.maximum(np.abs(g[~on]) - inst.kappa, 0.0))))
    return worst


def solve_lasso_ista(inst, tol: float = 1e-8, max_iter: int = 500_000) -> np.ndarray:
    """Brute-force proximal gradient run until stationarity_residual <= tol.

    Iterates h <- soft(h + s * a^T (y - a h), s * kappa) from zero with the
    safe step s = 1/||a||_2^2.  Intended as a test oracle, not a fast path.

    Raises
    ------
    OracleError
        If tol is not reached within max_iter iterations.
    """
    a, y, kappa = inst.a, inst.y, inst.kappa
    step = 1.0 / float(np.linalg.norm(a, 2)) ** 2
    h = np.zeros(inst.n)
    for _ in range(max_iter):
        if stationarity_residual(h, inst) <= tol:
            return h
        u = h + step * (a.T @ (y - a @ h))
        h = np.sign(u) * np.maximum(np.abs(u) - step * kappa, 0.0)
    raise OracleError(
        f"proximal-gradient reference missed {tol} stationarity within {max_iter} iterations"
    )
