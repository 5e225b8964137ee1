"""Per-measurement message-passing solver for l1-penalized least squares,
tracked entirely in natural parameters.

The state holds one diagonal-Gaussian target (the estimate), one auxiliary
diagonal Gaussian per measurement row, and the latest per-row beliefs the
target was assembled from.  Inverse precisions use 0.0 to encode an
infinitely precise spike at zero, so no floating infinities move through
the arithmetic.

One step: (1) a belief (xi, xi_diag) per row from its auxiliary state,
(2) ascending-row sequential sums lam_hat/prec_hat of the beliefs (order
pinned for reproducibility), (3) per-coordinate soft threshold to the new
target pair, (4) auxiliary updates in the inverse-precision domain with a
clamp guard for nonpositive precisions, (5) optional damping of every
(lam, inv_prec) pair, new = (1-alpha)*old + alpha*new.  The pre-threshold
sums are stored on the state so the restatement identity over the finite
coordinates (e_condition_residual) can be checked after every step; at a
fixed point the per-row auxiliary means agree with the target mean
(check_m_condition).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, NumericalError, OracleError
from .model import ProblemInstance, nmse_or_none
from .shrinkage import upsilon_pair_arrays
from .trace import SolverTrace, TraceRecord


@dataclass
class DiagGaussianState:
    """Natural-parameter diagonal Gaussian.

    ``lam`` is the mean parameter, ``inv_prec`` the per-coordinate inverse
    precision; an entry of 0.0 encodes infinite precision (pinned at zero),
    and ``lam`` is 0.0 wherever ``inv_prec`` is 0.0.
    """

    lam: np.ndarray
    inv_prec: np.ndarray


@dataclass
class Belief:
    """Single-row contribution to the target: mean parameter ``xi`` and
    precision diagonal ``xi_diag`` (nonnegative, exactly 0 where the row
    entry is 0)."""

    xi: np.ndarray
    xi_diag: np.ndarray


@dataclass
class IgaState:
    """Full solver state: target pair, pre-threshold sums, per-row auxiliary
    pairs, latest beliefs, step counter, and the cumulative count of clamp
    events from the auxiliary precision guard."""

    target: DiagGaussianState
    extra_lam_hat: np.ndarray
    extra_prec_hat: np.ndarray
    aux: list
    beliefs: list
    iteration: int = 0
    clamp_events: int = 0


@dataclass(frozen=True)
class IgaConfig:
    """Run parameters.

    ``damping`` in (0, 1], 1.0 = undamped; ``tol`` is the relative
    estimate-change stop (0.0 disables early stopping so exactly max_iter
    steps run); ``prec_floor`` is the clamp threshold for the auxiliary
    precision denominators (must stay below 1).
    """

    max_iter: int = 50
    damping: float = 1.0
    tol: float = 1e-8
    prec_floor: float = 0.0

    def __post_init__(self):
        if not isinstance(self.max_iter, int) or self.max_iter < 0:
            raise ConfigError(f"max_iter must be a nonnegative integer, got {self.max_iter!r}")
        if not math.isfinite(self.damping) or not 0.0 < self.damping <= 1.0:
            raise ConfigError(f"damping must be in (0, 1], got {self.damping!r}")
        if not math.isfinite(self.tol) or self.tol < 0.0:
            raise ConfigError(f"tol must be a nonnegative finite real, got {self.tol!r}")
        if not math.isfinite(self.prec_floor) or not 0.0 <= self.prec_floor < 1.0:
            raise ConfigError(f"prec_floor must be in [0, 1), got {self.prec_floor!r}")


def compute_belief_row(a_row, y_m, aux: DiagGaussianState, row=None) -> Belief:
    """Belief a single measurement row sends the target, in O(n).

    With v = aux.inv_prec, w = v * aux.lam, q = sum(a^2 v), s = sum(a w):

        xi_diag[k] = a[k]^2 / (1 + q - a[k]^2 v[k])
        xi[k]      = a[k] * (y - s + a[k] w[k]) / (1 + q - a[k]^2 v[k])

    Zero row entries contribute exact (0, 0).  The denominators equal
    1 + sum_{j != k} a[j]^2 v[j] >= 1, so they never vanish.
    """
    v = aux.inv_prec
    w = v * aux.lam
    a2 = a_row * a_row
    q = float(a2 @ v)
    denom = (1.0 + q) - a2 * v
    xi_diag = a2 / denom
    xi = a_row * ((y_m - float(a_row @ w)) + a_row * w) / denom
    if not (np.all(np.isfinite(xi_diag)) and np.all(np.isfinite(xi))):
        where = "" if row is None else f" (row {row})"
        raise NumericalError(f"non-finite belief{where}")
    return Belief(xi, xi_diag)


def compute_belief_row_dense_oracle(a_row, y_m, aux: DiagGaussianState, row=None) -> Belief:
    """Same belief through the dense-covariance route; test reference only.

    Builds the full row-posterior precision diag(1/v) + a a^T, inverts it
    densely, and reads the belief off the mean and variance diagonals.
    Requires every auxiliary inverse precision strictly positive and
    n <= 512.
    """
    v = np.asarray(aux.inv_prec, dtype=float)
    if v.size > 512:
        raise OracleError(f"dense belief oracle is limited to n <= 512, got n = {v.size}")
    if np.any(v <= 0.0):
        raise OracleError("dense belief oracle requires strictly positive inverse precisions")
    a_row = np.asarray(a_row, dtype=float)
    prec = np.diag(1.0 / v) + np.outer(a_row, a_row)
    cov = np.linalg.inv(prec)
    mean = cov @ (aux.lam + a_row * y_m)
    d = np.diag(cov)
    belief = Belief(mean / d - aux.lam, 1.0 / d - 1.0 / v)
    if not (np.all(np.isfinite(belief.xi)) and np.all(np.isfinite(belief.xi_diag))):
        where = "" if row is None else f" (row {row})"
        raise OracleError(f"dense belief oracle produced non-finite values{where}")
    return belief


def init_iga_state(inst: ProblemInstance) -> IgaState:
    """Unit-precision start: target and every auxiliary pair at
    (lam = 0, inv_prec = 1); the pre-threshold sums start at 0, so the
    restatement identity holds at iteration 0."""
    n = inst.n
    target = DiagGaussianState(np.zeros(n), np.ones(n))
    aux = [DiagGaussianState(np.zeros(n), np.ones(n)) for _ in range(inst.m)]
    return IgaState(target, np.zeros(n), np.zeros(n), aux, [], 0, 0)


def target_mean(state: IgaState) -> np.ndarray:
    """Current estimate mu = inv_prec * lam (0 on pinned coordinates)."""
    return state.target.inv_prec * state.target.lam


def iga_step(state: IgaState, inst: ProblemInstance, cfg: IgaConfig) -> IgaState:
    """One (optionally damped) fixed-point step; pure in (state, inst, cfg).

    Raises
    ------
    DivergenceError
        If any belief or updated parameter goes non-finite; carries the
        step index and first offending coordinate.
    """
    a, y, kappa, n = inst.a, inst.y, inst.kappa, inst.n
    alpha = cfg.damping
    try:
        beliefs = [compute_belief_row(a[m], y[m], state.aux[m], row=m) for m in range(inst.m)]
    except NumericalError as exc:
        raise DivergenceError(str(exc), iteration=state.iteration) from exc

    # sequential ascending-row accumulation, order pinned for bit reproducibility
    lam_hat = np.zeros(n)
    prec_hat = np.zeros(n)
    for belief in beliefs:
        lam_hat = lam_hat + belief.xi
        prec_hat = prec_hat + belief.xi_diag

    # prec_hat[k] == 0 (all-zero column) lands on the inactive branch
    lam0, inv0 = upsilon_pair_arrays(lam_hat, prec_hat, kappa)

    clamp_events = state.clamp_events
    aux_new = []
    for m in range(inst.m):
        belief = beliefs[m]
        lam_m = lam0 - belief.xi
        den = 1.0 - belief.xi_diag * inv0
        clamped = den <= cfg.prec_floor
        inv_m = np.zeros(n)
        keep = ~clamped
        inv_m[keep] = inv0[keep] / den[keep]
        clamp_events += int(np.count_nonzero(clamped))
        if not (np.all(np.isfinite(lam_m)) and np.all(np.isfinite(inv_m))):
            bad = np.flatnonzero(~(np.isfinite(lam_m) & np.isfinite(inv_m)))
            raise DivergenceError(
                f"non-finite auxiliary update at row {m}",
                iteration=state.iteration,
                coordinate=int(bad[0]),
            )
        if alpha < 1.0:
            lam_m = (1.0 - alpha) * state.aux[m].lam + alpha * lam_m
            inv_m = (1.0 - alpha) * state.aux[m].inv_prec + alpha * inv_m
        aux_new.append(DiagGaussianState(lam_m, inv_m))

    if alpha < 1.0:
        lam0 = (1.0 - alpha) * state.target.lam + alpha * lam0
        inv0 = (1.0 - alpha) * state.target.inv_prec + alpha * inv0
    if not (np.all(np.isfinite(lam0)) and np.all(np.isfinite(inv0))):
        bad = np.flatnonzero(~(np.isfinite(lam0) & np.isfinite(inv0)))
        raise DivergenceError(
            "non-finite target update",
            iteration=state.iteration,
            coordinate=int(bad[0]),
        )

    return IgaState(
        target=DiagGaussianState(lam0, inv0),
        extra_lam_hat=lam_hat,
        extra_prec_hat=prec_hat,
        aux=aux_new,
        beliefs=beliefs,
        iteration=state.iteration + 1,
        clamp_events=clamp_events,
    )


def _record(state: IgaState, inst: ProblemInstance, wall_ms: float) -> TraceRecord:
    mu = target_mean(state)
    return TraceRecord(
        iteration=state.iteration,
        estimate=mu,
        nmse=nmse_or_none(mu, inst.h_true),
        residual=float(np.linalg.norm(inst.y - inst.a @ mu)),
        active_fraction=float(np.count_nonzero(state.target.inv_prec > 0.0)) / inst.n,
        scalars={"clamp_events": float(state.clamp_events)},
        wall_ms=wall_ms,
    )


def run_iga(inst: ProblemInstance, cfg: IgaConfig | None = None) -> SolverTrace:
    """Iterate iga_step until the relative estimate change
    ||mu' - mu||_2 / max(||mu||_2, 1e-12) drops below cfg.tol or max_iter
    steps complete.  Returns the full trace (records[0] is the initial
    state); on divergence the partial trace is attached to the raised error.
    """
    cfg = cfg if cfg is not None else IgaConfig()
    state = init_iga_state(inst)
    start = time.perf_counter()
    records = [_record(state, inst, 0.0)]
    converged = False
    prev = records[0].estimate
    for _ in range(cfg.max_iter):
        try:
            state = iga_step(state, inst, cfg)
        except DivergenceError as exc:
            exc.trace = SolverTrace("iga", records, False, state)
            raise
        mu = target_mean(state)
        records.append(_record(state, inst, (time.perf_counter() - start) * 1e3))
        rel = float(np.linalg.norm(mu - prev)) / max(float(np.linalg.norm(prev)), 1e-12)
        prev = mu
        if rel < cfg.tol:
            converged = True
            break
    return SolverTrace("iga", records, converged, state)


def check_m_condition(state: IgaState, inst: ProblemInstance) -> float:
    """Worst l_inf disagreement between any auxiliary mean and the target mean.

    The auxiliary mean solves (Lambda_m + a a^T) mu_m = lam_m + a y_m; with
    v the auxiliary inverse precisions, the rank-one identity gives in O(n)
    per row

        u = v * (lam_m + a y_m),  mu_m = u - (v * a) * (a @ u) / (1 + a^2 @ v).

    Rows agree with the target mean at a fixed point.
    """
    mu0 = target_mean(state)
    worst = 0.0
    for m in range(inst.m):
        v = state.aux[m].inv_prec
        a_row = inst.a[m]
        u = v * (state.aux[m].lam + a_row * inst.y[m])
        r = 1.0 + float((a_row * a_row) @ v)
        mu_m = u - (v * a_row) * (float(a_row @ u) / r)
        worst = max(worst, float(np.max(np.abs(mu_m - mu0))))
    return worst


def e_condition_residual(state: IgaState) -> float:
    """Max restatement residual over the finite-precision coordinates.

    Where target.inv_prec > 0 the mean parameters satisfy
    sum_m lam_m + extra_lam_hat == M * lam, and where additionally every
    auxiliary inverse precision is positive the precisions satisfy
    sum_m (1/inv_m) + extra_prec_hat == M / inv_prec.  Coordinates carrying
    an infinite precision are excluded (their sums are not finite).  Exact
    (to accumulation rounding) after every undamped step.
    """
    target = state.target
    rows = len(state.aux)
    finite = target.inv_prec > 0.0
    if rows == 0 or not np.any(finite):
        return 0.0
    lam_sum = np.zeros_like(target.lam)
    for aux in state.aux:
        lam_sum = lam_sum + aux.lam
    resid = float(np.max(np.abs(lam_sum[finite] + state.extra_lam_hat[finite] - rows * target.lam[finite])))
    aux_inv = np.stack([aux.inv_prec for aux in state.aux])
    ok = finite & np.all(aux_inv > 0.0, axis=0)
    if np.any(ok):
        prec_sum = np.sum(1.0 / aux_inv[:, ok], axis=0)
        resid = max(
            resid,
            float(np.max(np.abs(prec_sum + state.extra_prec_hat[ok] - rows / target.inv_prec[ok]))),
        )
    return resid
