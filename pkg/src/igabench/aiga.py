"""Scalar-precision approximation of the per-measurement solver.

Collapses the per-row auxiliary states into one corrected residual vector z
and a single scalar precision prec_hat for the extra factor; one step costs
two matrix-vector products.  Undamped by design.

Step order, with delta = m/n and mu = inv_prec0 * lam0 from the incoming
state:

    1.  prec_hat' = 1 / (1 + (iota/delta) / prec_hat)
    2.  z' = y - a @ mu + (iota/delta) * z
    3.  lam_hat0' = prec_hat' * (a.T @ z' + mu)
    4.  iota' = #{ |lam_hat0'| > kappa } / n        (strict inequality)
    5.  (lam0', inv_prec0') = soft-threshold pair of (lam_hat0', prec_hat')

prec_hat stays in (0, 1] and iota in [0, 1] for the whole run; the nonzero
inv_prec0 entries all equal 1/prec_hat of the step that produced them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError
from .model import ProblemInstance, nmse_or_none
from .shrinkage import upsilon_pair_arrays
from .trace import SolverTrace, TraceRecord


@dataclass
class AigaState:
    lam0: np.ndarray
    inv_prec0: np.ndarray
    lam_hat0: np.ndarray
    prec_hat: float
    z: np.ndarray
    iota: float
    iteration: int = 0


@dataclass(frozen=True)
class AigaConfig:
    """max_iter: step budget; tol: relative estimate-change stop
    (0.0 disables early stopping)."""

    max_iter: int = 50
    tol: float = 1e-8

    def __post_init__(self):
        if not isinstance(self.max_iter, int) or self.max_iter < 0:
            raise ConfigError(f"max_iter must be a nonnegative integer, got {self.max_iter!r}")
        if not math.isfinite(self.tol) or self.tol < 0.0:
            raise ConfigError(f"tol must be a nonnegative finite real, got {self.tol!r}")


def init_aiga_state(inst: ProblemInstance, prec_hat: float = 1.0) -> AigaState:
    """Cold start: zero estimate, z = y, iota = 0, configurable prec_hat in (0, 1]."""
    prec_hat = float(prec_hat)
    if not math.isfinite(prec_hat) or not 0.0 < prec_hat <= 1.0:
        raise ConfigError(f"prec_hat must be in (0, 1], got {prec_hat!r}")
    n = inst.n
    return AigaState(np.zeros(n), np.zeros(n), np.zeros(n), prec_hat, inst.y.copy(), 0.0, 0)


def target_mean(state: AigaState) -> np.ndarray:
    """Current estimate mu = inv_prec0 * lam0."""
    return state.inv_prec0 * state.lam0


def aiga_step(state: AigaState, inst: ProblemInstance) -> AigaState:
    """One step in the canonical order above; pure in (state, inst)."""
    delta = inst.m / inst.n
    onsager = state.iota / delta
    mu = state.inv_prec0 * state.lam0
    prec_hat = 1.0 / (1.0 + onsager * (1.0 / state.prec_hat))
    z = inst.y - inst.a @ mu + onsager * state.z
    lam_hat = prec_hat * (inst.a.T @ z + mu)
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(lam_hat))):
        bad = np.flatnonzero(~np.isfinite(lam_hat))
        raise DivergenceError(
            "non-finite iterate",
            iteration=state.iteration,
            coordinate=int(bad[0]) if bad.size else None,
        )
    iota = float(np.count_nonzero(np.abs(lam_hat) > inst.kappa)) / inst.n
    lam0, inv0 = upsilon_pair_arrays(lam_hat, prec_hat, inst.kappa)
    return AigaState(lam0, inv0, lam_hat, float(prec_hat), z, iota, state.iteration + 1)


def _record(state: AigaState, inst: ProblemInstance, wall_ms: float) -> TraceRecord:
    mu = target_mean(state)
    return TraceRecord(
        iteration=state.iteration,
        estimate=mu,
        nmse=nmse_or_none(mu, inst.h_true),
        residual=float(np.linalg.norm(inst.y - inst.a @ mu)),
        active_fraction=float(np.count_nonzero(state.inv_prec0 > 0.0)) / inst.n,
        scalars={"iota": state.iota, "prec_hat": state.prec_hat},
        wall_ms=wall_ms,
    )


def run_aiga(inst: ProblemInstance, cfg: AigaConfig | None = None, prec_hat0: float = 1.0) -> SolverTrace:
    """Iterate aiga_step until the relative estimate change drops below
    cfg.tol or max_iter steps complete; same stopping rule as run_iga.
    On divergence the partial trace is attached to the raised error.
    """
    cfg = cfg if cfg is not None else AigaConfig()
    state = init_aiga_state(inst, prec_hat=prec_hat0)
    start = time.perf_counter()
    records = [_record(state, inst, 0.0)]
    converged = False
    prev = records[0].estimate
    for _ in range(cfg.max_iter):
        try:
            state = aiga_step(state, inst)
        except DivergenceError as exc:
            exc.trace = SolverTrace("aiga", records, False, state)
            raise
        mu = target_mean(state)
        records.append(_record(state, inst, (time.perf_counter() - start) * 1e3))
        rel = float(np.linalg.norm(mu - prev)) / max(float(np.linalg.norm(prev)), 1e-12)
        prev = mu
        if rel < cfg.tol:
            converged = True
            break
    return SolverTrace("aiga", records, converged, state)
