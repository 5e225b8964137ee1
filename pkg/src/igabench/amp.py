"""First-order approximate message passing with the soft threshold, kept as
an independent reference route for the differential harness.

Step order mirrors the scalar-precision solver exactly, with delta = m/n:

    1.  f = nonzero fraction of the incoming estimate mu
    2.  tau_z' = (f/delta) * (1 + tau_z)
    3.  z' = y - a @ mu + (f/delta) * z
    4.  mu' = eta(a.T @ z' + mu, kappa * (1 + tau_z'))

The state carries gamma = kappa * tau_z, the excess of the effective
threshold over kappa, as an invariant convenience field.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError
from .model import ProblemInstance, nmse_or_none
from .shrinkage import eta
from .trace import SolverTrace, TraceRecord


@dataclass
class AmpState:
    mu: np.ndarray
    z: np.ndarray
    tau_z: float
    gamma: float
    iteration: int = 0


@dataclass(frozen=True)
class AmpConfig:
    """max_iter: step budget; tol: relative estimate-change stop
    (0.0 disables early stopping)."""

    max_iter: int = 50
    tol: float = 1e-8

    def __post_init__(self):
        if not isinstance(self.max_iter, int) or self.max_iter < 0:
            raise ConfigError(f"max_iter must be a nonnegative integer, got {self.max_iter!r}")
        if not math.isfinite(self.tol) or self.tol < 0.0:
            raise ConfigError(f"tol must be a nonnegative finite real, got {self.tol!r}")


def init_amp_state(inst: ProblemInstance, tau_z: float = 0.0) -> AmpState:
    """Cold start: zero estimate, z = y, configurable nonnegative tau_z."""
    tau_z = float(tau_z)
    if not math.isfinite(tau_z) or tau_z < 0.0:
        raise ConfigError(f"tau_z must be a nonnegative finite real, got {tau_z!r}")
    return AmpState(np.zeros(inst.n), inst.y.copy(), tau_z, inst.kappa * tau_z, 0)


def amp_step(state: AmpState, inst: ProblemInstance) -> AmpState:
    """One step in the canonical order above; pure in (state, inst)."""
    delta = inst.m / inst.n
    f = float(np.count_nonzero(state.mu)) / inst.n
    ratio = f / delta
    tau_z = ratio * (1.0 + state.tau_z)
    z = inst.y - inst.a @ state.mu + ratio * state.z
    s = inst.a.T @ z + state.mu
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(s))):
        bad = np.flatnonzero(~np.isfinite(s))
        raise DivergenceError(
            "non-finite iterate",
            iteration=state.iteration,
            coordinate=int(bad[0]) if bad.size else None,
        )
    mu = eta(s, inst.kappa * (1.0 + tau_z))
    return AmpState(mu, z, float(tau_z), inst.kappa * float(tau_z), state.iteration + 1)


def _record(state: AmpState, inst: ProblemInstance, wall_ms: float) -> TraceRecord:
    return TraceRecord(
        iteration=state.iteration,
        estimate=state.mu,
        nmse=nmse_or_none(state.mu, inst.h_true),
        residual=float(np.linalg.norm(inst.y - inst.a @ state.mu)),
        active_fraction=float(np.count_nonzero(state.mu)) / inst.n,
        scalars={"tau_z": state.tau_z, "gamma": state.gamma},
        wall_ms=wall_ms,
    )


def run_amp(inst: ProblemInstance, cfg: AmpConfig | None = None, tau_z0: float = 0.0) -> SolverTrace:
    """Iterate amp_step until the relative estimate change drops below
    cfg.tol or max_iter steps complete; same stopping rule as run_iga.
    On divergence the partial trace is attached to the raised error.
    """
    cfg = cfg if cfg is not None else AmpConfig()
    state = init_amp_state(inst, tau_z=tau_z0)
    start = time.perf_counter()
    records = [_record(state, inst, 0.0)]
    converged = False
    prev = records[0].estimate
    for _ in range(cfg.max_iter):
        try:
            state = amp_step(state, inst)
        except DivergenceError as exc:
            exc.trace = SolverTrace("amp", records, False, state)
            raise
        records.append(_record(state, inst, (time.perf_counter() - start) * 1e3))
        rel = float(np.linalg.norm(state.mu - prev)) / max(float(np.linalg.norm(prev)), 1e-12)
        prev = state.mu
        if rel < cfg.tol:
            converged = True
            break
    return SolverTrace("amp", records, converged, state)
