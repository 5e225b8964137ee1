"""Algorithm-agnostic per-iteration solver records and their CSV form."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


def fmt17(value) -> str:
    """Format a float at 17 significant digits so it round-trips exactly."""
    return format(float(value), ".17g")


@dataclass
class TraceRecord:
    """Snapshot after one solver step (or of the initial state at iteration 0).

    ``estimate`` is the current mean estimate, ``nmse`` the squared-error
    ratio against the instance truth when available, ``residual`` the plain
    data residual ||y - a @ estimate||_2, ``active_fraction`` the fraction
    of nonzero estimate coordinates, ``scalars`` algorithm-specific values
    (e.g. iota, prec_hat, tau_z, clamp_events), ``wall_ms`` cumulative wall
    time since the run started (excluded from determinism contracts).
    """

    iteration: int
    estimate: np.ndarray
    nmse: float | None
    residual: float
    active_fraction: float
    scalars: dict = field(default_factory=dict)
    wall_ms: float = 0.0


@dataclass
class SolverTrace:
    """Iteration history of one solver run.

    ``records[0]`` is the initial state (iteration 0, estimate all zeros);
    one record follows per completed step, so a run of T steps holds T+1
    records.  ``final_state`` keeps the solver's last state object so
    post-hoc diagnostics (restatement residuals, auxiliary-mean agreement)
    can inspect it.
    """

    algorithm: str
    records: list
    converged: bool = False
    final_state: object = None

    @property
    def estimate(self) -> np.ndarray:
        return self.records[-1].estimate

    @property
    def iterations(self) -> int:
        return self.records[-1].iteration

    def scalar_keys(self):
        keys = set()
        for rec in self.records:
            keys.update(rec.scalars)
        return sorted(keys)

    def write_csv(self, path) -> None:
        """Per-iteration CSV: iter,nmse,residual,active_fraction,<scalars>,wall_ms.

        Floats are written at 17 significant digits; an unavailable NMSE is
        an empty field.
        """
        keys = self.scalar_keys()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "nmse", "residual", "active_fraction", *keys, "wall_ms"])
            for rec in self.records:
                row = [
                    str(rec.iteration),
                    "" if rec.nmse is None else fmt17(rec.nmse),
                    fmt17(rec.residual),
                    fmt17(rec.active_fraction),
                ]
                row.extend(fmt17(rec.scalars[k]) if k in rec.scalars else "" for k in keys)
                row.append(fmt17(rec.wall_ms))
                writer.writerow(row)
