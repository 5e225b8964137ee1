"""Differential audits and the Monte-Carlo experiment driver.

Three jobs: run the soft-threshold AMP recursion and the scalar-precision
solver in lockstep and report their worst deviations under the documented
state mapping (audit_equivalence), verify the per-row belief identities of
the message-passing solver against direct exclusion sums
(check_mp_iga_correspondence), and sweep NMSE-versus-iteration curves over
seeded Monte-Carlo samples into a delimited results table (run_experiment).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .aiga import AigaConfig, aiga_step, init_aiga_state, run_aiga
from .aiga import target_mean as aiga_target_mean
from .amp import AmpConfig, amp_step, init_amp_state, run_amp
from .errors import ConfigError, DivergenceError, MetricError
from .iga import DiagGaussianState, IgaConfig, compute_belief_row, run_iga
from .model import ProblemInstance, SyntheticConfig, generate_instance, sample_seed
from .trace import fmt17

logger = logging.getLogger(__name__)

ALGORITHMS = ("iga", "aiga", "amp")

RESULTS_HEADER = [
    "algorithm",
    "snr_db",
    "sample_count",
    "iter",
    "nmse",
    "mean_iota",
    "mean_residual",
    "diverged_count",
    "wall_ms",
]


@dataclass
class EquivalenceReport:
    """Lockstep audit outcome.

    ``iters`` is the number of lockstep steps run; the maxima include the
    initial-state comparison (reported as t = 0).  ``passed`` is true iff
    all three maxima are <= the audit threshold; ``diverged`` flags a run
    cut short by a non-finite iterate (reported with partial maxima and
    ``passed`` false).
    """

    iters: int
    max_dz: float
    max_dmu: float
    max_dprec: float
    passed: bool
    diverged: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte-Carlo sweep recipe; field names double as the sweep-config JSON keys.

    ``sample_count`` instances per SNR (per-sample seeds
    ``sample_seed(seed, index)``), each algorithm run for exactly
    ``max_iter`` steps, results optionally written to ``output``.
    """

    m: int
    n: int
    rho: float
    kappa: float
    snr_db_list: tuple
    sample_count: int
    max_iter: int
    algorithms: tuple
    seed: int
    output: str | None = None

    def __post_init__(self):
        # dimension/rho/kappa/seed validation mirrors SyntheticConfig, via a probe
        SyntheticConfig(self.m, self.n, self.rho, 0.0, self.kappa, self.seed)
        snr_list = tuple(float(s) for s in self.snr_db_list)
        if len(snr_list) == 0 or any(math.isnan(s) for s in snr_list):
            raise ConfigError(f"snr_db_list must be non-empty reals, got {self.snr_db_list!r}")
        algos = tuple(str(a).lower() for a in self.algorithms)
        if len(algos) == 0 or any(a not in ALGORITHMS for a in algos):
            raise ConfigError(f"algorithms must be a non-empty subset of {ALGORITHMS}, got {self.algorithms!r}")
        if len(set(algos)) != len(algos):
            raise ConfigError(f"algorithms must not repeat, got {self.algorithms!r}")
        if not isinstance(self.sample_count, int) or self.sample_count < 1:
            raise ConfigError(f"sample_count must be a positive integer, got {self.sample_count!r}")
        if not isinstance(self.max_iter, int) or self.max_iter < 0:
            raise ConfigError(f"max_iter must be a nonnegative integer, got {self.max_iter!r}")
        if self.output is not None and not isinstance(self.output, str):
            raise ConfigError(f"output must be a path string or null, got {self.output!r}")
        object.__setattr__(self, "snr_db_list", snr_list)
        object.__setattr__(self, "algorithms", algos)


def audit_equivalence(
    inst: ProblemInstance,
    max_iter: int,
    tol: float = 1e-8,
    prec_hat0: float = 1.0,
    tau_z0: float = 0.0,
) -> EquivalenceReport:
    """Run amp_step and aiga_step side by side and track their worst deviations.

    State mapping checked after the init comparison and after every step:
    dz = ||z_amp - z_aiga||_inf, dmu = ||mu_amp - inv_prec0*lam0||_inf,
    dprec = |(1 + tau_z) - 1/prec_hat|.  The default init pair is matched
    (1/prec_hat0 == 1 + tau_z0); pass mismatched values to demonstrate the
    mapping breaking.  Never aborts early on deviation; a divergence stops
    the loop and reports partial maxima with ``passed`` false.
    """
    if not isinstance(max_iter, int) or max_iter < 0:
        raise ConfigError(f"max_iter must be a nonnegative integer, got {max_iter!r}")
    if not math.isfinite(tol) or tol <= 0.0:
        raise ConfigError(f"tol must be a positive finite real, got {tol!r}")
    amp_state = init_amp_state(inst, tau_z=tau_z0)
    aiga_state = init_aiga_state(inst, prec_hat=prec_hat0)
    max_dz = float(np.max(np.abs(amp_state.z - aiga_state.z)))
    max_dmu = float(np.max(np.abs(amp_state.mu - aiga_target_mean(aiga_state))))
    max_dprec = abs((1.0 + amp_state.tau_z) - 1.0 / aiga_state.prec_hat)
    diverged = False
    steps = 0
    for _ in range(max_iter):
        try:
            amp_state = amp_step(amp_state, inst)
            aiga_state = aiga_step(aiga_state, inst)
        except DivergenceError:
            diverged = True
            break
        steps += 1
        max_dz = max(max_dz, float(np.max(np.abs(amp_state.z - aiga_state.z))))
        max_dmu = max(max_dmu, float(np.max(np.abs(amp_state.mu - aiga_target_mean(aiga_state)))))
        max_dprec = max(max_dprec, abs((1.0 + amp_state.tau_z) - 1.0 / aiga_state.prec_hat))
    passed = (not diverged) and max_dz <= tol and max_dmu <= tol and max_dprec <= tol
    return EquivalenceReport(steps, max_dz, max_dmu, max_dprec, passed, diverged)


def row_correspondence_deviation(a_row, y_m, aux: DiagGaussianState) -> float:
    """Worst mixed relative/absolute deviation of the per-row belief identities.

    For every coordinate k with a_row[k] != 0 (zero entries are skipped),
    the fast belief must satisfy, against direct exclusion sums,

        1 / xi_diag[k]      == (1 + sum_{j != k} a[j]^2 v[j]) / a[k]^2
        xi[k] / xi_diag[k]  == (y - sum_{j != k} a[j] (v lam)[j]) / a[k]

    Deviations are scaled by max(1, |lhs|, |rhs|).
    """
    belief = compute_belief_row(a_row, y_m, aux)
    a_row = np.asarray(a_row, dtype=float)
    prec_terms = a_row * a_row * aux.inv_prec
    mean_terms = a_row * (aux.inv_prec * aux.lam)
    worst = 0.0
    for k in np.flatnonzero(a_row != 0.0):
        others = np.ones(a_row.size, dtype=bool)
        others[k] = False
        lhs_prec = 1.0 / belief.xi_diag[k]
        rhs_prec = (1.0 + float(np.sum(prec_terms[others]))) / (a_row[k] * a_row[k])
        lhs_mean = belief.xi[k] / belief.xi_diag[k]
        rhs_mean = (y_m - float(np.sum(mean_terms[others]))) / a_row[k]
        dev_prec = abs(lhs_prec - rhs_prec) / max(1.0, abs(lhs_prec), abs(rhs_prec))
        dev_mean = abs(lhs_mean - rhs_mean) / max(1.0, abs(lhs_mean), abs(rhs_mean))
        worst = max(worst, dev_prec, dev_mean)
    return worst


def run_correspondence(seed: int, trials: int, n: int = 16, tol: float = 1e-10):
    """Random-draw identity trials; returns (passed, total).

    Each trial draws, from one seeded generator in this order: a row of n
    standard normals, a scalar standard-normal measurement, n standard-normal
    mean parameters, and n uniform(0.1, 2.0) inverse precisions.  A trial
    passes when row_correspondence_deviation <= tol; the first failure per
    run is logged with its witness values.
    """
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError(f"trials must be a positive integer, got {trials!r}")
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"n must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)
    passed = 0
    for trial in range(trials):
        a_row = rng.standard_normal(n)
        y_m = float(rng.standard_normal())
        lam = rng.standard_normal(n)
        inv_prec = rng.uniform(0.1, 2.0, n)
        dev = row_correspondence_deviation(a_row, y_m, DiagGaussianState(lam, inv_prec))
        if dev <= tol:
            passed += 1
        else:
            logger.warning(
                "correspondence violation: trial=%d deviation=%.3e seed=%r n=%d",
                trial,
                dev,
                seed,
                n,
            )
    return passed, trials


def check_mp_iga_correspondence(seed: int, trials: int, n: int = 16, tol: float = 1e-10) -> bool:
    """True iff every one of ``trials`` random rows satisfies the belief
    identities to ``tol`` (see run_correspondence)."""
    passed, total = run_correspondence(seed, trials, n=n, tol=tol)
    return passed == total


def _run_trace(algorithm: str, inst: ProblemInstance, max_iter: int):
    if algorithm == "iga":
        return run_iga(inst, IgaConfig(max_iter=max_iter, damping=1.0, tol=0.0))
    if algorithm == "aiga":
        return run_aiga(inst, AigaConfig(max_iter=max_iter, tol=0.0))
    if algorithm == "amp":
        return run_amp(inst, AmpConfig(max_iter=max_iter, tol=0.0))
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def _mean(values):
    vals = list(values)
    if not vals:
        return float("nan")
    if any(v is None for v in vals):
        raise MetricError("NMSE unavailable for a sample (missing or zero-norm truth)")
    return float(sum(vals) / len(vals))


def run_experiment(cfg: ExperimentConfig):
    """NMSE-versus-iteration sweep; returns the result rows and optionally
    writes them as CSV to cfg.output.

    For each SNR, ``sample_count`` instances are generated with per-sample
    seeds ``sample_seed(cfg.seed, index)`` (identical instances are shared
    by all algorithms).  Every algorithm runs undamped for exactly
    ``max_iter`` steps (early stopping disabled), so each (algorithm,
    snr_db) group contributes max_iter + 1 rows, iterations 0..max_iter.
    A diverged sample is excluded from every average of its group and
    counted once in diverged_count.  Row order: algorithms as listed, then
    snr_db as listed, then iteration ascending — deterministic for a fixed
    master seed up to the wall_ms column.
    """
    groups = {}
    for snr in cfg.snr_db_list:
        instances = [
            generate_instance(
                SyntheticConfig(cfg.m, cfg.n, cfg.rho, snr, cfg.kappa, sample_seed(cfg.seed, idx))
            )
            for idx in range(cfg.sample_count)
        ]
        for algorithm in cfg.algorithms:
            traces = []
            diverged = 0
            for inst in instances:
                try:
                    traces.append(_run_trace(algorithm, inst, cfg.max_iter))
                except DivergenceError:
                    diverged += 1
            groups[(algorithm, snr)] = (traces, diverged)
    rows = []
    for algorithm in cfg.algorithms:
        for snr in cfg.snr_db_list:
            traces, diverged = groups[(algorithm, snr)]
            for t in range(cfg.max_iter + 1):
                step_records = [trace.records[t] for trace in traces]
                rows.append(
                    {
                        "algorithm": algorithm,
                        "snr_db": snr,
                        "sample_count": cfg.sample_count,
                        "iter": t,
                        "nmse": _mean(rec.nmse for rec in step_records),
                        "mean_iota": _mean(rec.active_fraction for rec in step_records),
                        "mean_residual": _mean(rec.residual for rec in step_records),
                        "diverged_count": diverged,
                        "wall_ms": _mean(rec.wall_ms for rec in step_records),
                    }
                )
    if cfg.output is not None:
        write_results_csv(rows, cfg.output)
    return rows


def write_results_csv(rows, path) -> None:
    """Write result rows with the fixed header, floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row["algorithm"],
                    fmt17(row["snr_db"]),
                    str(row["sample_count"]),
                    str(row["iter"]),
                    fmt17(row["nmse"]),
                    fmt17(row["mean_iota"]),
                    fmt17(row["mean_residual"]),
                    str(row["diverged_count"]),
                    fmt17(row["wall_ms"]),
                ]
            )
