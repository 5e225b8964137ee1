"""Problem instances, synthetic data generation, metrics, and JSON round-trip.

The measurement model is ``y = a @ h + z`` with ``a`` of shape ``(m, n)``,
``z`` white Gaussian noise of variance ``sigma_z2``, and a positive l1
penalty weight ``kappa`` carried alongside the data so downstream solvers
see one self-contained object.

Randomness derives from a single integer seed through
``numpy.random.SeedSequence(seed).spawn(3)``.  The three child streams feed,
in order, the matrix draw, the signal draw (support uniforms first, then the
nonzero values), and the noise draw, so each component is independently
reproducible.  Monte-Carlo drivers derive per-sample seeds as
``master_seed ^ sample_index`` (see :func:`sample_seed`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, MetricError, SchemaError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ProblemInstance:
    """One l1-penalized least-squares problem: min_h kappa*||h||_1 + 0.5*||y - a h||_2^2.

    Parameters
    ----------
    m, n : int
        Measurement count and signal length.
    a : ndarray, shape (m, n)
        Measurement matrix.
    y : ndarray, shape (m,)
        Observed measurements.
    kappa : float
        Positive l1 penalty weight.
    h_true : ndarray, shape (n,), optional
        Ground-truth signal when known (synthetic data).
    sigma_z2 : float, optional
        Noise variance used to generate ``y``.
    seed, rho : optional
        Generation metadata carried for reproducibility.

    Instances are treated as immutable after construction; arrays are
    coerced to contiguous float64 and validated for shape and finiteness.
    """

    m: int
    n: int
    a: np.ndarray
    y: np.ndarray
    kappa: float
    h_true: np.ndarray | None = None
    sigma_z2: float | None = None
    seed: int | None = None
    rho: float | None = None

    def __post_init__(self):
        if not isinstance(self.m, int) or not isinstance(self.n, int):
            raise ConfigError(f"m and n must be integers, got {self.m!r}, {self.n!r}")
        if self.m < 1 or self.n < 1:
            raise ConfigError(f"dimensions must be positive, got m={self.m} n={self.n}")
        a = np.ascontiguousarray(np.asarray(self.a, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float))
        if a.shape != (self.m, self.n):
            raise ConfigError(f"a must have shape ({self.m}, {self.n}), got {a.shape}")
        if y.shape != (self.m,):
            raise ConfigError(f"y must have shape ({self.m},), got {y.shape}")
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(y)):
            raise ConfigError("a and y must contain only finite values")
        kappa = float(self.kappa)
        if not math.isfinite(kappa) or kappa <= 0.0:
            raise ConfigError(f"kappa must be a positive finite real, got {self.kappa!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "kappa", kappa)
        if self.h_true is not None:
            h = np.ascontiguousarray(np.asarray(self.h_true, dtype=float))
            if h.shape != (self.n,):
                raise ConfigError(f"h_true must have shape ({self.n},), got {h.shape}")
            if not np.all(np.isfinite(h)):
                raise ConfigError("h_true must contain only finite values")
            object.__setattr__(self, "h_true", h)
        if self.sigma_z2 is not None:
            s = float(self.sigma_z2)
            if not math.isfinite(s) or s < 0.0:
                raise ConfigError(f"sigma_z2 must be a nonnegative finite real, got {self.sigma_z2!r}")
            object.__setattr__(self, "sigma_z2", s)

    @property
    def delta(self) -> float:
        """Undersampling ratio m / n."""
        return self.m / self.n


@dataclass(frozen=True)
class SyntheticConfig:
    """Generation recipe for a synthetic instance.

    ``rho`` is the Bernoulli support probability of the signal (nonzero
    entries are standard normal), ``snr_db`` the target signal-to-noise
    ratio in dB (``math.inf`` means noiseless), ``seed`` the master seed
    for the three derived streams.
    """

    m: int
    n: int
    rho: float
    snr_db: float
    kappa: float
    seed: int

    def __post_init__(self):
        if not isinstance(self.m, int) or not isinstance(self.n, int) or self.m < 1 or self.n < 1:
            raise ConfigError(f"dimensions must be positive integers, got m={self.m!r} n={self.n!r}")
        if not isinstance(self.rho, (int, float)) or math.isnan(self.rho) or not 0.0 < float(self.rho) <= 1.0:
            raise ConfigError(f"rho must be in (0, 1], got {self.rho!r}")
        if not isinstance(self.snr_db, (int, float)) or math.isnan(self.snr_db):
            raise ConfigError(f"snr_db must be a real number (inf allowed), got {self.snr_db!r}")
        kappa = float(self.kappa)
        if not math.isfinite(kappa) or kappa <= 0.0:
            raise ConfigError(f"kappa must be a positive finite real, got {self.kappa!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "snr_db", float(self.snr_db))
        object.__setattr__(self, "kappa", kappa)


def noise_variance_from_snr(snr_db: float, rho: float, m: int, n: int) -> float:
    """Noise variance hitting a per-measurement SNR target.

    Matrix entries have variance 1/m and the signal has ``n*rho`` expected
    unit-variance nonzeros, so each measurement carries signal power
    ``n*rho/m``; the variance solving SNR = signal power / noise power is

        sigma_z2 = (n * rho / m) * 10**(-snr_db / 10).

    ``snr_db = math.inf`` yields exactly 0.0 (noiseless).
    """
    if not isinstance(m, int) or not isinstance(n, int) or m < 1 or n < 1:
        raise ConfigError(f"dimensions must be positive integers, got m={m!r} n={n!r}")
    if not isinstance(rho, (int, float)) or math.isnan(rho) or not 0.0 < float(rho) <= 1.0:
        raise ConfigError(f"rho must be in (0, 1], got {rho!r}")
    if not isinstance(snr_db, (int, float)) or math.isnan(snr_db):
        raise ConfigError(f"snr_db must be a real number (inf allowed), got {snr_db!r}")
    return (n * float(rho) / m) * 10.0 ** (-float(snr_db) / 10.0)


def sample_seed(master_seed: int, index: int) -> int:
    """Per-sample seed for Monte-Carlo runs: ``master_seed ^ index``."""
    if not isinstance(master_seed, int) or master_seed < 0:
        raise ConfigError(f"master_seed must be a nonnegative integer, got {master_seed!r}")
    if not isinstance(index, int) or index < 0:
        raise ConfigError(f"index must be a nonnegative integer, got {index!r}")
    return master_seed ^ index


def generate_instance(cfg: SyntheticConfig) -> ProblemInstance:
    """Draw a synthetic instance from the documented three-stream split.

    Stream 0: matrix entries i.i.d. N(0, 1/m).  Stream 1: signal, first n
    support uniforms (support where u < rho), then n standard-normal values
    masked by the support.  Stream 2: noise standard normals scaled by
    sqrt(sigma_z2).
    """
    matrix_ss, signal_ss, noise_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    a = np.random.default_rng(matrix_ss).standard_normal((cfg.m, cfg.n)) / math.sqrt(cfg.m)
    signal_rng = np.random.default_rng(signal_ss)
    support = signal_rng.random(cfg.n) < cfg.rho
    h = np.where(support, signal_rng.standard_normal(cfg.n), 0.0)
    sigma_z2 = noise_variance_from_snr(cfg.snr_db, cfg.rho, cfg.m, cfg.n)
    z = np.random.default_rng(noise_ss).standard_normal(cfg.m)
    y = a @ h + math.sqrt(sigma_z2) * z
    return ProblemInstance(
        m=cfg.m,
        n=cfg.n,
        a=a,
        y=y,
        kappa=cfg.kappa,
        h_true=h,
        sigma_z2=sigma_z2,
        seed=cfg.seed,
        rho=cfg.rho,
    )


def nmse(estimates, truths) -> float:
    """Sample-averaged normalized squared error (1/L) * sum ||est - tru||^2 / ||tru||^2.

    Raises
    ------
    MetricError
        If the lists are empty, of mismatched length, or any truth vector
        has zero norm.
    """
    if len(estimates) != len(truths):
        raise MetricError(f"estimate/truth count mismatch: {len(estimates)} vs {len(truths)}")
    if len(estimates) == 0:
        raise MetricError("nmse needs at least one sample pair")
    total = 0.0
    for est, tru in zip(estimates, truths):
        est = np.asarray(est, dtype=float)
        tru = np.asarray(tru, dtype=float)
        if est.shape != tru.shape:
            raise MetricError(f"estimate/truth shape mismatch: {est.shape} vs {tru.shape}")
        denom = float(tru @ tru)
        if denom <= 0.0:
            raise MetricError("zero-norm truth vector: NMSE undefined")
        diff = est - tru
        total += float(diff @ diff) / denom
    return total / len(estimates)


def nmse_or_none(estimate: np.ndarray, h_true: np.ndarray | None) -> float | None:
    """Single-sample squared-error ratio, or None when undefined (no/zero truth)."""
    if h_true is None:
        return None
    denom = float(h_true @ h_true)
    if denom <= 0.0:
        return None
    diff = np.asarray(estimate, dtype=float) - h_true
    return float(diff @ diff) / denom


_REQUIRED_KEYS = {"format_version", "m", "n", "kappa", "a", "y"}
_OPTIONAL_KEYS = {"h_true", "sigma_z2", "seed", "rho"}


def save_instance(inst: ProblemInstance, path) -> None:
    """Write the instance as JSON at full double precision.

    Floats serialize via Python's shortest round-trip repr, so
    ``load_instance(save_instance(...))`` reproduces every array bit-exactly.
    """
    doc = {
        "format_version": FORMAT_VERSION,
        "m": inst.m,
        "n": inst.n,
        "kappa": inst.kappa,
        "a": inst.a.tolist(),
        "y": inst.y.tolist(),
    }
    if inst.h_true is not None:
        doc["h_true"] = inst.h_true.tolist()
    if inst.sigma_z2 is not None:
        doc["sigma_z2"] = inst.sigma_z2
    if inst.seed is not None:
        doc["seed"] = inst.seed
    if inst.rho is not None:
        doc["rho"] = inst.rho
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_instance(path) -> ProblemInstance:
    """Read an instance JSON, validating keys, version, shapes, and values.

    Raises
    ------
    SchemaError
        On malformed JSON, unknown/missing keys, a version other than
        ``FORMAT_VERSION``, or any array/value failing instance validation.
    OSError
        If the file cannot be opened.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: instance file must hold a JSON object")
    missing = _REQUIRED_KEYS - doc.keys()
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")
    unknown = doc.keys() - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise SchemaError(f"{path}: unknown keys {sorted(unknown)}")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"{path}: unsupported format_version {doc['format_version']!r}")
    try:
        return ProblemInstance(
            m=doc["m"],
            n=doc["n"],
            a=np.array(doc["a"], dtype=float),
            y=np.array(doc["y"], dtype=float),
            kappa=doc["kappa"],
            h_true=np.array(doc["h_true"], dtype=float) if "h_true" in doc else None,
            sigma_z2=doc.get("sigma_z2"),
            seed=doc.get("seed"),
            rho=doc.get("rho"),
        )
    except (ConfigError, ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
