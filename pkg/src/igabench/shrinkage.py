"""Soft-threshold scalar family and its finite-temperature quadrature reference.

``eta``/``eta_prime`` are the plain soft threshold and its a.e. derivative.
``zeta``/``zeta_prime`` are the zero-temperature mean and scaled variance of
the scalar density

    p(h) ~ exp(-beta * (kappa*|h| + 0.5*prec_hat*h^2 - lam_hat*h))

as beta -> inf; ``upsilon_pair`` packages the same limit as a
natural-parameter pair with an explicit inactive branch, where an inverse
precision of 0.0 encodes an infinitely precise spike at zero (no floating
infinities are produced).  Every function resolves the measure-zero boundary
|input| == threshold to the inactive/zero branch.

``laplace_prior_moments_quadrature`` evaluates the finite-beta mean and
variance of the same density by trapezoid quadrature, giving an independent
route for checking the zero-temperature formulas: the mean tends to ``zeta``
and beta times the variance tends to ``zeta_prime``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OracleError


@dataclass(frozen=True)
class ThresholdPair:
    """Natural-parameter output of the soft-threshold prior map.

    ``inv_precision == 0.0`` encodes infinite precision (coordinate pinned
    at zero); ``lam`` is 0.0 whenever ``inv_precision`` is 0.0.
    """

    lam: float
    inv_precision: float

    def __post_init__(self):
        if self.inv_precision < 0.0 or not math.isfinite(self.inv_precision):
            raise ConfigError(f"inv_precision must be finite and >= 0, got {self.inv_precision!r}")
        if self.inv_precision == 0.0 and self.lam != 0.0:
            raise ConfigError("lam must be 0 when inv_precision is 0")


@dataclass(frozen=True)
class QuadratureConfig:
    """Grid recipe for the finite-beta reference integral.

    The grid is uniform, centered at lam_hat/prec_hat, and extends
    ``half_width_sigmas`` local standard deviations 1/sqrt(beta*prec_hat)
    to each side; ``node_count`` must be at least 101 so node doubling is a
    meaningful convergence check.
    """

    beta: float = 1e4
    half_width_sigmas: float = 12.0
    node_count: int = 4001

    def __post_init__(self):
        if not math.isfinite(self.beta) or self.beta <= 0.0:
            raise ConfigError(f"beta must be a positive finite real, got {self.beta!r}")
        if not math.isfinite(self.half_width_sigmas) or self.half_width_sigmas <= 0.0:
            raise ConfigError(f"half_width_sigmas must be positive, got {self.half_width_sigmas!r}")
        if not isinstance(self.node_count, int) or self.node_count < 101:
            raise ConfigError(f"node_count must be an integer >= 101, got {self.node_count!r}")


def _scalar_or_array(out: np.ndarray, scalar_input: bool):
    return float(out) if scalar_input else out


def eta(mu, tau):
    """Soft threshold: (|mu| - tau)*sign(mu) where |mu| > tau, else 0."""
    mu_arr = np.asarray(mu, dtype=float)
    out = np.where(np.abs(mu_arr) > tau, (np.abs(mu_arr) - tau) * np.sign(mu_arr), 0.0)
    return _scalar_or_array(out, np.isscalar(mu))


def eta_prime(mu, tau):
    """Derivative of eta where defined: 1 on the active set, 0 elsewhere."""
    mu_arr = np.asarray(mu, dtype=float)
    out = np.where(np.abs(mu_arr) > tau, 1.0, 0.0)
    return _scalar_or_array(out, np.isscalar(mu))


def zeta(lam_hat, prec_hat, kappa):
    """Zero-temperature mean: (|lam_hat| - kappa)*sign(lam_hat)/prec_hat on the
    active set |lam_hat| > kappa, else 0.

    Computed as the product of the upsilon_pair components (multiplication
    by the reciprocal precision), so zeta == lam * inv_precision holds
    bit-exactly on the active branch.
    """
    lam, inv = _upsilon_arrays_checked(lam_hat, prec_hat, kappa)
    return _scalar_or_array(lam * inv, np.isscalar(lam_hat))


def zeta_prime(lam_hat, prec_hat, kappa):
    """Zero-temperature scaled variance: 1/prec_hat on the active set, else 0."""
    _, inv = _upsilon_arrays_checked(lam_hat, prec_hat, kappa)
    return _scalar_or_array(inv, np.isscalar(lam_hat))


def upsilon_pair(lam_hat: float, prec_hat: float, kappa: float) -> ThresholdPair:
    """Natural-parameter soft-threshold map for one coordinate.

    Active (|lam_hat| > kappa): lam = (|lam_hat| - kappa)*sign(lam_hat),
    inv_precision = 1/prec_hat (requires prec_hat > 0).  Inactive: (0, 0),
    the infinite-precision spike at zero.
    """
    lam, inv = _upsilon_arrays_checked(np.asarray([lam_hat], dtype=float), prec_hat, kappa)
    return ThresholdPair(float(lam[0]), float(inv[0]))


def upsilon_pair_arrays(lam_hat, prec_hat, kappa):
    """Vectorized upsilon_pair: returns (lam, inv_precision) arrays.

    ``prec_hat`` may be a scalar or an array matching ``lam_hat``; a zero
    precision is tolerated only on inactive coordinates (it maps to the
    inactive branch, matching the zero-column convention of the solvers).
    """
    return _upsilon_arrays_checked(lam_hat, prec_hat, kappa)


def _upsilon_arrays_checked(lam_hat, prec_hat, kappa):
    lam_hat = np.asarray(lam_hat, dtype=float)
    prec = np.broadcast_to(np.asarray(prec_hat, dtype=float), lam_hat.shape)
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise ConfigError(f"kappa must be a positive finite real, got {kappa!r}")
    if np.any(prec < 0.0) or not np.all(np.isfinite(prec)):
        raise ConfigError("prec_hat must be finite and nonnegative")
    active = np.abs(lam_hat) > kappa
    if np.any(active & (prec == 0.0)):
        raise ConfigError("prec_hat must be positive on active coordinates")
    lam = np.where(active, (np.abs(lam_hat) - kappa) * np.sign(lam_hat), 0.0)
    inv = np.zeros(lam_hat.shape)
    inv[active] = 1.0 / prec[active]
    return lam, inv


def laplace_prior_moments_quadrature(lam_hat, prec_hat, kappa, config: QuadratureConfig | None = None):
    """Finite-beta mean and variance of the l1-tilted Gaussian, by trapezoid rule.

    Returns ``(mean, variance)`` of p(h) ~ exp(-beta*(kappa*|h| +
    0.5*prec_hat*h^2 - lam_hat*h)) on the grid described by ``config``
    (defaults: beta 1e4, half width 12 sigma, 4001 nodes).  The integrand is
    log-concave and piecewise smooth, so convergence is checkable by node
    doubling.  As beta grows the mean approaches zeta and beta*variance
    approaches zeta_prime.

    Raises
    ------
    OracleError
        If the normalizer or either moment degenerates (non-finite, zero
        mass, or zero variance from an unresolvable grid).
    """
    cfg = config if config is not None else QuadratureConfig()
    lam_hat = float(lam_hat)
    prec_hat = float(prec_hat)
    kappa = float(kappa)
    if not math.isfinite(lam_hat):
        raise ConfigError(f"lam_hat must be finite, got {lam_hat!r}")
    if not math.isfinite(prec_hat) or prec_hat <= 0.0:
        raise ConfigError(f"prec_hat must be a positive finite real, got {prec_hat!r}")
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise ConfigError(f"kappa must be a positive finite real, got {kappa!r}")
    sigma = 1.0 / math.sqrt(cfg.beta * prec_hat)
    center = lam_hat / prec_hat
    half_width = cfg.half_width_sigmas * sigma
    x = np.linspace(center - half_width, center + half_width, cfg.node_count)
    g = kappa * np.abs(x) + 0.5 * prec_hat * x * x - lam_hat * x
    u = np.exp(-cfg.beta * (g - g.min()))
    mass = float(np.trapezoid(u, x))
    if not math.isfinite(mass) or mass <= 0.0:
        raise OracleError(f"quadrature normalizer degenerate: {mass!r}")
    mean = float(np.trapezoid(x * u, x) / mass)
    variance = float(np.trapezoid((x - mean) ** 2 * u, x) / mass)
    if not math.isfinite(mean) or not math.isfinite(variance) or variance <= 0.0:
        raise OracleError(f"quadrature moments degenerate: mean={mean!r} variance={variance!r}")
    return mean, variance
