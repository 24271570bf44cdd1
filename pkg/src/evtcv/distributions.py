"""Generalized extreme value (GEV) and generalized Pareto (GPD) families.

Closed-form CDF, quantile and log-density for both families, including the
xi -> 0 limits (Gumbel / exponential).  All functions accept scalars or
numpy arrays in the data argument and are pure, so they are safe to call
from any number of threads.

Conventions:
  * GEV: shape xi, location mu, scale sigma; support {z : 1 + xi(z-mu)/sigma > 0}.
  * GPD: shape xi, scale sigma, threshold u; the location of the
    distribution coincides with the threshold, i.e. support [u, inf) for
    xi >= 0 and [u, u - sigma/xi] for xi < 0.
  * Out-of-support CDF arguments are clamped to 0/1 instead of raising, so
    optimizers may probe anywhere on the real line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GUMBEL_EPS",
    "GevParams",
    "GpdParams",
    "gev_cdf",
    "gev_quantile",
    "gev_logpdf",
    "gev_support",
    "gpd_cdf",
    "gpd_quantile",
    "gpd_logpdf",
    "gpd_support",
]

# Below this |xi| the limit forms are used; the power form (.)**(-1/xi)
# cancels catastrophically for smaller shapes.
GUMBEL_EPS = 1e-8


@dataclass(frozen=True)
class GevParams:
    """GEV parameters (shape, location, scale)."""

    xi: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not np.isfinite([self.xi, self.mu, self.sigma]).all():
            raise ValueError("GEV parameters must be finite")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def family(self) -> str:
        """Tail family implied by the shape: weibull / gumbel / frechet."""
        if self.xi < 0:
            return "weibull"
        if self.xi > 0:
            return "frechet"
        return "gumbel"


@dataclass(frozen=True)
class GpdParams:
    """GPD parameters (shape, scale) plus the exceedance threshold."""

    xi: float
    sigma: float
    u: float

    def __post_init__(self):
        if not np.isfinite([self.xi, self.sigma, self.u]).all():
            raise ValueError("GPD parameters must be finite")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


def _ret(values, scalar):
    return float(values) if scalar else values


def gev_support(p: GevParams) -> tuple[float, float]:
    """(lower, upper) endpoints of the GEV support."""
    if p.xi > GUMBEL_EPS:
        return (p.mu - p.sigma / p.xi, np.inf)
    if p.xi < -GUMBEL_EPS:
        return (-np.inf, p.mu - p.sigma / p.xi)
    return (-np.inf, np.inf)


def gpd_support(p: GpdParams) -> tuple[float, float]:
    """(lower, upper) endpoints of the GPD support."""
    if p.xi < -GUMBEL_EPS:
        return (p.u, p.u - p.sigma / p.xi)
    return (p.u, np.inf)


def gev_cdf(p: GevParams, z):
    """GEV distribution function G(z); 0/1 outside the support."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    t = (z - p.mu) / p.sigma
    if abs(p.xi) < GUMBEL_EPS:
        out = np.exp(-np.exp(-t))
        return _ret(out, scalar)
    arg = p.xi * t
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = arg > -1.0
        lb = np.where(inside, np.log1p(np.where(inside, arg, 0.0)), 0.0)
        out = np.where(inside, np.exp(-np.exp(-lb / p.xi)), 0.0 if p.xi > 0 else 1.0)
    return _ret(out, scalar)


def gev_quantile(p: GevParams, prob):
    """Inverse of :func:`gev_cdf` in closed form; prob must be in (0, 1)."""
    prob = np.asarray(prob, dtype=float)
    scalar = prob.ndim == 0
    if np.any(prob <= 0.0) or np.any(prob >= 1.0):
        raise ValueError("prob must lie strictly inside (0, 1)")
    w = np.log(-np.log(prob))
    if abs(p.xi) < GUMBEL_EPS:
        out = p.mu - p.sigma * w
    else:
        out = p.mu + p.sigma / p.xi * np.expm1(-p.xi * w)
    return _ret(out, scalar)


def gev_logpdf(p: GevParams, z):
    """log dG/dz; -inf outside the support."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    t = (z - p.mu) / p.sigma
    ls = np.log(p.sigma)
    if abs(p.xi) < GUMBEL_EPS:
        out = -ls - t - np.exp(-t)
        return _ret(out, scalar)
    arg = p.xi * t
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = arg > -1.0
        lb = np.log1p(np.where(inside, arg, 0.0))
        out = np.where(
            inside,
            -ls - (1.0 + 1.0 / p.xi) * lb - np.exp(-lb / p.xi),
            -np.inf,
        )
    return _ret(out, scalar)


def gpd_cdf(p: GpdParams, x):
    """GPD distribution function H(x); 0 at-or-below u, 1 above the endpoint."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    y = (x - p.u) / p.sigma
    below = y < 0.0
    if abs(p.xi) < GUMBEL_EPS:
        out = np.where(below, 0.0, -np.expm1(-np.where(below, 0.0, y)))
        return _ret(out, scalar)
    arg = p.xi * y
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = (~below) & (arg > -1.0)
        lb = np.log1p(np.where(inside, arg, 0.0))
        # xi < 0: anything past the upper endpoint has H = 1
        out = np.where(inside, -np.expm1(-lb / p.xi), np.where(below, 0.0, 1.0))
    return _ret(out, scalar)


def gpd_quantile(p: GpdParams, prob):
    """Inverse of :func:`gpd_cdf`; prob must be in (0, 1)."""
    prob = np.asarray(prob, dtype=float)
    scalar = prob.ndim == 0
    if np.any(prob <= 0.0) or np.any(prob >= 1.0):
        raise ValueError("prob must lie strictly inside (0, 1)")
    w = np.log1p(-prob)
    if abs(p.xi) < GUMBEL_EPS:
        out = p.u - p.sigma * w
    else:
        out = p.u + p.sigma / p.xi * np.expm1(-p.xi * w)
    return _ret(out, scalar)


def gpd_logpdf(p: GpdParams, x):
    """log dH/dx; -inf below u and past the upper endpoint."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    y = (x - p.u) / p.sigma
    ls = np.log(p.sigma)
    if abs(p.xi) < GUMBEL_EPS:
        out = np.where(y < 0.0, -np.inf, -ls - y)
        return _ret(out, scalar)
    arg = p.xi * y
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = (y >= 0.0) & (arg > -1.0)
        lb = np.log1p(np.where(inside, arg, 0.0))
        out = np.where(inside, -ls - (1.0 + 1.0 / p.xi) * lb, -np.inf)
    return _ret(out, scalar)
