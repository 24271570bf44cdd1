"""Shared test oracles: bisection inversion and quadrature, independent of
the closed forms they check."""

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import genextreme, genpareto

from evtcv import GevParams, GpdParams


def bisect_quantile(cdf, prob, lo, hi, tol=1e-12):
    """Invert a CDF by bracketing bisection (brentq)."""
    return brentq(lambda z: cdf(z) - prob, lo, hi, xtol=tol)


def integrate_density(logpdf, lo, hi):
    """Quadrature of exp(logpdf) over (lo, hi)."""
    value, _ = quad(lambda z: np.exp(logpdf(z)), lo, hi, limit=200)
    return value


def density_mass(params, logpdf):
    """Piecewise quadrature of exp(logpdf) over the whole support.

    Segment ends sit at scipy quantiles so the adaptive integrator never
    has to find a narrow peak inside a huge interval.
    """
    dist = scipy_equivalent(params)
    ladder = [1e-12, 1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 1 - 1e-3, 1 - 1e-6, 1 - 1e-12]
    knots = [float(dist.ppf(p)) for p in ladder]
    total = 0.0
    for lo, hi in zip(knots, knots[1:]):
        if hi > lo:
            total += integrate_density(logpdf, lo, hi)
    return total


def scipy_equivalent(params):
    """The matching scipy frozen distribution (note: scipy GEV flips xi)."""
    if isinstance(params, GevParams):
        return genextreme(c=-params.xi, loc=params.mu, scale=params.sigma)
    return genpareto(c=params.xi, loc=params.u, scale=params.sigma)


def random_gev_params(rng, xi_range=(-0.9, 0.9)):
    return GevParams(
        xi=float(rng.uniform(*xi_range)),
        mu=float(rng.uniform(-10.0, 10.0)),
        sigma=float(rng.uniform(0.1, 5.0)),
    )


def random_gpd_params(rng, xi_range=(-0.9, 0.9)):
    return GpdParams(
        xi=float(rng.uniform(*xi_range)),
        sigma=float(rng.uniform(0.1, 5.0)),
        u=float(rng.uniform(-10.0, 10.0)),
    )

