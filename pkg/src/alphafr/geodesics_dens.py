"""Closed-form geodesics of the alpha-connections on positive densities.

In the chart ``f = (2/|1-alpha|) h**((1-alpha)/2)`` (``f = log h`` for
alpha = 1) the alpha-Fisher-Rao metric is the flat L2 metric, so geodesics
are straight lines pulled back to densities.

Parametrization convention: ``geodesic_dens(alpha, mu0, a, t)`` is the chart
line through ``h0**((1-alpha)/2)`` with slope ``h0**(-(1+alpha)/2) r``.  Its
initial velocity is ``2/(1-alpha) * a`` for alpha != 1 and ``a`` for
alpha = 1.  Use :func:`param_from_velocity` to start from a given velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeodesicEscape, OutOfChartError
from .grid import Density, Grid1D, Tangent, same_grid
from .metrics import power


def phi_alpha(alpha: float, mu: Density) -> np.ndarray:
    """Chart map: ``log h`` if alpha = 1, else ``2/|1-alpha| * h**((1-alpha)/2)``."""
    if alpha == 1:
        return np.log(mu.h)
    return 2.0 / abs(1.0 - alpha) * power(mu.h, (1.0 - alpha) / 2.0)


def phi_alpha_inv(alpha: float, f, grid: Grid1D) -> Density:
    """Inverse chart map; for alpha != 1 the argument must be positive."""
    f = np.asarray(f, dtype=float)
    if alpha == 1:
        return Density(grid, np.exp(f))
    if np.any(f <= 0):
        raise OutOfChartError("chart value must be positive for alpha != 1")
    return Density(grid, power(abs(1.0 - alpha) * f / 2.0, 2.0 / (1.0 - alpha)))


def blowup_time(alpha: float, mu0: Density, a: Tangent) -> float:
    """First time the forward geodesic leaves the positive densities.

    The chart line is ``h0**(-(1+alpha)/2) * (h0 + t r)``, so the exit time
    ``min h0/(-r)`` over nodes with ``r < 0`` does not depend on alpha.
    """
    same_grid(mu0, a)
    if alpha == 1:
        return math.inf
    neg = a.r < 0
    if not np.any(neg):
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.min(mu0.h[neg] / -a.r[neg]))


def _inner_line(mu0, a, t):
    inner = mu0.h + t * a.r
    if np.any(inner <= 0):
        raise GeodesicEscape(f"geodesic left the positive densities before t={t}",
                             blowup_time=None, escape_time=t)
    return inner


def geodesic_dens(alpha: float, mu0: Density, a: Tangent, t: float) -> Density:
    """Density at time ``t`` on the alpha-geodesic with chart slope from ``a``."""
    g = same_grid(mu0, a)
    if alpha == 1:
        return Density(g, mu0.h * np.exp(t * a.r / mu0.h))
    try:
        inner = _inner_line(mu0, a, t)
    except GeodesicEscape as exc:
        exc.blowup_time = blowup_time(alpha, mu0, a)
        raise
    if alpha == -1:
        return Density(g, inner)
    p = 2.0 / (1.0 - alpha)
    return Density(g, power(mu0.h, -(1.0 + alpha) / (1.0 - alpha)) * power(inner, p))


def geodesic_velocity(alpha: float, mu0: Density, a: Tangent, t: float) -> Tangent:
    """Exact time derivative of :func:`geodesic_dens`."""
    g = same_grid(mu0, a)
    h = geodesic_dens(alpha, mu0, a, t).h
    if alpha == 1:
        return Tangent(g, h * a.r / mu0.h)
    inner = mu0.h + t * a.r
    return Tangent(g, 2.0 / (1.0 - alpha) * h * a.r / inner)


def param_from_velocity(alpha: float, v: Tangent) -> Tangent:
    """Chart slope parameter whose geodesic starts with velocity ``v``."""
    if alpha == 1:
        return v
    return v * ((1.0 - alpha) / 2.0)


def log_map_dens(alpha: float, mu0: Density, mu1: Density) -> Tangent:
    """Parameter ``a`` with ``geodesic_dens(alpha, mu0, a, 1) == mu1``."""
    g = same_grid(mu0, mu1)
    h0, h1 = mu0.h, mu1.h
    if alpha == 1:
        return Tangent(g, h0 * np.log(h1 / h0))
    if alpha == -1:
        return Tangent(g, h1 - h0)
    e = (1.0 - alpha) / 2.0
    return Tangent(g, power(h0, (1.0 + alpha) / 2.0) * (power(h1, e) - power(h0, e)))


def geodesic_residual(alpha: float, mu0: Density, a: Tangent, t_grid, dt: float = 1e-3) -> float:
    """``max |h_tt - (1+alpha)/2 h_t^2/h|`` with fourth-order central differences in time.

    A small value certifies that the closed form solves the geodesic equation
    of the density alpha-connection.
    """
    worst = 0.0
    for t in np.atleast_1d(t_grid):
        hm2, hm, h0, hp, hp2 = (geodesic_dens(alpha, mu0, a, t + k * dt).h for k in (-2, -1, 0, 1, 2))
        h_t = (hm2 - 8 * hm + 8 * hp - hp2) / (12 * dt)
        h_tt = (-hm2 + 16 * hm - 30 * h0 + 16 * hp - hp2) / (12 * dt * dt)
        res = h_tt - (1.0 + alpha) / 2.0 * h_t ** 2 / h0
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def chart_affinity_deviation(alpha: float, mu0: Density, a: Tangent, t_grid) -> float:
    """Max deviation of the chart image of the geodesic from its end-point chord."""
    ts = np.asarray(t_grid, dtype=float)
    fs = np.array([phi_alpha(alpha, geodesic_dens(alpha, mu0, a, t)) for t in ts])
    s = (ts - ts[0]) / (ts[-1] - ts[0])
    chord = fs[0] + np.outer(s, fs[-1] - fs[0])
    return float(np.max(np.abs(fs - chord)))


@dataclass(frozen=True)
class DensGeodesic:
    """An alpha-geodesic on positive densities with its exit time."""

    alpha: float
    mu0: Density
    a: Tangent

    @property
    def blowup_time(self) -> float:
        return blowup_time(self.alpha, self.mu0, self.a)

    def at(self, t: float) -> Density:
        return geodesic_dens(self.alpha, self.mu0, self.a, t)

    def velocity(self, t: float) -> Tangent:
        return geodesic_velocity(self.alpha, self.mu0, self.a, t)

    def sample(self, ts):
        """``[(mu(t), mu_t(t))]`` for each ``t``; input to ``path_energy``."""
        return [(self.at(t), self.velocity(t)) for t in ts]
