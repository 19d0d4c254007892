"""Geodesics of the alpha-connections on probability densities.

For alpha != 1 the chart ``f = 2/|1-alpha| h**((1-alpha)/2)`` maps probability
densities onto the hypersurface

    S = { f > 0 : int f**(2/(1-alpha)) = (2/|1-alpha|)**(2/(1-alpha)) }.

Geodesics are radial projections of straight lines ``f + tau(t) xi`` onto S,
where ``tau`` solves a scalar second-order ODE.  For alpha = 1 the centred log
chart is linear and geodesics are chords in it.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigurationError, ConvexityViolation, GeodesicEscape
from .grid import (Density, Grid1D, GridKind, Tangent, integrate, require_prob,
                   require_prob_tangent, same_grid)
from .metrics import power

SURFACE_TOL = 1e-7
POSITIVITY_FLOOR = 1e-12


def _require_not_one(alpha):
    if alpha == 1:
        raise ConfigurationError("alpha = 1 uses the centred log chart (geodesic_prob_alpha1)")


def surface_level(alpha: float) -> float:
    """Value of ``int f**(2/(1-alpha))`` on the surface."""
    return (2.0 / abs(1.0 - alpha)) ** (2.0 / (1.0 - alpha))


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    alpha: float
    grid: Grid1D
    f: np.ndarray = field(repr=False)

    def constraint_residual(self) -> float:
        """Relative violation of the surface integral constraint."""
        lvl = surface_level(self.alpha)
        val = integrate(self.grid, power(self.f, 2.0 / (1.0 - self.alpha)))
        return abs(val - lvl) / lvl

    def on_surface(self, tol: float = SURFACE_TOL) -> bool:
        return self.constraint_residual() <= tol


def to_surface(alpha: float, mu: Density) -> SurfacePoint:
    _require_not_one(alpha)
    require_prob(mu)
    f = 2.0 / abs(1.0 - alpha) * power(mu.h, (1.0 - alpha) / 2.0)
    return SurfacePoint(alpha, mu.grid, f)


def from_surface(p: SurfacePoint) -> Density:
    _require_not_one(p.alpha)
    return Density(p.grid, power(abs(1.0 - p.alpha) * p.f / 2.0, 2.0 / (1.0 - p.alpha)))


def chart_differential(alpha: float, mu: Density, a: Tangent) -> np.ndarray:
    """``xi = sgn(1-alpha) h**(-(1+alpha)/2) r``, the chart image of a tangent."""
    _require_not_one(alpha)
    same_grid(mu, a)
    return np.sign(1.0 - alpha) * power(mu.h, -(1.0 + alpha) / 2.0) * a.r


def radial_projection(alpha: float, p: SurfacePoint, xi) -> np.ndarray:
    """Projection onto the tangent space of S along ``span{f}``."""
    _require_not_one(alpha)
    xi = np.asarray(xi, dtype=float)
    q = (1.0 + alpha) / (1.0 - alpha)
    coef = (abs(1.0 - alpha) / 2.0) ** (2.0 / (1.0 - alpha))
    return xi - coef * integrate(p.grid, power(p.f, q) * xi) * p.f


def tangency_residual(alpha: float, p: SurfacePoint, xi) -> float:
    """``int f**((1+alpha)/(1-alpha)) xi``, zero for vectors tangent to S."""
    q = (1.0 + alpha) / (1.0 - alpha)
    return integrate(p.grid, power(p.f, q) * np.asarray(xi, dtype=float))


class Terminal(enum.Enum):
    REACHED_TAU_TARGET = "ReachedTauTarget"
    POSITIVITY_LOSS = "PositivityLoss"
    TAU_BLOWUP = "TauBlowup"
    MAX_TIME = "MaxTime"


@dataclass(frozen=True)
class TauControls:
    """Integration controls for the tau ODE.

    ``tau_target`` stops integration when tau first reaches it (``None``
    disables the event); ``max_time`` bounds the parameter interval.
    """

    tau_target: float | None = None
    max_time: float = 10.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    overflow: float = 1e12
    method: str = "DOP853"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigurationError("solver tolerances must be positive")
        if not self.max_time > 0:
            raise ConfigurationError("max_time must be positive")
        if not self.overflow > 1:
            raise ConfigurationError("overflow guard must exceed 1")


@dataclass
class TauSolution:
    t_samples: np.ndarray
    tau: np.ndarray
    tau_dot: np.ndarray
    terminal: Terminal
    t_end: float
    dense: object = field(default=None, repr=False)
    wall_time: float = 0.0

    def evaluate(self, t):
        """``(tau(t), tau_dot(t))`` from the dense interpolant, ``0 <= t <= t_end``."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.t_end * (1 + 1e-14) + 1e-300):
            raise GeodesicEscape(f"requested time outside [0, {self.t_end}]",
                                 terminal=self.terminal.value)
        y = self.dense(np.clip(t, 0.0, self.t_end))
        return y[0], y[1]


def _forcing(grid: Grid1D, alpha: float, f: np.ndarray, xi: np.ndarray, tau: float) -> float:
    """``2 * int base**q xi / int base**(q+1)`` with ``base = f + tau xi``."""
    base = f + tau * xi
    s = np.max(base)
    if not s > 0:
        return math.nan
    # floored past the positivity boundary so that the step crossing it is
    # accepted and the event can be located from the dense output
    base = np.maximum(base, POSITIVITY_FLOOR * s)
    q = (1.0 + alpha) / (1.0 - alpha)
    b = base / s
    bq = power(b, q)
    num = integrate(grid, bq * xi)
    den = integrate(grid, bq * b)
    return 2.0 * num / (den * s)


def tau_ivp(alpha: float, p: SurfacePoint, xi, controls: TauControls | None = None,
            t_eval=None) -> TauSolution:
    """Integrate ``tau'' = forcing(tau) tau'^2`` from ``(tau, tau') = (0, 1)``.

    Stops at the first of: tau reaching ``controls.tau_target``, loss of
    positivity of ``f + tau xi``, tau or tau' exceeding the overflow guard, or
    ``t = controls.max_time``.
    """
    _require_not_one(alpha)
    controls = controls or TauControls()
    xi = np.asarray(xi, dtype=float)
    f = p.f
    grid = p.grid

    def rhs(t, y):
        return [y[1], _forcing(grid, alpha, f, xi, y[0]) * y[1] ** 2]

    events = []

    def positivity(t, y):
        return float(np.min(f + y[0] * xi))
    positivity.terminal = True
    positivity.direction = -1
    events.append(positivity)

    def tau_over(t, y):
        return controls.overflow - y[0]
    tau_over.terminal = True
    events.append(tau_over)

    def dot_over(t, y):
        return controls.overflow - y[1]
    dot_over.terminal = True
    events.append(dot_over)

    if controls.tau_target is not None:
        def target(t, y):
            return y[0] - controls.tau_target
        target.terminal = True
        target.direction = 1
        events.append(target)

    start = time.perf_counter()
    sol = solve_ivp(rhs, (0.0, controls.max_time), [0.0, 1.0], method=controls.method,
                    rtol=controls.rel_tol, atol=controls.abs_tol, events=events,
                    dense_output=True, t_eval=t_eval)
    wall = time.perf_counter() - start
    if sol.status == -1:
        raise GeodesicEscape(f"tau integration failed: {sol.message}",
                             terminal=Terminal.TAU_BLOWUP.value)

    terminal = Terminal.MAX_TIME
    t_end = float(sol.t[-1]) if t_eval is None else controls.max_time
    hits = [(te[0], i) for i, te in enumerate(sol.t_events) if len(te)]
    if hits:
        t_hit, idx = min(hits)
        t_end = float(t_hit)
        terminal = [Terminal.POSITIVITY_LOSS, Terminal.TAU_BLOWUP, Terminal.TAU_BLOWUP,
                    Terminal.REACHED_TAU_TARGET][idx]
    elif sol.status == 0:
        t_end = float(sol.t[-1]) if t_eval is None else controls.max_time
    return TauSolution(np.asarray(sol.t), np.asarray(sol.y[0]), np.asarray(sol.y[1]),
                       terminal, t_end, sol.sol, wall)


def tau_first_integral(alpha: float, p: SurfacePoint, xi, tau) -> np.ndarray:
    """``(D(tau)/D(0))**(1-alpha)`` with ``D(tau) = int (f + tau xi)**(2/(1-alpha))``.

    Along any solution of the tau ODE, ``tau'`` equals this quantity, which
    gives an integrator-free check of the ODE solution.
    """
    xi = np.asarray(xi, dtype=float)
    e = 2.0 / (1.0 - alpha)
    d0 = integrate(p.grid, power(p.f, e))
    out = [(integrate(p.grid, power(p.f + t * xi, e)) / d0) ** (1.0 - alpha)
           for t in np.atleast_1d(tau)]
    return np.array(out)


def travel_time_quadrature(alpha: float, p: SurfacePoint, xi, tau_end: float = 1.0,
                           nodes: int = 64) -> float:
    """``int_0^tau_end dtau / tau'(tau)`` by Gauss-Legendre quadrature of the first integral."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * tau_end * (x + 1.0)
    return float(0.5 * tau_end * np.dot(w, 1.0 / tau_first_integral(alpha, p, xi, s)))


def surface_curve(alpha: float, p: SurfacePoint, xi, tau) -> np.ndarray:
    """``gamma = 2/|1-alpha| (f + tau xi) / D(tau)**((1-alpha)/2)``; one row per tau."""
    xi = np.asarray(xi, dtype=float)
    e = 2.0 / (1.0 - alpha)
    rows = []
    for t in np.atleast_1d(tau):
        base = p.f + t * xi
        if not np.all(base > 0):
            raise GeodesicEscape("line left the positive cone", terminal=Terminal.POSITIVITY_LOSS.value)
        d = integrate(p.grid, power(base, e))
        rows.append(2.0 / abs(1.0 - alpha) * base / d ** ((1.0 - alpha) / 2.0))
    return np.array(rows)


@dataclass
class ProbGeodesic:
    """A solved alpha-geodesic on probability densities (alpha != 1)."""

    alpha: float
    point: SurfacePoint
    xi: np.ndarray
    solution: TauSolution

    def chart_at(self, t) -> np.ndarray:
        tau, _ = self.solution.evaluate(t)
        return surface_curve(self.alpha, self.point, self.xi, tau)

    def at(self, t: float) -> Density:
        if t > self.solution.t_end:
            raise GeodesicEscape(f"t={t} beyond the solution interval [0, {self.solution.t_end}]",
                                 terminal=self.solution.terminal.value, escape_time=t)
        return from_surface(SurfacePoint(self.alpha, self.point.grid, self.chart_at(t)[0]))


def solve_prob_geodesic(alpha: float, mu0: Density, a: Tangent,
                        controls: TauControls | None = None) -> ProbGeodesic:
    """Initial-value geodesic from ``mu0`` with velocity ``a``."""
    _require_not_one(alpha)
    same_grid(mu0, a)
    require_prob(mu0)
    require_prob_tangent(a)
    p = to_surface(alpha, mu0)
    xi = chart_differential(alpha, mu0, a)
    if not np.any(xi):
        # zero velocity: the constant curve, valid for all time
        controls = controls or TauControls()
        sol = TauSolution(np.array([0.0, controls.max_time]), np.zeros(2), np.ones(2),
                          Terminal.MAX_TIME, controls.max_time,
                          lambda t: np.vstack([np.zeros_like(t), np.ones_like(t)]))
        return ProbGeodesic(alpha, p, xi, sol)
    return ProbGeodesic(alpha, p, xi, tau_ivp(alpha, p, xi, controls))


def geodesic_prob_ivp(alpha: float, mu0: Density, a: Tangent, t: float,
                      controls: TauControls | None = None) -> Density:
    """Density at time ``t`` on the geodesic with ``mu(0) = mu0``, ``mu'(0) = a``."""
    if t < 0:
        raise ConfigurationError("only forward times are supported")
    ctl = controls or TauControls(max_time=max(float(t) * 1.01, 1e-12))
    return solve_prob_geodesic(alpha, mu0, a, ctl).at(t)


def geodesic_prob_bvp(alpha: float, mu0: Density, mu1: Density, samples: int = 33,
                      controls: TauControls | None = None) -> Tuple[List[Density], float]:
    """Geodesic from ``mu0`` to ``mu1``; returns the sampled path and the time T
    at which it arrives (``tau(T) = 1``)."""
    _require_not_one(alpha)
    g = same_grid(mu0, mu1)
    if g.kind is not GridKind.PERIODIC:
        raise ConfigurationError("boundary-value solves are only offered on periodic grids")
    require_prob(mu0)
    require_prob(mu1)
    p = to_surface(alpha, mu0)
    pbar = to_surface(alpha, mu1)
    xi = pbar.f - p.f
    if np.max(np.abs(xi)) == 0:
        return [mu0] * samples, 0.0
    base = controls or TauControls()
    ctl = TauControls(tau_target=1.0, max_time=max(base.max_time, 1e3), rel_tol=base.rel_tol,
                      abs_tol=base.abs_tol, overflow=base.overflow, method=base.method)
    sol = tau_ivp(alpha, p, xi, ctl)
    if sol.terminal is not Terminal.REACHED_TAU_TARGET:
        raise ConvexityViolation(f"tau stopped with {sol.terminal.value} before reaching 1 "
                                 f"(t_end={sol.t_end})")
    T = sol.t_end
    ts = np.linspace(0.0, T, samples)
    tau, _ = sol.evaluate(ts)
    gam = surface_curve(alpha, p, xi, tau)
    path = [from_surface(SurfacePoint(alpha, g, row)) for row in gam]
    return path, T


def planarity_residual(alpha: float, p: SurfacePoint, xi, gamma_rows) -> float:
    """Max relative least-squares residual of each row against ``span{f, xi}``."""
    basis = np.column_stack([p.f, np.asarray(xi, dtype=float)])
    worst = 0.0
    for row in np.atleast_2d(gamma_rows):
        coef, *_ = np.linalg.lstsq(basis, row, rcond=None)
        worst = max(worst, float(np.max(np.abs(basis @ coef - row)) / np.max(np.abs(row))))
    return worst


def centered_log_chart(mu: Density) -> np.ndarray:
    """``log h - int log h``, a linear chart for the exponential connection."""
    lg = np.log(mu.h)
    return lg - integrate(mu.grid, lg) / np.sum(mu.grid.weights)


def geodesic_prob_alpha1(mu0: Density, mu1: Density, t: float) -> Density:
    """alpha = 1 geodesic through ``mu0`` (t=0) and ``mu1`` (t=1); defined for all real t."""
    g = same_grid(mu0, mu1)
    require_prob(mu0)
    require_prob(mu1)
    line = (1.0 - t) * centered_log_chart(mu0) + t * centered_log_chart(mu1)
    e = np.exp(line - np.max(line))
    return Density(g, e / integrate(g, e))


def geodesic_prob_alpha1_ivp(mu0: Density, a: Tangent, t: float) -> Density:
    """alpha = 1 geodesic with ``mu(0) = mu0`` and ``mu'(0) = a``: the line through
    the centred log chart of ``mu0`` with slope ``a/mu0`` (already zero-mean)."""
    g = same_grid(mu0, a)
    require_prob(mu0)
    require_prob_tangent(a)
    s = a.r / mu0.h
    line = centered_log_chart(mu0) + t * (s - integrate(g, s) / np.sum(g.weights))
    e = np.exp(line - np.max(line))
    return Density(g, e / integrate(g, e))


def prob_geodesic_residual(alpha: float, path_fn, t_grid, dt: float = 1e-3) -> float:
    """``max |h_tt + Gamma_prob(h_t, h_t)|`` by central differences in time, where
    ``path_fn(t)`` returns the density at time t."""
    worst = 0.0
    for t in np.atleast_1d(t_grid):
        hm = path_fn(t - dt).h
        h0 = path_fn(t).h
        hp = path_fn(t + dt).h
        grid = path_fn(t).grid
        h_t = (hp - hm) / (2 * dt)
        h_tt = (hp - 2 * h0 + hm) / (dt * dt)
        g_tt = integrate(grid, h_t * h_t / h0)
        res = h_tt - (1.0 + alpha) / 2.0 * (h_t ** 2 / h0 - g_tt * h0)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst
