"""Diffeomorphisms of the line, the alpha-H1 metric and generalized
Proudman-Johnson (gPJ) flows.

The map ``Theta(phi) = phi_x`` (the Jacobian density, i.e. the pullback of
the reference measure) carries the alpha-H1 metric on diffeomorphisms to the
alpha-Fisher-Rao metric on densities.  gPJ solutions are therefore obtained
by transporting closed-form density geodesics back through Theta and passing
to the Eulerian velocity ``u = phi_t o phi^{-1}``.

Away from the support window a diffeomorphism equals the identity on the left
and a translation on the right; velocities vanish on the left and are
constant on the right.  The right-hand constant is zero exactly when the
density keeps its mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import ConfigurationError, ContractViolation, DimensionError, GeodesicEscape
from .geodesics_dens import blowup_time, geodesic_dens, geodesic_velocity, param_from_velocity
from .grid import Density, Grid1D, GridKind, Tangent, integrate
from .metrics import power

SPLINE_DEGREE = 7
MASS_TOL = 1e-8


def _require_line(grid: Grid1D):
    if grid.kind is not GridKind.LINE:
        raise ConfigurationError("diffeomorphisms of the line need a LINE grid")


def d1(f, dx):
    """Fourth-order central first derivative; edges padded with end values."""
    p = np.pad(np.asarray(f, dtype=float), 2, mode="edge")
    return (p[:-4] - 8 * p[1:-3] + 8 * p[3:-1] - p[4:]) / (12 * dx)


def d2(f, dx):
    """Fourth-order central second derivative."""
    p = np.pad(np.asarray(f, dtype=float), 2, mode="edge")
    return (-p[:-4] + 16 * p[1:-3] - 30 * p[2:-2] + 16 * p[3:-1] - p[4:]) / (12 * dx * dx)


def d3(f, dx):
    """Fourth-order central third derivative (seven-point stencil)."""
    p = np.pad(np.asarray(f, dtype=float), 3, mode="edge")
    n = p.size - 6
    c = (1 / 8, -1.0, 13 / 8, 0.0, -13 / 8, 1.0, -1 / 8)
    out = np.zeros(n)
    for k, ck in enumerate(c):
        if ck:
            out += ck * p[k:k + n]
    return out / dx ** 3


def _cumulative(x, g):
    """``int_{x_0}^{x} g`` at the nodes via a high-degree interpolating spline."""
    anti = make_interp_spline(x, g, k=SPLINE_DEGREE).antiderivative()
    return anti(x) - anti(x[0])


def _cumulative_positive(x, h, points: int = 6):
    """``int_{x_0}^{x} h`` for positive ``h``, with a positive integrand by construction.

    ``log h`` is interpolated by a spline and ``exp`` of it integrated cell by
    cell with Gauss-Legendre, so the result is strictly increasing even when
    ``h`` spans many orders of magnitude.
    """
    s = make_interp_spline(x, np.log(h), k=SPLINE_DEGREE)
    gx, gw = np.polynomial.legendre.leggauss(points)
    left, width = x[:-1], np.diff(x)
    pts = left[:, None] + 0.5 * width[:, None] * (gx[None, :] + 1.0)
    cells = 0.5 * width * (np.exp(s(pts)) @ gw)
    return np.concatenate([[0.0], np.cumsum(cells)])


@dataclass(frozen=True, eq=False)
class Diffeo1D:
    grid: Grid1D
    phi: np.ndarray = field(repr=False)
    dphi: np.ndarray = field(repr=False)

    def __post_init__(self):
        _require_line(self.grid)
        phi = np.asarray(self.phi, dtype=float)
        dphi = np.asarray(self.dphi, dtype=float)
        if phi.shape != (self.grid.n,) or dphi.shape != (self.grid.n,):
            raise DimensionError("phi and dphi must match the grid")
        if not np.all(dphi > 0):
            raise ContractViolation("phi_x must be positive")
        if not np.all(np.diff(phi) > 0):
            raise ContractViolation("phi must be strictly increasing")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "dphi", dphi)

    @classmethod
    def identity(cls, grid: Grid1D) -> "Diffeo1D":
        return cls(grid, grid.nodes.copy(), np.ones(grid.n))

    @classmethod
    def from_phi(cls, grid: Grid1D, phi) -> "Diffeo1D":
        """Diffeomorphism from nodal values; ``phi_x`` from a spline derivative."""
        phi = np.asarray(phi, dtype=float)
        dphi = make_interp_spline(grid.nodes, phi, k=SPLINE_DEGREE).derivative()(grid.nodes)
        return cls(grid, phi, dphi)

    def left_defect(self) -> float:
        """``max |phi - x|`` left of the support window."""
        left = self.grid.nodes < -self.grid.support
        return float(np.max(np.abs(self.phi[left] - self.grid.nodes[left]), initial=0.0))

    def right_shift(self) -> float:
        """Translation ``phi(x) - x`` at the right end of the domain."""
        return float(self.phi[-1] - self.grid.nodes[-1])

    def inverse_at(self, x) -> np.ndarray:
        """``phi^{-1}(x)`` by spline interpolation of the swapped graph."""
        return make_interp_spline(self.phi, self.grid.nodes, k=SPLINE_DEGREE)(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class VelocityField:
    grid: Grid1D
    u: np.ndarray = field(repr=False)
    t: float = 0.0

    def __post_init__(self):
        _require_line(self.grid)
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.grid.n,):
            raise DimensionError("velocity must match the grid")
        object.__setattr__(self, "u", u)

    def left_defect(self) -> float:
        left = self.grid.nodes < -self.grid.support
        return float(np.max(np.abs(self.u[left]), initial=0.0))


def theta_map(phi: Diffeo1D) -> Density:
    """Jacobian density ``h = phi_x``."""
    return Density(phi.grid, phi.dphi)


def dtheta(phi: Diffeo1D, U, eps: float = 1e-3) -> Tangent:
    """Differential of Theta at ``phi`` along ``U`` by central differences along
    the path ``phi + s U`` (derivatives in x from splines)."""
    U = np.asarray(U, dtype=float)
    plus = Diffeo1D.from_phi(phi.grid, phi.phi + eps * U)
    minus = Diffeo1D.from_phi(phi.grid, phi.phi - eps * U)
    return Tangent(phi.grid, (theta_map(plus).h - theta_map(minus).h) / (2 * eps))


def theta_inverse(mu: Density, strict: bool = True) -> Diffeo1D:
    """Diffeomorphism ``phi(x) = x + int_{-inf}^x (h - 1)`` with ``phi_x = h``.

    With ``strict`` the density must carry the reference mass on the window,
    so that ``phi`` is the identity outside it.
    """
    g = mu.grid
    _require_line(g)
    excess = mu.h - 1.0
    if strict and abs(integrate(g, excess)) > MASS_TOL:
        raise ContractViolation(f"mass mismatch {integrate(g, excess):.3e} on the window")
    phi = g.nodes[0] + _cumulative_positive(g.nodes, mu.h)
    if not np.all(np.diff(phi) > 0):
        raise ContractViolation("reconstructed phi is not monotone")
    return Diffeo1D(g, phi, mu.h.copy())


def change_of_variables_residual(phi: Diffeo1D, fn) -> float:
    """``|int fn(phi(y)) phi_y dy - int_{phi(a)}^{phi(b)} fn(x) dx|``."""
    g = phi.grid
    lhs = integrate(g, fn(phi.phi) * phi.dphi)
    xs = np.linspace(phi.phi[0], phi.phi[-1], 4 * g.n + 1)
    vals = fn(xs)
    rhs = float(np.sum((vals[1:] + vals[:-1]) * np.diff(xs)) / 2)
    return abs(lhs - rhs)


def alpha_h1_inner(alpha: float, phi: Diffeo1D, U, V) -> float:
    """``int phi_x**(-alpha-1) U_x V_x`` with ``U = u o phi``, ``V = v o phi``."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    g = phi.grid
    if U.shape != (g.n,) or V.shape != (g.n,):
        raise DimensionError("U and V must be sampled on the diffeomorphism grid")
    return integrate(g, power(phi.dphi, -alpha - 1.0) * d1(U, g.dx) * d1(V, g.dx))


def gpj_blowup_time(alpha: float, u0: VelocityField) -> float:
    """Density-side exit time of the geodesic that realizes the flow from ``u0``."""
    return blowup_time(alpha, u0.grid.reference(), _chart_param(alpha, u0))


def _chart_param(alpha, u0):
    g = u0.grid
    a = Tangent(g, make_interp_spline(g.nodes, u0.u, k=SPLINE_DEGREE).derivative()(g.nodes))
    return param_from_velocity(alpha, a)


@dataclass
class GPJTrajectory:
    alpha: float
    times: np.ndarray
    fields: List[VelocityField]
    flows: List[Diffeo1D]
    blowup_time: float


def gpj_solve(alpha: float, u0: VelocityField, t_grid: Sequence[float],
              keep_flows: bool = False):
    """Eulerian velocities of the gPJ flow with initial data ``u0`` at each time.

    Raises :class:`GeodesicEscape` (with the blowup time attached) when a
    requested time is at or beyond the density-side exit time.
    """
    g = u0.grid
    ts = np.asarray(t_grid, dtype=float)
    if np.any(ts < 0):
        raise ConfigurationError("times must be non-negative")
    mu0 = g.reference()
    r = _chart_param(alpha, u0)
    T = blowup_time(alpha, mu0, r)
    x = g.nodes
    out, flows = [], []
    for t in ts:
        if t >= T:
            raise GeodesicEscape(f"gPJ solution breaks down at t={T:.17g}", blowup_time=T,
                                 escape_time=float(t))
        h = geodesic_dens(alpha, mu0, r, t).h
        h_t = geodesic_velocity(alpha, mu0, r, t).r
        try:
            phi = theta_inverse(Density(g, h), strict=False)
        except ContractViolation as exc:
            # h below float resolution of phi: the grid can no longer carry the flow
            raise GeodesicEscape(f"flow unresolved at t={t:.17g} (blowup at {T:.17g})",
                                 blowup_time=T, escape_time=float(t)) from exc
        phi_t = _cumulative(x, h_t)
        u = make_interp_spline(phi.phi, phi_t, k=SPLINE_DEGREE)(x)
        out.append(VelocityField(g, u, float(t)))
        if keep_flows:
            flows.append(phi)
    if keep_flows:
        return GPJTrajectory(alpha, ts, out, flows, T)
    return out


def gpj_residual(alpha: float, u_traj: Sequence[VelocityField], t_grid, margin: int = 2) -> float:
    """Max of ``|u_txx + (2-alpha) u_x u_xx + u u_xxx|`` over interior times and
    nodes within the support window less ``margin`` cells."""
    ts = np.asarray(t_grid, dtype=float)
    if len(u_traj) < 3 or ts.size != len(u_traj):
        raise ConfigurationError("need at least three time samples matching the trajectory")
    dts = np.diff(ts)
    dt = dts[0]
    if not np.allclose(dts, dt, rtol=1e-9, atol=0):
        raise ConfigurationError("time samples must be uniform")
    g = u_traj[0].grid
    dx = g.dx
    mask = np.abs(g.nodes) <= g.support - margin * dx
    if not np.any(mask):
        return 0.0
    U = np.array([f.u for f in u_traj])
    worst = 0.0
    uxx_prev = d2(U[0], dx)
    uxx_cur = d2(U[1], dx)
    for k in range(1, len(u_traj) - 1):
        uxx_next = d2(U[k + 1], dx)
        u = U[k]
        res = ((uxx_next - uxx_prev) / (2 * dt) + (2 - alpha) * d1(u, dx) * uxx_cur
               + u * d3(u, dx))
        worst = max(worst, float(np.max(np.abs(res[mask]))))
        uxx_prev, uxx_cur = uxx_cur, uxx_next
    return worst


def blowup_table(alphas: Sequence[float], u0: VelocityField):
    """``[(alpha, T_blowup)]`` with ``math.inf`` for global solutions."""
    return [(float(a), gpj_blowup_time(a, u0)) for a in alphas]
