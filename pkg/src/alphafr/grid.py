"""Sample-space discretizations and the quadrature functional.

The reference density lambda never appears as an array: it is carried
entirely by the quadrature weights, so ``integrate(g, f)`` realizes the
integral of ``f * lambda``.  Densities and tangent vectors are stored as
Radon-Nikodym values on the nodes (``h = mu/lambda`` and ``r = a/lambda``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolation, DimensionError, DomainError

MASS_TOL = 1e-10
# slack for pinned values off the support window on line grids
DECAY_TOL = 1e-8


class GridKind(enum.Enum):
    PERIODIC = "periodic"
    LINE = "line"


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Nodes and positive quadrature weights on the circle or a truncated line.

    For ``LINE`` grids, ``L`` is the half-width of the computational domain and
    ``support`` the half-width of the window outside of which densities equal
    one and tangents vanish.
    """

    kind: GridKind
    nodes: np.ndarray
    weights: np.ndarray
    L: float = 0.5
    support: float = 0.5

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise DimensionError("nodes and weights must be 1-D arrays of equal length")
        if np.any(weights <= 0):
            raise ConfigurationError("quadrature weights must be positive")
        if np.any(np.diff(nodes) <= 0):
            raise ConfigurationError("nodes must be strictly increasing")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def dx(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def window(self) -> np.ndarray:
        """Boolean mask of nodes inside the support window (all nodes if periodic)."""
        if self.kind is GridKind.PERIODIC:
            return np.ones(self.n, dtype=bool)
        return np.abs(self.nodes) <= self.support

    def density(self, h) -> "Density":
        return Density(self, h)

    def tangent(self, r) -> "Tangent":
        return Tangent(self, r)

    def reference(self) -> "Density":
        """The reference density itself, ``h = 1``."""
        return Density(self, np.ones(self.n))


def make_periodic(n: int) -> Grid1D:
    """Uniform grid ``x_i = i/n`` on [0, 1) with weights ``1/n`` (trapezoid rule)."""
    if int(n) != n or n < 8:
        raise ConfigurationError(f"periodic grid needs n >= 8, got {n}")
    n = int(n)
    return Grid1D(GridKind.PERIODIC, np.arange(n) / n, np.full(n, 1.0 / n))


def make_line(n: int, L: float = 10.0, support: float = 4.0) -> Grid1D:
    """Uniform grid on [-L, L] with trapezoid weights (Lebesgue reference)."""
    if int(n) != n or n < 16:
        raise ConfigurationError(f"line grid needs n >= 16, got {n}")
    if not (L > 0 and 0 < support < L):
        raise ConfigurationError("line grid needs 0 < support < L")
    nodes = np.linspace(-L, L, int(n))
    dx = nodes[1] - nodes[0]
    weights = np.full(int(n), dx)
    weights[0] = weights[-1] = dx / 2
    return Grid1D(GridKind.LINE, nodes, weights, L=float(L), support=float(support))


def grid_from_config(cfg: dict) -> Grid1D:
    """Build a grid from ``{"kind": "periodic", "n": 128}`` or
    ``{"kind": "line", "n": 512, "L": 10.0, "support": 4.0}``."""
    try:
        kind = cfg["kind"]
        n = cfg["n"]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"grid config needs 'kind' and 'n': {cfg!r}") from exc
    if kind == "periodic":
        return make_periodic(n)
    if kind == "line":
        return make_line(n, float(cfg.get("L", 10.0)), float(cfg.get("support", 4.0)))
    raise ConfigurationError(f"unknown grid kind {kind!r}")


def integrate(g: Grid1D, f) -> float:
    """Quadrature ``sum_i w_i f_i`` of nodal values against the reference density."""
    f = np.asarray(f, dtype=float)
    if f.shape != (g.n,):
        raise DimensionError(f"expected {g.n} nodal values, got shape {f.shape}")
    return float(np.dot(g.weights, f))


@dataclass(frozen=True, eq=False)
class Density:
    """A positive density, stored as ``h = mu/lambda`` on the grid nodes."""

    grid: Grid1D
    h: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.shape != (self.grid.n,):
            raise DimensionError(f"density needs {self.grid.n} values, got {h.shape}")
        if not np.all(np.isfinite(h)) or np.any(h <= 0):
            raise DomainError("density values must be finite and positive")
        g = self.grid
        if g.kind is GridKind.LINE and np.any(np.abs(h[~g.window] - 1.0) > DECAY_TOL):
            raise DomainError("line density must equal 1 outside the support window")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    def mass(self) -> float:
        return integrate(self.grid, self.h)

    def is_prob(self, tol: float = MASS_TOL) -> bool:
        return abs(self.mass() - 1.0) <= tol

    def normalized(self) -> "Density":
        return Density(self.grid, self.h / self.mass())


@dataclass(frozen=True, eq=False)
class Tangent:
    """A tangent vector, stored as ``r = a/lambda`` on the grid nodes."""

    grid: Grid1D
    r: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.shape != (self.grid.n,):
            raise DimensionError(f"tangent needs {self.grid.n} values, got {r.shape}")
        if not np.all(np.isfinite(r)):
            raise DomainError("tangent values must be finite")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    def mean(self) -> float:
        return integrate(self.grid, self.r)

    def is_prob_tangent(self, tol: float = MASS_TOL) -> bool:
        return abs(self.mean()) <= tol

    def __add__(self, other: "Tangent") -> "Tangent":
        same_grid(self, other)
        return Tangent(self.grid, self.r + other.r)

    def __sub__(self, other: "Tangent") -> "Tangent":
        same_grid(self, other)
        return Tangent(self.grid, self.r - other.r)

    def __mul__(self, s: float) -> "Tangent":
        return Tangent(self.grid, float(s) * self.r)

    __rmul__ = __mul__

    def __neg__(self) -> "Tangent":
        return Tangent(self.grid, -self.r)


def same_grid(*objs) -> Grid1D:
    """Return the common grid of densities/tangents, raising on mismatch."""
    g = objs[0].grid
    for o in objs[1:]:
        if o.grid is not g:
            if o.grid.n != g.n or not np.array_equal(o.grid.weights, g.weights):
                raise DimensionError("objects live on different grids")
    return g


def shift(mu: Density, a: Tangent, eps: float) -> Density:
    """The density ``mu + eps*a`` (used by finite-difference oracles)."""
    same_grid(mu, a)
    return Density(mu.grid, mu.h + eps * a.r)


def require_prob(mu: Density, tol: float = MASS_TOL) -> None:
    if not mu.is_prob(tol):
        raise ContractViolation(f"not a probability density (mass {mu.mass():.16g})")


def require_prob_tangent(*tangents: Tangent, tol: float = MASS_TOL) -> None:
    for a in tangents:
        if not a.is_prob_tangent(tol):
            raise ContractViolation(f"tangent does not integrate to zero (mean {a.mean():.3g})")
