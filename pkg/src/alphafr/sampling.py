"""Seeded generators of smooth random densities and tangent vectors."""

from __future__ import annotations

import numpy as np

from .grid import Density, Grid1D, GridKind, Tangent


def bump(x, width):
    """C-infinity bump equal to 1 at 0 and vanishing for ``|x| >= width``."""
    x = np.asarray(x, dtype=float)
    s = x / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def _trig_field(grid: Grid1D, rng: np.random.Generator, modes: int) -> np.ndarray:
    x = grid.nodes
    if grid.kind is GridKind.PERIODIC:
        k = np.arange(1, modes + 1)
        phase = 2 * np.pi * np.outer(x, k)
        c = rng.normal(size=modes) / k
        s = rng.normal(size=modes) / k
        return np.cos(phase) @ c + np.sin(phase) @ s
    # line: smooth oscillation damped to the support window
    w = grid.support
    k = np.arange(1, modes + 1)
    phase = np.pi * np.outer(x / w, k)
    c = rng.normal(size=modes) / k
    s = rng.normal(size=modes) / k
    return (np.cos(phase) @ c + np.sin(phase) @ s) * bump(x, w)


def random_density(grid: Grid1D, rng: np.random.Generator, amplitude: float = 0.3,
                   modes: int = 4, prob: bool = True) -> Density:
    """``1 + perturbation`` with ``max|perturbation| = amplitude`` (< 1 keeps it positive)."""
    p = _trig_field(grid, rng, modes)
    p *= amplitude / np.max(np.abs(p))
    mu = Density(grid, 1.0 + p)
    if prob and grid.kind is GridKind.PERIODIC:
        mu = mu.normalized()
    return mu


def random_tangent(grid: Grid1D, rng: np.random.Generator, scale: float = 1.0,
                   modes: int = 4, prob: bool = False) -> Tangent:
    """Smooth tangent with sup-norm ``scale``; ``prob=True`` removes the mean
    (periodic grids only, since a constant shift would break decay on a line)."""
    r = _trig_field(grid, rng, modes)
    r *= scale / np.max(np.abs(r))
    if prob and grid.kind is GridKind.PERIODIC:
        r = r - np.dot(grid.weights, r) / np.sum(grid.weights)
    return Tangent(grid, r)


def random_prob_pair(grid: Grid1D, rng: np.random.Generator, amplitude: float = 0.4,
                     modes: int = 4):
    """Two independent random probability densities."""
    return (random_density(grid, rng, amplitude, modes),
            random_density(grid, rng, amplitude, modes))
