"""Inner products on densities: Fisher-Rao, alpha-Fisher-Rao, the alpha = 1
variant on probability densities, the alpha-divergence and path energies."""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import ContractViolation, DomainError
from .grid import Density, Tangent, integrate, require_prob, require_prob_tangent, same_grid

H_FLOOR = 1e-300


def power(h: np.ndarray, exponent: float) -> np.ndarray:
    """``h**exponent`` evaluated as ``exp(exponent*log h)`` with a floor check."""
    h = np.asarray(h, dtype=float)
    if np.any(h < H_FLOOR):
        raise DomainError("density value below floor in power evaluation")
    return np.exp(exponent * np.log(h))


def fr_inner(mu: Density, a: Tangent, b: Tangent) -> float:
    """Fisher-Rao metric ``sum w r_a r_b / h``."""
    g = same_grid(mu, a, b)
    return integrate(g, a.r * b.r / mu.h)


def alpha_inner(alpha: float, mu: Density, a: Tangent, b: Tangent) -> float:
    """alpha-Fisher-Rao metric ``sum w h**(-alpha-1) r_a r_b``.

    At ``alpha = 0`` the weight is ``1/h`` and this agrees with :func:`fr_inner`.
    """
    g = same_grid(mu, a, b)
    if alpha == 0:
        return fr_inner(mu, a, b)
    return integrate(g, power(mu.h, -alpha - 1.0) * (a.r * b.r))


def tilde_g1_inner(mu: Density, a: Tangent, b: Tangent) -> float:
    """Metric on probability densities whose Levi-Civita connection is the
    exponential (alpha = 1) connection: the lambda-covariance of a/mu and b/mu."""
    g = same_grid(mu, a, b)
    require_prob(mu)
    require_prob_tangent(a, b)
    sa = a.r / mu.h
    sb = b.r / mu.h
    return integrate(g, sa * sb) - integrate(g, sa) * integrate(g, sb)


def alpha_divergence(alpha: float, mu: Density, nu: Density) -> float:
    """alpha-divergence ``D(mu||nu)`` for ``-1 < alpha < 1``.

    No analytic continuation to the Kullback-Leibler limits is attempted.
    """
    if not (-1.0 < alpha < 1.0):
        raise DomainError(f"alpha-divergence needs |alpha| < 1, got {alpha}")
    g = same_grid(mu, nu)
    cross = integrate(g, power(mu.h, (1 - alpha) / 2) * power(nu.h, (1 + alpha) / 2))
    return (2 / (1 - alpha) * nu.mass() + 2 / (1 + alpha) * mu.mass()
            - 4 / ((1 - alpha) * (1 + alpha)) * cross)


def _mixed(alpha, mu, nu, b, c, eps):
    g = mu.grid

    def d(s, t):
        return alpha_divergence(alpha, Density(g, mu.h + s * b.r), Density(g, nu.h + t * c.r))

    return (d(eps, eps) - d(eps, -eps) - d(-eps, eps) + d(-eps, -eps)) / (4 * eps * eps)


def divergence_mixed_hessian(alpha: float, mu: Density, b: Tangent, c: Tangent,
                             eps: float = 1e-4) -> float:
    """Central-difference estimate of the mixed second derivative of
    ``D(mu'||nu')`` in ``mu'`` along ``b`` and ``nu'`` along ``c`` at ``mu' = nu' = mu``.

    The exact value is ``-fr_inner(mu, b, c)``.
    """
    if eps <= 0:
        raise ContractViolation("eps must be positive")
    same_grid(mu, b, c)
    return _mixed(alpha, mu, mu, b, c, eps)


def divergence_connection_term(alpha: float, mu: Density, a: Tangent, b: Tangent,
                               c: Tangent, eps: float = 1e-3) -> float:
    """``-d/dmu[a]`` of the mixed Hessian ``d_mu d_nu D[b, c]``, first slot only,
    evaluated at ``nu = mu``.

    For constant fields this equals ``fr_inner(mu, Gamma_alpha(a, b), c)``.
    """
    if eps <= 0:
        raise ContractViolation("eps must be positive")
    g = same_grid(mu, a, b, c)
    plus = _mixed(alpha, Density(g, mu.h + eps * a.r), mu, b, c, eps)
    minus = _mixed(alpha, Density(g, mu.h - eps * a.r), mu, b, c, eps)
    return -(plus - minus) / (2 * eps)


def path_energy(alpha: float, path: Sequence[Tuple[Density, Tangent]]) -> np.ndarray:
    """Riemannian alpha-energy ``G^alpha(mu_t, mu_t)`` at each sample of a curve."""
    path = list(path)
    if not path:
        raise ContractViolation("empty path")
    return np.array([alpha_inner(alpha, mu, v, v) for mu, v in path])


def energy_drift(energies: Iterable[float]) -> float:
    """``max |E(t) - E(0)| / E(0)`` (absolute drift if ``E(0) = 0``)."""
    e = np.asarray(list(energies), dtype=float)
    scale = abs(e[0]) if e[0] != 0 else 1.0
    return float(np.max(np.abs(e - e[0])) / scale)
