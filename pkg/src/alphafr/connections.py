"""Christoffel maps of the alpha-connections, duality and curvature checks.

All derivative checks use constant extensions of tangent vectors, which makes
``Db.a`` vanish and reduces every covariant derivative to a Christoffel map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .grid import (Density, Tangent, integrate, require_prob, require_prob_tangent,
                   same_grid, shift)
from .metrics import alpha_inner, fr_inner, power


@dataclass(frozen=True)
class ChristoffelResult:
    gamma: Tangent

    @property
    def r(self) -> np.ndarray:
        return self.gamma.r


def christoffel_dens(alpha: float, mu: Density, a: Tangent, b: Tangent) -> ChristoffelResult:
    """``Gamma(a, b)/lambda = -(1+alpha)/2 * r_a r_b / h`` on positive densities."""
    g = same_grid(mu, a, b)
    coef = -(1.0 + alpha) / 2.0
    return ChristoffelResult(Tangent(g, coef * (a.r * b.r) / mu.h))


def christoffel_prob(alpha: float, mu: Density, a: Tangent, b: Tangent) -> ChristoffelResult:
    """Christoffel map of the alpha-connection on probability densities:
    the density-space map minus its Fisher-Rao normal component."""
    g = same_grid(mu, a, b)
    require_prob(mu)
    require_prob_tangent(a, b)
    coef = -(1.0 + alpha) / 2.0
    return ChristoffelResult(Tangent(g, coef * ((a.r * b.r) / mu.h - fr_inner(mu, a, b) * mu.h)))


def christoffel_alphaFR_prob(alpha: float, mu: Density, a: Tangent, b: Tangent) -> ChristoffelResult:
    """Levi-Civita Christoffel map of the alpha-Fisher-Rao metric restricted to
    probability densities (normal direction ``h**(alpha+1)``)."""
    g = same_grid(mu, a, b)
    require_prob(mu)
    require_prob_tangent(a, b)
    coef = -(1.0 + alpha) / 2.0
    hp = np.power(mu.h, alpha + 1.0)
    normal = fr_inner(mu, a, b) / integrate(g, hp) * hp
    return ChristoffelResult(Tangent(g, coef * ((a.r * b.r) / mu.h - normal)))


def _require_eps(eps):
    if not eps > 0:
        raise ContractViolation(f"eps must be positive, got {eps}")


def duality_residual(alpha: float, mu: Density, a: Tangent, b: Tangent, c: Tangent,
                     eps: float = 1e-5, dual_alpha: float | None = None) -> float:
    """``|D_c G(a,b) - G(nabla^alpha_c a, b) - G(a, nabla^dual_c b)|`` with G Fisher-Rao.

    ``dual_alpha`` defaults to ``-alpha``; passing ``alpha`` instead gives the
    witness that the sign flip is needed.
    """
    _require_eps(eps)
    same_grid(mu, a, b, c)
    if dual_alpha is None:
        dual_alpha = -alpha
    fd = (fr_inner(shift(mu, c, eps), a, b) - fr_inner(shift(mu, c, -eps), a, b)) / (2 * eps)
    t1 = fr_inner(mu, christoffel_dens(alpha, mu, c, a).gamma, b)
    t2 = fr_inner(mu, a, christoffel_dens(dual_alpha, mu, c, b).gamma)
    return abs(fd - t1 - t2)


def levi_civita_residual(alpha: float, mu: Density, a: Tangent, b: Tangent, c: Tangent,
                         eps: float = 1e-5) -> float:
    """Metric-compatibility residual of the density alpha-connection against the
    alpha-Fisher-Rao metric: ``|D_c G^a(a,b) - G^a(Gamma(c,a),b) - G^a(a,Gamma(c,b))|``."""
    _require_eps(eps)
    same_grid(mu, a, b, c)
    fd = (alpha_inner(alpha, shift(mu, c, eps), a, b)
          - alpha_inner(alpha, shift(mu, c, -eps), a, b)) / (2 * eps)
    t1 = alpha_inner(alpha, mu, christoffel_dens(alpha, mu, c, a).gamma, b)
    t2 = alpha_inner(alpha, mu, a, christoffel_dens(alpha, mu, c, b).gamma)
    return abs(fd - t1 - t2)


def curvature_prob(alpha: float, mu: Density, a: Tangent, b: Tangent, c: Tangent) -> Tangent:
    """Riemann tensor of the alpha-connection on probability densities:
    ``(1 - alpha^2)/4 * (G(b,c) a - G(a,c) b)``."""
    g = same_grid(mu, a, b, c)
    require_prob(mu)
    require_prob_tangent(a, b, c)
    k = (1.0 - alpha * alpha) / 4.0
    return Tangent(g, k * (fr_inner(mu, b, c) * a.r - fr_inner(mu, a, c) * b.r))


def curvature_fd_oracle(alpha: float, mu: Density, a: Tangent, b: Tangent, c: Tangent,
                        eps: float = 1e-4) -> Tangent:
    """``nabla_a nabla_b c - nabla_b nabla_a c`` for constant fields, with the
    derivative of ``mu -> Gamma_mu`` taken by central differences."""
    _require_eps(eps)
    g = same_grid(mu, a, b, c)
    require_prob(mu)
    require_prob_tangent(a, b, c)

    def gam(m, x, y):
        return christoffel_prob(alpha, m, x, y).gamma

    def nested(x, y):
        # nabla_x (nabla_y c) = D[Gamma(y, c)].x + Gamma(x, Gamma(y, c))
        d = (gam(shift(mu, x, eps), y, c).r - gam(shift(mu, x, -eps), y, c).r) / (2 * eps)
        return d + gam(mu, x, gam(mu, y, c)).r

    return Tangent(g, nested(a, b) - nested(b, a))


def sectional_curvature(alpha: float, mu: Density, a: Tangent, b: Tangent) -> float:
    """``G(R(a,b)b, a) / (G(a,a)G(b,b) - G(a,b)^2)`` with G Fisher-Rao."""
    num = fr_inner(mu, curvature_prob(alpha, mu, a, b, b), a)
    den = fr_inner(mu, a, a) * fr_inner(mu, b, b) - fr_inner(mu, a, b) ** 2
    return num / den


def fr_orthonormalize(mu: Density, a: Tangent, b: Tangent):
    """Gram-Schmidt of ``(a, b)`` in the Fisher-Rao metric at ``mu``."""
    ea = a * (1.0 / np.sqrt(fr_inner(mu, a, a)))
    bb = b - ea * fr_inner(mu, b, ea)
    eb = bb * (1.0 / np.sqrt(fr_inner(mu, bb, bb)))
    return ea, eb
