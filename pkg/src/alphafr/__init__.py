"""Alpha-connections and alpha-Fisher-Rao geometry on spaces of densities,
with geodesic solvers, generalized Proudman-Johnson flows and parametric
exponential-family checks."""

from .errors import (AlphaFRError, ConfigurationError, ContractViolation, ConvexityViolation,
                     DimensionError, DomainError, GeodesicEscape, OutOfChartError)
from .grid import (Density, Grid1D, GridKind, Tangent, grid_from_config, integrate, make_line,
                   make_periodic)
from .metrics import alpha_divergence, alpha_inner, fr_inner, tilde_g1_inner
from .connections import (christoffel_alphaFR_prob, christoffel_dens, christoffel_prob,
                          curvature_prob)
from .geodesics_dens import blowup_time, geodesic_dens
from .geodesics_prob import (geodesic_prob_alpha1, geodesic_prob_bvp, geodesic_prob_ivp,
                             tau_ivp)
from .pj import gpj_residual, gpj_solve, theta_inverse, theta_map

__version__ = "0.1.0"
