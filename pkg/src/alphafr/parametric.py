"""Finite-dimensional statistical models: Fisher information, alpha-Christoffel
symbols, exponential-family closed forms, curvature and the two-parameter
metricity decision.

Index conventions: ``Gamma[i, j, k] = Gamma_{ij,k}`` (lowered on the last
slot), ``Gamma_up[l, i, j] = Gamma^l_{ij}`` and ``R[l, i, j, k] = R^l_{ijk}``
with ``R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik} + Gamma^l_{im} Gamma^m_{jk}
- Gamma^l_{jm} Gamma^m_{ik}``.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigurationError, ContractViolation, DimensionError

SCORE_STEP = 1e-5
LOG_HESS_STEP = 1e-4
HESS_STEP = 5e-3
THIRD_STEP = 1e-2
FOURTH_STEP = 2e-2
RATIO_RTOL = 1e-3


# --- expectation backends ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class Quadrature:
    """Weighted sum over fixed sample points: ``E[g] = sum w p(x, theta) g(x)``."""

    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, model: "ParamModel", theta, values: np.ndarray) -> np.ndarray:
        p = np.exp(model.logdensity(self.nodes, theta))
        return np.tensordot(self.weights * p, values, axes=(0, 0))

    def samples(self, theta):
        return self.nodes

    def stderr(self, model, theta, values):
        return np.zeros(values.shape[1:])


@dataclass(eq=False)
class MonteCarlo:
    """Seeded Monte Carlo with common random numbers.

    ``draw(rng, n)`` produces base samples once; ``push(base, theta)`` maps them
    to samples of ``p(., theta)``.
    """

    draw: Callable[[np.random.Generator, int], np.ndarray]
    push: Callable[[np.ndarray, np.ndarray], np.ndarray]
    n: int = 1_000_000
    seed: int = 0
    _base: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError("Monte Carlo needs at least two samples")

    def base(self) -> np.ndarray:
        if self._base is None:
            self._base = self.draw(np.random.default_rng(self.seed), self.n)
        return self._base

    def samples(self, theta):
        return self.push(self.base(), np.asarray(theta, dtype=float))

    def expect(self, model, theta, values):
        return values.mean(axis=0)

    def stderr(self, model, theta, values):
        return values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])


@dataclass(eq=False)
class ParamModel:
    """A parametric family ``p(x, theta) = exp(logdensity(x, theta))``.

    ``logdensity`` must accept an array of sample points and a parameter vector.
    """

    d: int
    logdensity: Callable[[np.ndarray, np.ndarray], np.ndarray]
    backend: object
    name: str = "custom"

    def _theta(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise DimensionError(f"expected {self.d} parameters, got shape {theta.shape}")
        return theta

    def normalization_defect(self, theta) -> float:
        theta = self._theta(theta)
        if isinstance(self.backend, MonteCarlo):
            return 0.0  # samples are drawn from p itself
        x = self.backend.samples(theta)
        return abs(float(self.backend.expect(self, theta, np.ones(len(x)))) - 1.0)

    def derivatives(self, theta):
        """Sample points with scores ``l_i`` and second derivatives ``l_ij`` (central FD)."""
        theta = self._theta(theta)
        x = self.backend.samples(theta)
        e = np.eye(self.d)
        h = SCORE_STEP
        score = np.stack([(self.logdensity(x, theta + h * e[i]) - self.logdensity(x, theta - h * e[i]))
                          / (2 * h) for i in range(self.d)], axis=-1)
        k = LOG_HESS_STEP
        hess = np.empty(score.shape[:1] + (self.d, self.d))
        l0 = self.logdensity(x, theta)
        for i in range(self.d):
            for j in range(i, self.d):
                if i == j:
                    v = (self.logdensity(x, theta + k * e[i]) - 2 * l0
                         + self.logdensity(x, theta - k * e[i])) / (k * k)
                else:
                    v = (self.logdensity(x, theta + k * (e[i] + e[j]))
                         - self.logdensity(x, theta + k * (e[i] - e[j]))
                         - self.logdensity(x, theta - k * (e[i] - e[j]))
                         + self.logdensity(x, theta - k * (e[i] + e[j]))) / (4 * k * k)
                hess[:, i, j] = hess[:, j, i] = v
        return x, score, hess


def _fisher_values(score):
    return score[:, :, None] * score[:, None, :]


def _christoffel_values(alpha, score, hess):
    c = (1.0 - alpha) / 2.0
    inner = hess + c * score[:, :, None] * score[:, None, :]
    return inner[:, :, :, None] * score[:, None, None, :]


def fisher_info(model: ParamModel, theta, with_error: bool = False):
    """``G_ij = E[l_i l_j]``, symmetrized; optionally with Monte Carlo standard errors."""
    theta = model._theta(theta)
    _, score, _ = model.derivatives(theta)
    vals = _fisher_values(score)
    G = model.backend.expect(model, theta, vals)
    G = 0.5 * (G + G.T)
    if np.linalg.cond(G) > 1e12:
        warnings.warn("Fisher information is numerically singular", RuntimeWarning)
    if with_error:
        return G, model.backend.stderr(model, theta, vals)
    return G


def alpha_christoffel(model: ParamModel, alpha: float, theta, with_error: bool = False):
    """``Gamma_{ij,k} = E[(l_ij + (1-alpha)/2 l_i l_j) l_k]``."""
    theta = model._theta(theta)
    _, score, hess = model.derivatives(theta)
    vals = _christoffel_values(alpha, score, hess)
    gam = model.backend.expect(model, theta, vals)
    gam = 0.5 * (gam + gam.transpose(1, 0, 2))
    if with_error:
        return gam, model.backend.stderr(model, theta, vals)
    return gam


# --- exponential families ---------------------------------------------------

def _nested_central(F, theta, idx, h):
    """Mixed partial ``d^k F / d theta_idx`` by nested central differences."""
    k = len(idx)
    total = 0.0
    e = np.eye(theta.size)
    for signs in itertools.product((1.0, -1.0), repeat=k):
        shift = sum(s * e[i] for s, i in zip(signs, idx))
        total += np.prod(signs) * F(theta + h * shift)
    return total / (2 * h) ** k


def derivative_tensor(F, theta, order: int, h: float, richardson: bool = True) -> np.ndarray:
    """Symmetric tensor of ``order``-th partials of ``F`` at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    out = np.empty((d,) * order)
    for idx in itertools.combinations_with_replacement(range(d), order):
        v = _nested_central(F, theta, idx, h)
        if richardson:
            v = (4 * _nested_central(F, theta, idx, h / 2) - v) / 3
        for perm in set(itertools.permutations(idx)):
            out[perm] = v
    return out


@dataclass(eq=False)
class ExpFamily:
    """Exponential family through its log-partition function ``F``.

    ``model`` optionally carries the sampling-side description of the same
    family, used for expectation-based cross-checks.  ``scale(theta)`` is a
    local length scale of ``F`` (distance to a singularity, say); every
    finite-difference step is multiplied by it.
    """

    d: int
    F: Callable[[np.ndarray], float]
    name: str = "custom"
    model: Optional[ParamModel] = None
    steps: Tuple[float, float, float] = (HESS_STEP, THIRD_STEP, FOURTH_STEP)
    scale: Optional[Callable[[np.ndarray], float]] = None

    def step_scale(self, theta) -> float:
        return 1.0 if self.scale is None else float(self.scale(theta))

    def _theta(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.d,):
            raise DimensionError(f"expected {self.d} parameters, got shape {theta.shape}")
        return theta

    def hess(self, theta) -> np.ndarray:
        theta = self._theta(theta)
        return derivative_tensor(self.F, theta, 2, self.steps[0] * self.step_scale(theta))

    def third(self, theta) -> np.ndarray:
        theta = self._theta(theta)
        return derivative_tensor(self.F, theta, 3, self.steps[1] * self.step_scale(theta))

    def fourth(self, theta) -> np.ndarray:
        theta = self._theta(theta)
        return derivative_tensor(self.F, theta, 4, self.steps[2] * self.step_scale(theta))

    def is_nondegenerate(self, theta) -> bool:
        return bool(np.all(np.linalg.eigvalsh(self.hess(theta)) > 0))

    @classmethod
    def from_table(cls, table: Dict, name: str = "table") -> "ExpFamily":
        """``F = sum c * prod theta**p + log sum exp(a . theta + b)``.

        ``table = {"d": 2, "poly": [[c, [p1, p2]], ...], "logsumexp": [[[a1, a2], b], ...]}``;
        either list may be omitted.
        """
        try:
            d = int(table["d"])
            poly = [(float(c), np.asarray(p, dtype=float)) for c, p in table.get("poly", [])]
            lse = table.get("logsumexp", [])
            A = np.asarray([a for a, _ in lse], dtype=float).reshape(len(lse), d)
            B = np.asarray([b for _, b in lse], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed coefficient table: {exc}") from exc
        if any(p.shape != (d,) for _, p in poly):
            raise ConfigurationError("every monomial needs one exponent per parameter")
        if not poly and not lse:
            raise ConfigurationError("empty coefficient table")

        def F(theta):
            val = sum(c * float(np.prod(theta ** p)) for c, p in poly)
            if len(B):
                val += float(logsumexp(A @ theta + B))
            return val

        return cls(d, F, name)


def expfam_geometry(fam: ExpFamily, alpha: float, theta):
    """``(G, Gamma, R)`` from derivatives of the log-partition function."""
    theta = fam._theta(theta)
    G = fam.hess(theta)
    F3 = fam.third(theta)
    try:
        Ginv = np.linalg.inv(G)
    except np.linalg.LinAlgError as exc:
        raise ContractViolation("singular Fisher metric") from exc
    gamma = (1.0 - alpha) / 2.0 * F3
    coef = (1.0 - alpha * alpha) / 4.0
    # R^l_{ijk} = coef G^{rm} G^{sl} (F_ikm F_jrs - F_jkm F_irs)
    t1 = np.einsum("rm,sl,ikm,jrs->lijk", Ginv, Ginv, F3, F3)
    R = coef * (t1 - t1.transpose(0, 2, 1, 3))
    return G, gamma, R


def raise_index(G, gamma_low):
    """``Gamma^l_{ij} = G^{lk} Gamma_{ij,k}``."""
    return np.einsum("lk,ijk->lij", np.linalg.inv(G), gamma_low)


def curvature_from_connection(gamma_up_fn, theta, h: float = 1e-2) -> np.ndarray:
    """Riemann tensor from a Christoffel field by central differences of ``Gamma^l_{jk}``."""
    theta = np.asarray(theta, dtype=float)
    d = theta.size
    e = np.eye(d)

    def dgam(i, step):
        return (gamma_up_fn(theta + step * e[i]) - gamma_up_fn(theta - step * e[i])) / (2 * step)

    # dG[i, l, j, k] = d_i Gamma^l_{jk}, Richardson-extrapolated
    dG = np.array([(4 * dgam(i, h / 2) - dgam(i, h)) / 3 for i in range(d)])
    g0 = gamma_up_fn(theta)
    deriv = np.einsum("iljk->lijk", dG) - np.einsum("jlik->lijk", dG)
    quad = np.einsum("lim,mjk->lijk", g0, g0) - np.einsum("ljm,mik->lijk", g0, g0)
    return deriv + quad


def expfam_curvature_fd(fam: ExpFamily, alpha: float, theta, h: float = 1e-2) -> np.ndarray:
    """Curvature of the alpha-connection from differences of its Christoffel field."""
    theta = fam._theta(theta)

    def up(t):
        G, gamma, _ = expfam_geometry(fam, alpha, t)
        return raise_index(G, gamma)

    return curvature_from_connection(up, theta, h * fam.step_scale(theta))


def dual_metric(fam: ExpFamily, theta) -> np.ndarray:
    """``(Hess F)^2``, the metric compatible with the alpha = -1 connection."""
    G = fam.hess(theta)
    if np.linalg.matrix_rank(G) < fam.d:
        raise ContractViolation("singular Hessian")
    return G @ G


def compatibility_residual(fam: ExpFamily, alpha: float, metric_fn, theta, h: float = 1e-2) -> float:
    """``max |d_k g_ij - g_mj Gamma^m_{ki} - g_im Gamma^m_{kj}|`` for a metric field."""
    theta = fam._theta(theta)
    h = h * fam.step_scale(theta)
    G, gamma, _ = expfam_geometry(fam, alpha, theta)
    up = raise_index(G, gamma)
    g = metric_fn(theta)
    e = np.eye(fam.d)

    def dg(k, step):
        return (metric_fn(theta + step * e[k]) - metric_fn(theta - step * e[k])) / (2 * step)

    dgk = np.array([(4 * dg(k, h / 2) - dg(k, h)) / 3 for k in range(fam.d)])
    res = dgk - np.einsum("mj,mki->kij", g, up) - np.einsum("im,mkj->kij", g, up)
    return float(np.max(np.abs(res)))


def duality_residual_coords(fam: ExpFamily, alpha: float, theta, h: float = 1e-2) -> float:
    """``max |d_k G_ij - Gamma^(alpha)_{ki,j} - Gamma^(-alpha)_{kj,i}|``."""
    theta = fam._theta(theta)
    h = h * fam.step_scale(theta)
    e = np.eye(fam.d)

    def diff(k, step):
        return (fam.hess(theta + step * e[k]) - fam.hess(theta - step * e[k])) / (2 * step)

    dG = np.array([(4 * diff(k, h / 2) - diff(k, h)) / 3 for k in range(fam.d)])
    _, gp, _ = expfam_geometry(fam, alpha, theta)
    _, gm, _ = expfam_geometry(fam, -alpha, theta)
    res = dG - gp - np.einsum("kji->kij", gm)
    return float(np.max(np.abs(res)))


# --- metricity decision -----------------------------------------------------

class Verdict(enum.Enum):
    METRIC_TRIVIALLY = "MetricTrivially"
    METRIC_FR = "MetricFR"
    METRIC_DUAL = "MetricDual"
    NON_METRIC = "NonMetric"
    FLAT_ALL_ALPHA = "FlatAllAlpha"


@dataclass
class MetricityVerdict:
    curvature_entries: List[Tuple[float, float, float, float]]
    nullspace_dim: int
    nullspace_basis: np.ndarray
    conformal_consistent: bool
    verdict: Verdict
    eigenvalues: List[np.ndarray] = field(default_factory=list)
    ratio_failures: int = 0


def compatibility_matrix(a, b, c, d) -> np.ndarray:
    """Linear map on ``(g11, g12, g22)`` whose kernel holds the compatible metrics."""
    return np.array([[a, b, 0.0], [-c, -(a + d), -b], [0.0, c, d]])


def _ratios_consistent(F2, F3, rtol=RATIO_RTOL) -> bool:
    # F_1ab/F_ab must not depend on (a, b); cross-multiplied to avoid dividing by ~0
    pairs = [(0, 0), (0, 1), (1, 1)]
    scale = np.max(np.abs(F3)) * np.max(np.abs(F2))
    for m in range(2):
        for (p, q), (r, s) in itertools.combinations(pairs, 2):
            lhs = F3[m, p, q] * F2[r, s]
            rhs = F3[m, r, s] * F2[p, q]
            if abs(lhs - rhs) > rtol * scale:
                return False
    return True


def metricity_check(fam: ExpFamily, alpha: float, probes: Sequence, flat_tol: float = 1e-8,
                    null_tol: float = 1e-6) -> MetricityVerdict:
    """Decide whether the alpha-connection of a two-parameter exponential family
    is the Levi-Civita connection of some metric."""
    if fam.d != 2:
        raise ConfigurationError("the metricity decision is only implemented for two parameters")
    probes = [fam._theta(t) for t in probes]
    if not probes:
        raise ConfigurationError("need at least one probe")
    entries, eigs = [], []
    flat = True
    basis = np.zeros(3)
    dim = 0
    failures = 0
    for theta in probes:
        G, _, R0 = expfam_geometry(fam, 0.0, theta)
        if np.max(np.abs(R0)) > flat_tol * max(1.0, np.max(np.abs(G))):
            flat = False
        _, _, R = expfam_geometry(fam, alpha, theta)
        a, b, c, d = R[0, 0, 1, 0], R[1, 0, 1, 0], R[0, 0, 1, 1], R[1, 0, 1, 1]
        entries.append((a, b, c, d))
        M = compatibility_matrix(a, b, c, d)
        eigs.append(np.linalg.eigvals(M))
        u, s, vt = np.linalg.svd(M)
        scale = max(s[0], 1e-300)
        dim = int(np.sum(s <= null_tol * scale)) if s[0] > 0 else 3
        basis = vt[-1]
        if not _ratios_consistent(G, fam.third(theta)):
            failures += 1
    consistent = failures < 2
    if flat:
        verdict = Verdict.FLAT_ALL_ALPHA
    elif alpha == 1:
        verdict = Verdict.METRIC_TRIVIALLY
    elif alpha == 0:
        verdict = Verdict.METRIC_FR
    elif alpha == -1:
        verdict = Verdict.METRIC_DUAL
    else:
        G = fam.hess(probes[-1])
        target = np.array([G[0, 0], G[0, 1], G[1, 1]])
        cos = abs(basis @ target) / np.linalg.norm(target)
        if dim != 1 or cos < 1 - 1e-6:
            raise ContractViolation(f"compatibility kernel is not spanned by G (dim={dim}, cos={cos})")
        # a consistent ratio pattern would force a singular G; both cases are non-metric
        verdict = Verdict.NON_METRIC
    return MetricityVerdict(entries, dim, basis, consistent, verdict, eigs, failures)


def verdict_metric(fam: ExpFamily, verdict: Verdict):
    """Metric field certified by a Metric* verdict, or ``None``."""
    if verdict is Verdict.METRIC_TRIVIALLY:
        return lambda theta: np.eye(fam.d)
    if verdict is Verdict.METRIC_FR:
        return fam.hess
    if verdict is Verdict.METRIC_DUAL:
        return lambda theta: dual_metric(fam, theta)
    return None


# --- model zoo ------------------------------------------------------------

def categorical_family(k: int = 3) -> ExpFamily:
    """Categorical distribution on ``k`` cells in natural parameters (cell 0 as base)."""
    if k < 2:
        raise ConfigurationError("need at least two cells")
    d = k - 1
    stats = np.vstack([np.zeros(d), np.eye(d)])

    def F(theta):
        return float(logsumexp(np.concatenate([[0.0], theta])))

    def logp(x, theta):
        return stats[np.asarray(x, dtype=int)] @ theta - F(theta)

    model = ParamModel(d, logp, Quadrature(np.arange(k), np.ones(k)), f"categorical{k}")
    return ExpFamily(d, F, f"categorical{k}", model)


def gaussian_natural_family(half_width: float = 40.0, nodes: int = 8001) -> ExpFamily:
    """Normal family with statistics ``(x, x^2)``; requires ``theta_2 < 0``."""

    def F(theta):
        t1, t2 = theta
        if t2 >= 0:
            return math.nan
        return -t1 * t1 / (4 * t2) + 0.5 * math.log(math.pi / -t2)

    def logp(x, theta):
        return theta[0] * x + theta[1] * x * x - F(theta)

    x = np.linspace(-half_width, half_width, nodes)
    w = np.full(nodes, x[1] - x[0])
    w[[0, -1]] *= 0.5
    return ExpFamily(2, F, "gaussian", ParamModel(2, logp, Quadrature(x, w), "gaussian"),
                     scale=lambda theta: min(1.0, abs(theta[1])))


def _translation_logq(kind):
    if kind == "gaussian":
        return lambda y: -0.5 * y * y - 0.5 * math.log(2 * math.pi)
    if kind == "laplace":
        return lambda y: -np.abs(y) - math.log(2.0)
    if kind == "logistic":
        return lambda y: -y - 2 * np.logaddexp(0.0, -y)
    raise ConfigurationError(f"unknown translation kernel {kind!r}")


def translation_model(kind: str = "gaussian", d: int = 1, backend: str = "quadrature",
                      n: int = 1_000_000, seed: int = 0) -> ParamModel:
    """``p(x, theta) = prod q(x_i - theta_i)`` with ``q`` standard normal, Laplace or logistic."""
    logq = _translation_logq(kind)

    def logp(x, theta):
        x = np.asarray(x, dtype=float).reshape(len(x), d)
        return np.sum(logq(x - theta), axis=1)

    if backend == "quadrature":
        if d != 1:
            raise ConfigurationError("quadrature translation models are one-dimensional")
        xs = np.linspace(-60.0, 60.0, 24001)
        w = np.full(xs.size, xs[1] - xs[0])
        w[[0, -1]] *= 0.5
        back = Quadrature(xs, w)
    elif backend == "mc":
        rng_draw = {
            "gaussian": lambda rng, m: rng.standard_normal((m, d)),
            "laplace": lambda rng, m: rng.laplace(size=(m, d)),
            "logistic": lambda rng, m: rng.logistic(size=(m, d)),
        }[kind]
        back = MonteCarlo(rng_draw, lambda base, theta: base + theta, n, seed)
    else:
        raise ConfigurationError(f"unknown backend {backend!r}")
    return ParamModel(d, logp, back, f"{kind}-translation")


def gaussian_translation_family(d: int = 2, n: int = 1_000_000, seed: int = 0) -> ExpFamily:
    """``N(theta, I)``: exponential family with ``F = |theta|^2 / 2``."""
    return ExpFamily(d, lambda t: 0.5 * float(t @ t), "gaussian-translation",
                     translation_model("gaussian", d, "mc", n, seed))


FAMILIES = {
    "categorical3": lambda **kw: categorical_family(3),
    "gaussian": lambda **kw: gaussian_natural_family(),
    "gaussian-translation": lambda **kw: gaussian_translation_family(**kw),
}

MODELS = {
    "laplace-translation": lambda **kw: translation_model("laplace", **kw),
    "logistic-translation": lambda **kw: translation_model("logistic", **kw),
    "gaussian-translation-1d": lambda **kw: translation_model("gaussian", **kw),
}


def get_family(name: str, **kw) -> ExpFamily:
    try:
        return FAMILIES[name](**kw)
    except KeyError:
        raise ConfigurationError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


def mc_tolerance(stderr, k: float = 5.0) -> float:
    """``k`` standard errors (largest over entries); zero for quadrature backends."""
    return float(k * np.max(stderr))
