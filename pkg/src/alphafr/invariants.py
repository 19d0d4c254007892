"""Property batteries for every module, each returning a list of checks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

import numpy as np

from . import connections as cn
from . import geodesics_dens as gd
from . import geodesics_prob as gp
from . import metrics as mt
from . import parametric as pm
from . import pj
from .errors import AlphaFRError, GeodesicEscape
from .grid import Density, Tangent, make_line, make_periodic
from .sampling import bump, random_density, random_prob_pair, random_tangent


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tol: float
    wall: float = 0.0
    relation: str = "<"

    def as_dict(self) -> Dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "value": self.value, "tol": self.tol, "relation": self.relation,
                "wall_time": self.wall}


@dataclass
class SuiteSettings:
    alphas: Sequence[float]
    seed: int = 0
    n_periodic: int = 128
    n_line: int = 1024
    line_L: float = 10.0
    line_support: float = 4.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_time: float = 10.0
    instances: int = 20
    bvp_pairs: int = 30
    mc_samples: int = 1_000_000

    def periodic(self):
        return make_periodic(self.n_periodic)

    def line(self, n=None):
        return make_line(n or self.n_line, self.line_L, self.line_support)

    def rng(self, salt: int = 0):
        return np.random.default_rng([self.seed, salt])

    def controls(self, **kw):
        base = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol, max_time=self.max_time)
        base.update(kw)
        return gp.TauControls(**base)


def _below(name, value, tol, start):
    value = float(value)
    return Check(name, bool(value < tol), value, tol, time.perf_counter() - start)


def _above(name, value, tol, start):
    value = float(value)
    return Check(name, bool(value > tol), value, tol, time.perf_counter() - start, ">")


def _equal(name, ok, start):
    return Check(name, bool(ok), float(ok), 1.0, time.perf_counter() - start, "==")


def metrics_suite(s: SuiteSettings) -> List[Check]:
    g = s.periodic()
    rng = s.rng(1)
    out = []
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(s.instances):
        mu = random_density(g, rng, prob=False)
        a, b = random_tangent(g, rng), random_tangent(g, rng)
        worst = max(worst, abs(mt.alpha_inner(0.0, mu, a, b) - mt.fr_inner(mu, a, b)))
    out.append(_below("metrics.alpha0_is_fisher_rao", worst, 1e-12, t0))
    for alpha in [a for a in s.alphas if abs(a) < 1]:
        t0 = time.perf_counter()
        hess = conn = 0.0
        for _ in range(5):
            mu = random_density(g, rng, prob=False)
            a, b, c = (random_tangent(g, rng) for _ in range(3))
            hess = max(hess, abs(mt.divergence_mixed_hessian(alpha, mu, b, c) + mt.fr_inner(mu, b, c)))
            gam = cn.christoffel_dens(alpha, mu, a, b).gamma
            conn = max(conn, abs(mt.divergence_connection_term(alpha, mu, a, b, c)
                                 - mt.fr_inner(mu, gam, c)))
        out.append(_below(f"metrics.divergence_hessian[alpha={alpha}]", hess, 1e-6, t0))
        out.append(_below(f"metrics.divergence_connection[alpha={alpha}]", conn, 1e-6, t0))
    return out


def connections_suite(s: SuiteSettings) -> List[Check]:
    g = s.periodic()
    rng = s.rng(2)
    out = []
    for alpha in s.alphas:
        t0 = time.perf_counter()
        lc = dual = 0.0
        flip = math.inf
        for _ in range(s.instances):
            mu = random_density(g, rng, prob=False)
            a, b = random_tangent(g, rng), random_tangent(g, rng)
            c = Tangent(g, a.r * b.r) + random_tangent(g, rng, 0.5)
            lc = max(lc, cn.levi_civita_residual(alpha, mu, a, b, c))
            dual = max(dual, cn.duality_residual(alpha, mu, a, b, c))
            flip = min(flip, cn.duality_residual(alpha, mu, a, b, c, dual_alpha=alpha))
        out.append(_below(f"connections.levi_civita[alpha={alpha}]", lc, 1e-6, t0))
        out.append(_below(f"connections.duality[alpha={alpha}]", dual, 1e-6, t0))
        if alpha != 0:
            out.append(_above(f"connections.duality_sign_flip_detected[alpha={alpha}]", flip, 1e-3, t0))
        t0 = time.perf_counter()
        curv = lcp = 0.0
        for _ in range(max(3, s.instances // 4)):
            mu = random_density(g, rng)
            a, b, c = (random_tangent(g, rng, prob=True) for _ in range(3))
            exact = cn.curvature_prob(alpha, mu, a, b, c).r
            curv = max(curv, np.max(np.abs(exact - cn.curvature_fd_oracle(alpha, mu, a, b, c).r)))
            eps = 1e-5
            fd = (mt.alpha_inner(alpha, Density(g, mu.h + eps * c.r), a, b)
                  - mt.alpha_inner(alpha, Density(g, mu.h - eps * c.r), a, b)) / (2 * eps)
            t1 = mt.alpha_inner(alpha, mu, cn.christoffel_alphaFR_prob(alpha, mu, c, a).gamma, b)
            t2 = mt.alpha_inner(alpha, mu, a, cn.christoffel_alphaFR_prob(alpha, mu, c, b).gamma)
            lcp = max(lcp, abs(fd - t1 - t2))
        out.append(_below(f"connections.curvature_vs_fd[alpha={alpha}]", curv, 1e-4, t0))
        out.append(_below(f"connections.alphaFR_prob_compatible[alpha={alpha}]", lcp, 1e-6, t0))
    if 0 in s.alphas:
        t0 = time.perf_counter()
        dev = 0.0
        for _ in range(10):
            mu = random_density(g, rng)
            a, b = random_tangent(g, rng, prob=True), random_tangent(g, rng, prob=True)
            ea, eb = cn.fr_orthonormalize(mu, a, b)
            dev = max(dev, abs(cn.sectional_curvature(0.0, mu, ea, eb) - 0.25))
        out.append(_below("connections.fisher_rao_sectional_quarter", dev, 1e-8, t0))
    return out


def geodesics_dens_suite(s: SuiteSettings) -> List[Check]:
    g = s.periodic()
    rng = s.rng(3)
    out = []
    for alpha in s.alphas:
        t0 = time.perf_counter()
        res = aff = drift = 0.0
        for _ in range(5):
            mu0 = random_density(g, rng, prob=False)
            a = random_tangent(g, rng, 0.5)
            T = min(gd.blowup_time(alpha, mu0, a), 2.0)
            ts = np.linspace(0.0, 0.5 * T, 9)
            res = max(res, gd.geodesic_residual(alpha, mu0, a, ts[1:-1]))
            aff = max(aff, gd.chart_affinity_deviation(alpha, mu0, a, ts))
            geo = gd.DensGeodesic(alpha, mu0, a)
            drift = max(drift, mt.energy_drift(mt.path_energy(alpha, geo.sample(ts))))
        out.append(_below(f"geodesics_dens.equation_residual[alpha={alpha}]", res, 1e-5, t0))
        out.append(_below(f"geodesics_dens.chart_affinity[alpha={alpha}]", aff, 1e-9, t0))
        out.append(_below(f"geodesics_dens.energy_drift[alpha={alpha}]", drift, 1e-6, t0))
    t0 = time.perf_counter()
    agree = 0
    for k in range(100):
        alpha = float(rng.choice([-2, -1, -0.5, 0, 0.5, 1, 2, 3]))
        mu0 = random_density(g, rng, prob=False)
        r = random_tangent(g, rng).r
        if k % 3 == 0:
            r = np.abs(r) + 0.01
        a = Tangent(g, r)
        finite = math.isfinite(gd.blowup_time(alpha, mu0, a))
        agree += finite == (bool(np.min(r) < 0) and alpha != 1)
    out.append(_equal("geodesics_dens.blowup_dichotomy", agree == 100, t0))
    t0 = time.perf_counter()
    try:
        mu0 = random_density(g, rng, prob=False)
        a = random_tangent(g, rng, 0.05)
        gd.geodesic_dens(1.0, mu0, a, 100.0)
        ok = True
    except GeodesicEscape:
        ok = False
    out.append(_equal("geodesics_dens.alpha1_global", ok, t0))
    return out


def geodesics_prob_suite(s: SuiteSettings) -> List[Check]:
    g = s.periodic()
    rng = s.rng(4)
    out = []
    for alpha in s.alphas:
        if alpha == 1:
            continue
        t0 = time.perf_counter()
        mu0 = random_density(g, rng)
        a = random_tangent(g, rng, 0.3, prob=True)
        geo = gp.solve_prob_geodesic(alpha, mu0, a, s.controls(max_time=1.0))
        t_end = geo.solution.t_end
        ts = np.linspace(0.1, 0.9, 5) * t_end
        out.append(_below(f"geodesics_prob.equation_residual[alpha={alpha}]",
                          gp.prob_geodesic_residual(alpha, geo.at, ts), 1e-4, t0))
        t0 = time.perf_counter()
        surf = max(gp.SurfacePoint(alpha, g, row).constraint_residual() for row in geo.chart_at(ts))
        out.append(_below(f"geodesics_prob.surface_preserved[alpha={alpha}]", surf, 1e-7, t0))
        t0 = time.perf_counter()
        reached = 0
        for _ in range(s.bvp_pairs):
            m0, m1 = random_prob_pair(g, rng)
            try:
                gp.geodesic_prob_bvp(alpha, m0, m1, samples=3, controls=s.controls())
                reached += 1
            except AlphaFRError:
                pass
        out.append(_equal(f"geodesics_prob.bvp_convexity[alpha={alpha}]", reached == s.bvp_pairs, t0))
    if -1 in s.alphas:
        t0 = time.perf_counter()
        m0, m1 = random_prob_pair(g, rng)
        path, T = gp.geodesic_prob_bvp(-1.0, m0, m1, samples=11, controls=s.controls())
        dev = abs(T - 1.0)
        for k, mu in enumerate(path):
            lam = k / 10
            dev = max(dev, float(np.max(np.abs(mu.h - ((1 - lam) * m0.h + lam * m1.h)))))
        out.append(_below("geodesics_prob.mixture_lines", dev, 1e-8, t0))
    if 1 in s.alphas:
        t0 = time.perf_counter()
        m0, m1 = random_prob_pair(g, rng)
        dev = 0.0
        for t in (-10.0, 10.0):
            mu = gp.geodesic_prob_alpha1(m0, m1, t)
            dev = max(dev, abs(mu.mass() - 1.0)) if np.all(mu.h > 0) else math.inf
        out.append(_below("geodesics_prob.alpha1_complete", dev, 1e-10, t0))
    return out


def default_u0(grid, amplitude: float = 0.5) -> pj.VelocityField:
    """Smooth bump-windowed Gaussian used as reference gPJ initial datum."""
    x = grid.nodes
    return pj.VelocityField(grid, amplitude * np.exp(-x * x) * bump(x, grid.support))


def pj_suite(s: SuiteSettings) -> List[Check]:
    out = []
    g = s.line()
    x = g.nodes
    dt = 1e-3
    ts = np.arange(0.0, 0.5 + dt / 2, dt)
    u0 = default_u0(g)
    for alpha in s.alphas:
        t0 = time.perf_counter()
        if not gpj_fits(alpha, u0, ts[-1]):
            continue
        traj = pj.gpj_solve(alpha, u0, ts)
        out.append(_below(f"pj.gpj_residual[alpha={alpha}]", pj.gpj_residual(alpha, traj, ts), 1e-3, t0))
    t0 = time.perf_counter()
    w = 1 + 0.4 * np.sin(2 * x) * np.exp(-x * x) * bump(x, g.support)
    phi = pj.theta_inverse(Density(g, w), strict=False)
    U = np.exp(-(x - 0.5) ** 2) * np.cos(x) * bump(x, g.support)
    V = np.exp(-(x + 0.3) ** 2 / 1.5) * bump(x, g.support)
    iso = 0.0
    for alpha in s.alphas:
        lhs = pj.alpha_h1_inner(alpha, phi, U, V)
        rhs = mt.alpha_inner(alpha, pj.theta_map(phi), pj.dtheta(phi, U), pj.dtheta(phi, V))
        iso = max(iso, abs(lhs - rhs))
    out.append(_below("pj.isometry", iso, 1e-6, t0))
    t0 = time.perf_counter()
    back = pj.theta_inverse(pj.theta_map(pj.Diffeo1D.from_phi(g, phi.phi)), strict=False)
    out.append(_below("pj.bijectivity", np.max(np.abs(back.phi - phi.phi)), 1e-6, t0))
    t0 = time.perf_counter()
    big = default_u0(g, 2.0)
    worst = 0.0
    # for 0 < alpha < 1, h vanishes like a high power near T and drops below the
    # float resolution of phi a few steps early; those alphas are not checked here
    for alpha in [a for a in s.alphas if not 0 < a < 1]:
        T = pj.gpj_blowup_time(alpha, big)
        if not math.isfinite(T):
            continue
        ts = np.arange(0.0, T + 2 * dt, dt)
        try:
            pj.gpj_solve(alpha, big, ts[ts > T - 5 * dt])
            worst = math.inf
        except GeodesicEscape as exc:
            worst = max(worst, abs(exc.escape_time - T))
    out.append(_below("pj.blowup_transfer", worst, dt, t0))
    return out


def gpj_fits(alpha, u0, t_end) -> bool:
    return pj.gpj_blowup_time(alpha, u0) > t_end


def parametric_suite(s: SuiteSettings) -> List[Check]:
    out = []
    rng = s.rng(6)
    cat = pm.categorical_family(3)
    gauss = pm.gaussian_natural_family()
    fams = [
        (cat, [rng.normal(size=2) for _ in range(5)]),
        (gauss, [np.array([0.5 * rng.normal(), -0.5 - rng.random()]) for _ in range(5)]),
    ]
    for fam, probes in fams:
        for alpha in s.alphas:
            t0 = time.perf_counter()
            eg = eg2 = 0.0
            for th in probes:
                G, gam, _ = pm.expfam_geometry(fam, alpha, th)
                eg = max(eg, np.max(np.abs(pm.fisher_info(fam.model, th) - G)))
                eg2 = max(eg2, np.max(np.abs(pm.alpha_christoffel(fam.model, alpha, th) - gam)))
            out.append(_below(f"parametric.{fam.name}.fisher_vs_hessian[alpha={alpha}]", eg, 1e-4, t0))
            out.append(_below(f"parametric.{fam.name}.christoffel_vs_third[alpha={alpha}]", eg2, 1e-4, t0))
            t0 = time.perf_counter()
            curv = dual = 0.0
            for th in probes:
                R = pm.expfam_geometry(fam, alpha, th)[2]
                curv = max(curv, np.max(np.abs(R - pm.expfam_curvature_fd(fam, alpha, th))))
                dual = max(dual, pm.duality_residual_coords(fam, alpha, th))
            out.append(_below(f"parametric.{fam.name}.curvature_vs_fd[alpha={alpha}]", curv, 1e-4, t0))
            out.append(_below(f"parametric.{fam.name}.coordinate_duality[alpha={alpha}]", dual, 1e-4, t0))
            t0 = time.perf_counter()
            verdict = pm.metricity_check(fam, alpha, probes)
            expected = {1: pm.Verdict.METRIC_TRIVIALLY, 0: pm.Verdict.METRIC_FR,
                        -1: pm.Verdict.METRIC_DUAL}.get(alpha, pm.Verdict.NON_METRIC)
            out.append(_equal(f"parametric.{fam.name}.verdict[alpha={alpha}]",
                              verdict.verdict is expected, t0))
            metric = pm.verdict_metric(fam, verdict.verdict)
            if metric is not None:
                t0 = time.perf_counter()
                res = max(pm.compatibility_residual(fam, alpha, metric, th) for th in probes)
                out.append(_below(f"parametric.{fam.name}.compatibility[alpha={alpha}]", res, 1e-4, t0))
        t0 = time.perf_counter()
        zero = max(np.max(np.abs(pm.expfam_geometry(fam, a, probes[0])[2])) for a in (1.0, -1.0))
        out.append(_equal(f"parametric.{fam.name}.flat_at_pm1", zero == 0.0, t0))
    t0 = time.perf_counter()
    trans = pm.gaussian_translation_family(2, s.mc_samples, s.seed)
    ok = all(pm.metricity_check(trans, a, [[0.0, 0.0], [0.7, -0.4]]).verdict is pm.Verdict.FLAT_ALL_ALPHA
             for a in s.alphas)
    out.append(_equal("parametric.translation.flat_all_alpha", ok, t0))
    t0 = time.perf_counter()
    gam, se = pm.alpha_christoffel(trans.model, s.alphas[0], [0.3, -0.2], with_error=True)
    out.append(_below("parametric.translation.christoffel_zero", np.max(np.abs(gam)),
                      pm.mc_tolerance(se), t0))
    return out


SUITES: Dict[str, Callable[[SuiteSettings], List[Check]]] = {
    "metrics": metrics_suite,
    "connections": connections_suite,
    "geodesics-dens": geodesics_dens_suite,
    "geodesics-prob": geodesics_prob_suite,
    "pj": pj_suite,
    "parametric": parametric_suite,
}
