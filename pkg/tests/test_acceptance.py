"""Acceptance battery: one test per numbered criterion.

Each test records its measured worst-case values as user properties; the
conftest hook prints a PASS/FAIL line per criterion in the terminal summary.
"""

import math

import numpy as np
import pytest

from alphafr import connections as cn
from alphafr import geodesics_dens as gd
from alphafr import geodesics_prob as gp
from alphafr import metrics as mt
from alphafr import parametric as pm
from alphafr import pj
from alphafr.errors import AlphaFRError, GeodesicEscape
from alphafr.grid import Density, Tangent, make_line, make_periodic
from alphafr.sampling import bump, random_density, random_prob_pair, random_tangent


@pytest.fixture(scope="module")
def grid():
    return make_periodic(128)


def record(request, **values):
    for k, v in values.items():
        request.node.user_properties.append((k, f"{v:.3g}" if isinstance(v, float) else v))
        print(f"  {request.node.name}: {k} = {v}")


@pytest.mark.criterion(1, "Levi-Civita identity of the density alpha-connection")
def test_criterion_1(request, grid):
    rng = np.random.default_rng(101)
    worst = 0.0
    for alpha in (-2.0, -1.0, 0.0, 0.5, 1.0, 3.0):
        for _ in range(20):
            mu = random_density(grid, rng, prob=False)
            a, b, c = (random_tangent(grid, rng) for _ in range(3))
            worst = max(worst, cn.levi_civita_residual(alpha, mu, a, b, c))
    record(request, max_residual=worst)
    assert worst < 1e-6


@pytest.mark.criterion(2, "Duality of the alpha and -alpha connections")
def test_criterion_2(request, grid):
    rng = np.random.default_rng(102)
    worst, flip = 0.0, math.inf
    for k in range(50):
        # |alpha| <= 3, with every fifth instance at the self-dual point alpha = 0
        alpha = 0.0 if k % 5 == 0 else float(rng.choice([-1, 1]) * rng.uniform(0.25, 3.0))
        mu = random_density(grid, rng, prob=False)
        a, b = random_tangent(grid, rng), random_tangent(grid, rng)
        c = Tangent(grid, a.r * b.r) + random_tangent(grid, rng, 0.5)
        worst = max(worst, cn.duality_residual(alpha, mu, a, b, c))
        if alpha != 0:
            flip = min(flip, cn.duality_residual(alpha, mu, a, b, c, dual_alpha=alpha))
    record(request, max_residual=worst, min_sign_flip_residual=flip)
    assert worst < 1e-6
    assert flip > 1e-3


@pytest.mark.criterion(3, "Closed-form density geodesics")
def test_criterion_3(request, grid):
    rng = np.random.default_rng(103)
    res = aff = drift = 0.0
    for alpha in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0):
        for _ in range(5):
            mu0 = random_density(grid, rng, prob=False)
            a = random_tangent(grid, rng, 0.5)
            T = min(gd.blowup_time(alpha, mu0, a), 2.0)
            ts = np.linspace(0.0, 0.5 * T, 9)
            res = max(res, gd.geodesic_residual(alpha, mu0, a, ts[1:-1], dt=1e-3))
            aff = max(aff, gd.chart_affinity_deviation(alpha, mu0, a, ts))
            geo = gd.DensGeodesic(alpha, mu0, a)
            drift = max(drift, mt.energy_drift(mt.path_energy(alpha, geo.sample(ts))))
    record(request, max_residual=res, max_affinity_dev=aff, max_energy_drift=drift)
    assert res < 1e-5
    assert aff < 1e-9
    assert drift < 1e-6


@pytest.mark.criterion(4, "Blowup dichotomy on densities")
def test_criterion_4(request, grid):
    rng = np.random.default_rng(104)
    agree = 0
    for k in range(100):
        alpha = float(rng.choice([-2, -1, -0.5, 0, 0.5, 1, 2, 3]))
        mu0 = random_density(grid, rng, prob=False)
        r = random_tangent(grid, rng).r
        if k % 3 == 0:
            r = np.abs(r) + 0.01
        finite = math.isfinite(gd.blowup_time(alpha, mu0, Tangent(grid, r)))
        agree += finite == (bool(r.min() < 0) and alpha != 1)
    mu0 = random_density(grid, rng, prob=False)
    a = random_tangent(grid, rng)
    assert gd.blowup_time(1.0, mu0, a) == math.inf
    ok = True
    try:
        for t in np.linspace(0.0, 100.0, 101):
            ok &= bool(np.all(gd.geodesic_dens(1.0, mu0, a, t).h > 0))
    except GeodesicEscape:
        ok = False
    record(request, agreeing_cases=agree, alpha1_to_t100=ok)
    assert agree == 100
    assert ok


@pytest.mark.criterion(5, "Curvature on probability densities")
def test_criterion_5(request, grid):
    rng = np.random.default_rng(105)
    worst = 0.0
    for alpha in (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0):
        for _ in range(3):
            mu = random_density(grid, rng)
            a, b, c = (random_tangent(grid, rng, prob=True) for _ in range(3))
            diff = cn.curvature_prob(alpha, mu, a, b, c).r - cn.curvature_fd_oracle(alpha, mu, a, b, c).r
            worst = max(worst, float(np.max(np.abs(diff))))
    quarter = 0.0
    for _ in range(10):
        mu = random_density(grid, rng)
        ea, eb = cn.fr_orthonormalize(mu, random_tangent(grid, rng, prob=True),
                                      random_tangent(grid, rng, prob=True))
        k = mt.fr_inner(mu, cn.curvature_prob(0.0, mu, ea, eb, eb), ea)
        quarter = max(quarter, abs(k - 0.25))
    record(request, max_fd_gap=worst, max_quarter_dev=quarter)
    assert worst < 1e-4
    assert quarter < 1e-8


@pytest.mark.criterion(6, "Geodesics on probability densities via the tau ODE")
def test_criterion_6(request, grid):
    rng = np.random.default_rng(106)
    alphas = (-2.0, -1.0, -0.5, 0.0, 0.5, 2.0, 3.0)
    res = 0.0
    for alpha in alphas:
        mu = random_density(grid, rng)
        a = random_tangent(grid, rng, 0.3, prob=True)
        geo = gp.solve_prob_geodesic(alpha, mu, a, gp.TauControls(max_time=1.0))
        ts = np.linspace(0.1, 0.9, 5) * geo.solution.t_end
        res = max(res, gp.prob_geodesic_residual(alpha, geo.at, ts))
    m0, m1 = random_prob_pair(grid, rng)
    path, T = gp.geodesic_prob_bvp(-1.0, m0, m1, samples=11)
    mix = abs(T - 1.0)
    for k, mu in enumerate(path):
        mix = max(mix, float(np.max(np.abs(mu.h - ((1 - k / 10) * m0.h + k / 10 * m1.h)))))
    g32 = make_periodic(64)
    reached = failed = 0
    for alpha in alphas:
        for _ in range(30):
            p0, p1 = random_prob_pair(g32, rng)
            try:
                _, T = gp.geodesic_prob_bvp(alpha, p0, p1, samples=2)
                reached += 1
            except AlphaFRError:
                failed += 1
    record(request, max_ivp_residual=res, mixture_dev=mix, bvp_reached=reached, bvp_failed=failed)
    assert res < 1e-4
    assert mix < 1e-8
    assert failed == 0 and reached == 30 * len(alphas)


@pytest.mark.criterion(7, "alpha = 1 geodesics stay in Prob for all time")
def test_criterion_7(request, grid):
    rng = np.random.default_rng(107)
    dev = 0.0
    positive = True
    for _ in range(5):
        m0, m1 = random_prob_pair(grid, rng)
        for t in (-10.0, 10.0):
            mu = gp.geodesic_prob_alpha1(m0, m1, t)
            positive &= bool(np.all(mu.h > 0))
            dev = max(dev, abs(mu.mass() - 1.0))
    record(request, max_mass_dev=dev, positive=positive)
    assert positive
    assert dev < 1e-10


def _u0(g, amplitude):
    x = g.nodes
    return pj.VelocityField(g, amplitude * np.exp(-x * x) * bump(x, g.support))


@pytest.mark.criterion(8, "gPJ as a geodesic flow")
def test_criterion_8(request):
    residual, orders = 0.0, []
    for alpha in (-1.0, 0.0, 0.5, 2.0):
        seq = []
        for n, dt in ((256, 4e-3), (512, 2e-3), (1024, 1e-3)):
            g = make_line(n, 10.0, 4.0)
            ts = np.arange(0.0, 0.5 + dt / 2, dt)
            seq.append(pj.gpj_residual(alpha, pj.gpj_solve(alpha, _u0(g, 0.5), ts), ts))
        residual = max(residual, seq[-1])
        orders += [math.log2(seq[0] / seq[1]), math.log2(seq[1] / seq[2])]

    g = make_line(1024, 10.0, 4.0)
    x = g.nodes
    w = 1 + 0.4 * np.sin(2 * x) * np.exp(-x * x) * bump(x, g.support)
    phi = pj.theta_inverse(Density(g, w), strict=False)
    U = np.exp(-(x - 0.5) ** 2) * np.cos(x) * bump(x, g.support)
    V = np.exp(-(x + 0.3) ** 2 / 1.5) * bump(x, g.support)
    iso = 0.0
    for alpha in (-1.0, 0.0, 0.5, 1.0, 2.0):
        lhs = pj.alpha_h1_inner(alpha, phi, U, V)
        rhs = mt.alpha_inner(alpha, pj.theta_map(phi), pj.dtheta(phi, U), pj.dtheta(phi, V))
        iso = max(iso, abs(lhs - rhs))

    small = _u0(g, 0.05)
    global_ok = pj.gpj_blowup_time(1.0, small) == math.inf
    try:
        pj.gpj_solve(1.0, small, np.linspace(0.0, 100.0, 11))
    except GeodesicEscape:
        global_ok = False

    big = _u0(g, 2.0)
    dt = 1e-3
    gap = 0.0
    for alpha in (0.0, 2.0):
        T = pj.gpj_blowup_time(alpha, big)
        ts = np.arange(0.0, T + 2 * dt, dt)
        try:
            pj.gpj_solve(alpha, big, ts[ts > T - 5 * dt])
            gap = math.inf
        except GeodesicEscape as exc:
            gap = max(gap, abs(exc.escape_time - T))
    record(request, max_residual=residual, min_order=min(orders), isometry=iso,
           alpha1_global=global_ok, escape_gap=gap)
    assert residual < 1e-3
    assert min(orders) >= 2
    assert iso < 1e-6
    assert global_ok
    assert gap <= dt


@pytest.mark.criterion(9, "Exponential-family geometry from expectations")
def test_criterion_9(request):
    rng = np.random.default_rng(109)
    cases = [(pm.categorical_family(3), [rng.normal(size=2) for _ in range(5)]),
             (pm.gaussian_natural_family(),
              [np.array([0.5 * rng.normal(), -0.5 - rng.random()]) for _ in range(5)])]
    g_gap = c_gap = 0.0
    flat = True
    for fam, probes in cases:
        for th in probes:
            G = fam.hess(th)
            F3 = fam.third(th)
            g_gap = max(g_gap, float(np.max(np.abs(pm.fisher_info(fam.model, th) - G))))
            for alpha in (-2.0, -1.0, 0.0, 0.5, 1.0, 3.0):
                expect = pm.alpha_christoffel(fam.model, alpha, th)
                c_gap = max(c_gap, float(np.max(np.abs(expect - (1 - alpha) / 2 * F3))))
            for alpha in (1.0, -1.0):
                flat &= bool(np.all(pm.expfam_geometry(fam, alpha, th)[2] == 0))
    record(request, fisher_gap=g_gap, christoffel_gap=c_gap, flat_at_pm1=flat)
    assert g_gap < 1e-4
    assert c_gap < 1e-4
    assert flat


@pytest.mark.criterion(10, "Metricity decision for two-parameter families")
def test_criterion_10(request):
    rng = np.random.default_rng(110)
    cat = pm.categorical_family(3)
    probes = [rng.normal(size=2) for _ in range(5)]
    nonmetric = pm.metricity_check(cat, 0.5, probes).verdict is pm.Verdict.NON_METRIC
    expected = {1.0: pm.Verdict.METRIC_TRIVIALLY, 0.0: pm.Verdict.METRIC_FR, -1.0: pm.Verdict.METRIC_DUAL}
    verdicts_ok, compat = True, 0.0
    for alpha, verdict in expected.items():
        v = pm.metricity_check(cat, alpha, probes)
        verdicts_ok &= v.verdict is verdict
        metric = pm.verdict_metric(cat, v.verdict)
        compat = max(compat, max(pm.compatibility_residual(cat, alpha, metric, th) for th in probes))
    # the dual metric is the matrix square of Hess F
    dual = max(pm.compatibility_residual(cat, -1.0, lambda t: cat.hess(t) @ cat.hess(t), th) for th in probes)
    trans = pm.gaussian_translation_family(2, 1_000_000, 0)
    flat = all(pm.metricity_check(trans, a, [[0.0, 0.0], [0.7, -0.4]]).verdict is pm.Verdict.FLAT_ALL_ALPHA
               for a in (-2.0, -1.0, 0.0, 0.5, 1.0, 3.0))
    gam, se = pm.alpha_christoffel(trans.model, 0.5, [0.3, -0.2], with_error=True)
    off = gam.copy()
    off[0, 0, 0] = off[1, 1, 1] = 0.0
    off_max, tol = float(np.max(np.abs(off))), pm.mc_tolerance(se)
    record(request, nonmetric=nonmetric, metric_verdicts=verdicts_ok, compat_residual=max(compat, dual),
           flat_all_alpha=flat, offdiag=off_max, mc_tol=tol)
    assert nonmetric
    assert verdicts_ok
    assert max(compat, dual) < 1e-4
    assert flat
    assert off_max < tol
