import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alphafr import ContractViolation, DimensionError, DomainError
from alphafr.geodesics_dens import DensGeodesic
from alphafr.grid import Density, Tangent, make_periodic
from alphafr.metrics import (alpha_divergence, alpha_inner, divergence_mixed_hessian, energy_drift,
                             fr_inner, path_energy, tilde_g1_inner)
from alphafr.sampling import random_density, random_tangent

from conftest import fine_quad

TWO_PI = 2 * np.pi


def test_fr_constant_fields(g64):
    one = Tangent(g64, np.ones(64))
    assert fr_inner(g64.reference(), one, one) == pytest.approx(1.0, abs=1e-15)


def test_fr_orthogonal_harmonics(g64):
    x = g64.nodes
    a, b = Tangent(g64, np.sin(TWO_PI * x)), Tangent(g64, np.cos(TWO_PI * x))
    assert abs(fr_inner(g64.reference(), a, b)) < 1e-12


def test_fr_against_fine_quadrature():
    g = make_periodic(512)
    mu = Density(g, 1 + 0.5 * np.sin(TWO_PI * g.nodes))
    one = Tangent(g, np.ones(g.n))
    oracle = fine_quad(lambda x: 1 / (1 + 0.5 * np.sin(TWO_PI * x)))
    # exact value is 1/sqrt(1 - 0.25)
    assert oracle == pytest.approx(1 / np.sqrt(0.75), abs=1e-12)
    assert fr_inner(mu, one, one) == pytest.approx(oracle, abs=1e-8)


def test_alpha_inner_examples(g64, rng):
    mu = random_density(g64, rng, prob=False)
    a, b = random_tangent(g64, rng), random_tangent(g64, rng)
    assert alpha_inner(0.0, mu, a, b) == pytest.approx(fr_inner(mu, a, b), rel=1e-15, abs=1e-15)
    one = Tangent(g64, np.ones(64))
    for alpha in (-3.0, -1.0, 0.5, 2.0, 7.5):
        assert alpha_inner(alpha, g64.reference(), one, one) == pytest.approx(1.0, abs=1e-15)


def test_alpha_inner_fine_quadrature():
    g = make_periodic(512)
    mu = Density(g, 1 + 0.5 * np.sin(TWO_PI * g.nodes))
    one = Tangent(g, np.ones(g.n))
    oracle = fine_quad(lambda x: (1 + 0.5 * np.sin(TWO_PI * x)) ** -3)
    assert alpha_inner(2.0, mu, one, one) == pytest.approx(oracle, abs=1e-8)


def test_grid_mismatch_raises(g64):
    other = make_periodic(32)
    with pytest.raises(DimensionError):
        fr_inner(g64.reference(), Tangent(other, np.ones(32)), Tangent(g64, np.ones(64)))


def test_tilde_g1_examples():
    g = make_periodic(512)
    x = g.nodes
    ref = g.reference()
    r = np.sin(TWO_PI * x) + 0.3 * np.cos(4 * np.pi * x)
    a = Tangent(g, r)
    assert tilde_g1_inner(ref, a, a) == pytest.approx(fr_inner(ref, a, a), abs=1e-14)

    h = 1 + 0.3 * np.sin(TWO_PI * x)
    mu = Density(g, h)
    mu = Density(g, h / mu.mass())
    flat = Tangent(g, 0.0 * mu.h)
    assert tilde_g1_inner(mu, flat, flat) == 0.0

    ra = np.sin(TWO_PI * x) * h
    ra = ra - np.mean(ra)
    b = Tangent(g, ra)
    hf = lambda s: 1 + 0.3 * np.sin(TWO_PI * s)
    m = fine_quad(hf)
    raf = lambda s: np.sin(TWO_PI * s) * hf(s) - fine_quad(lambda y: np.sin(TWO_PI * y) * hf(y))
    q = lambda s: raf(s) / (hf(s) / m)
    oracle = fine_quad(lambda s: q(s) ** 2) - fine_quad(q) ** 2
    assert tilde_g1_inner(mu, b, b) == pytest.approx(oracle, abs=1e-8)


def test_tilde_g1_contract(g64):
    mu = Density(g64, np.full(64, 2.0))
    a = Tangent(g64, np.sin(TWO_PI * g64.nodes))
    with pytest.raises(ContractViolation):
        tilde_g1_inner(mu, a, a)
    with pytest.raises(ContractViolation):
        tilde_g1_inner(g64.reference(), Tangent(g64, np.ones(64)), a)


def test_divergence_examples(g64, rng):
    ref = g64.reference()
    for alpha in (-0.9, -0.3, 0.0, 0.4, 0.95):
        mu = random_density(g64, rng, prob=False)
        assert abs(alpha_divergence(alpha, mu, mu)) < 1e-12
    for c in (0.25, 1.0, 3.0):
        nu = Density(g64, np.full(64, c))
        # 2c + 2 - 4 sqrt(c) by hand for constant densities
        assert alpha_divergence(0.0, ref, nu) == pytest.approx(2 * (1 - np.sqrt(c)) ** 2, abs=1e-13)


def test_divergence_domain(g64):
    ref = g64.reference()
    for alpha in (-1.0, 1.0, 2.0):
        with pytest.raises(DomainError):
            alpha_divergence(alpha, ref, ref)


def test_divergence_nonnegative(g64):
    r = np.random.default_rng(5)
    for _ in range(100):
        alpha = r.uniform(-0.99, 0.99)
        mu = random_density(g64, r, 0.6, prob=False)
        nu = Density(g64, random_density(g64, r, 0.6).h * r.uniform(0.2, 5))
        assert alpha_divergence(alpha, mu, nu) >= -1e-14


def test_divergence_induces_fisher_rao(g64, rng):
    for alpha in (-0.7, 0.0, 0.6):
        mu = random_density(g64, rng, prob=False)
        b, c = random_tangent(g64, rng), random_tangent(g64, rng)
        assert divergence_mixed_hessian(alpha, mu, b, c) == pytest.approx(-fr_inner(mu, b, c), abs=1e-5)


def test_path_energy_examples(g64, rng):
    mu0 = random_density(g64, rng, prob=False)
    zero = Tangent(g64, np.zeros(64))
    assert np.all(path_energy(0.3, [(mu0, zero)] * 4) == 0)
    with pytest.raises(ContractViolation):
        path_energy(0.0, [])
    a = random_tangent(g64, rng, 0.3)
    path = [(Density(g64, mu0.h + t * a.r), a) for t in np.linspace(0, 1, 6)]
    e = path_energy(-1.0, path)
    np.testing.assert_allclose(e, np.dot(g64.weights, a.r ** 2), rtol=1e-14)


def test_energy_conserved_on_dens_geodesic(g128, rng):
    mu0 = random_density(g128, rng, prob=False)
    a = random_tangent(g128, rng, 0.4)
    geo = DensGeodesic(0.5, mu0, a)
    ts = np.linspace(0, 0.5 * min(geo.blowup_time, 2.0), 11)
    assert energy_drift(path_energy(0.5, geo.sample(ts))) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.integers(0, 2**31 - 1))
def test_inner_products_symmetric_bilinear_positive(alpha, seed):
    g = make_periodic(32)
    r = np.random.default_rng(seed)
    mu = random_density(g, r, prob=False)
    a, b, c = (random_tangent(g, r) for _ in range(3))
    s = r.normal()
    assert alpha_inner(alpha, mu, a, b) == alpha_inner(alpha, mu, b, a)
    lhs = alpha_inner(alpha, mu, a * s + c, b)
    rhs = s * alpha_inner(alpha, mu, a, b) + alpha_inner(alpha, mu, c, b)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
    assert alpha_inner(alpha, mu, a, a) > 0
    assert alpha_inner(0.0, mu, a, b) == pytest.approx(fr_inner(mu, a, b), rel=1e-15, abs=1e-15)
