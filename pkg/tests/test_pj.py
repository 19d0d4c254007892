import math

import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from alphafr import ConfigurationError, ContractViolation, GeodesicEscape
from alphafr.grid import Density, make_line
from alphafr.metrics import alpha_inner
from alphafr.pj import (Diffeo1D, VelocityField, alpha_h1_inner, blowup_table, change_of_variables_residual,
                        d1, d2, d3, dtheta, gpj_blowup_time, gpj_residual, gpj_solve, theta_inverse,
                        theta_map)
from alphafr.sampling import bump


def dbump(x, width):
    s = np.asarray(x, dtype=float) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    si = s[inside]
    out[inside] = bump(x, width)[inside] * (-2 * si / (1 - si ** 2) ** 2) / width
    return out


def gauss_u0(x, amp=0.5, width=4.0):
    return amp * np.exp(-x * x) * bump(x, width)


def gauss_du0(x, amp=0.5, width=4.0):
    return amp * np.exp(-x * x) * (-2 * x * bump(x, width) + dbump(x, width))


def characteristics(alpha, t, amp=0.5, L=10.0, m=200001):
    """Solution along characteristics: u_x obeys a Riccati ODE with closed-form
    solution, and the Jacobian of the flow map follows from it."""
    y = np.linspace(-L, L, m)
    w0 = gauss_du0(y, amp)
    c = (1 - alpha) / 2
    if alpha == 1:
        w, jac = w0, np.exp(w0 * t)
    else:
        base = 1 + c * w0 * t
        w, jac = w0 / base, base ** (1 / c)
    X = -L + cumulative_trapezoid(jac, y, initial=0)
    U = cumulative_trapezoid(w * jac, y, initial=0)
    return X, U


def smooth_step(t):
    t = np.clip(t, 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1 / np.where(t > 0, t, 1)), 0.0)
    b = np.where(t < 1, np.exp(-1 / np.where(t < 1, 1 - t, 1)), 0.0)
    return a / (a + b)


@pytest.fixture(scope="module")
def line():
    return make_line(1024, 10.0, 4.0)


def test_stencils_exact_on_polynomials(line):
    x = line.nodes
    inner = slice(5, -5)
    np.testing.assert_allclose(d1(x ** 4, line.dx)[inner], 4 * x[inner] ** 3, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(d2(x ** 4, line.dx)[inner], 12 * x[inner] ** 2, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(d3(x ** 4, line.dx)[inner], 24 * x[inner], rtol=1e-6, atol=1e-6)


def test_stencil_orders(line):
    errs = []
    for n in (512, 1024):
        g = make_line(n, 10.0, 4.0)
        x = g.nodes
        f = np.sin(x)
        m = np.abs(x) < 5
        errs.append([np.max(np.abs(d1(f, g.dx) + 0 - np.cos(x))[m]),
                     np.max(np.abs(d2(f, g.dx) + np.sin(x))[m]),
                     np.max(np.abs(d3(f, g.dx) + np.cos(x))[m])])
    order = np.log2(np.array(errs[0]) / np.array(errs[1]))
    assert np.all(order > 3.5)


def test_theta_identity(line):
    np.testing.assert_array_equal(theta_map(Diffeo1D.identity(line)).h, 1.0)
    phi = theta_inverse(line.reference())
    np.testing.assert_allclose(phi.phi, line.nodes, atol=1e-12)


def test_theta_jacobian_rule():
    g = make_line(2048, 10.0, 4.0)
    x = g.nodes
    fine = np.linspace(-10, 10, 64 * 2047 + 1)
    w = 1 + smooth_step((3.0 - np.abs(fine)) / 2.0)
    phi_fine = -10 + cumulative_trapezoid(w, fine, initial=0)
    phi = Diffeo1D.from_phi(g, phi_fine[::64])
    h = theta_map(phi).h
    core = np.abs(x) <= 1
    np.testing.assert_allclose(h[core], 2.0, atol=1e-6)
    np.testing.assert_allclose(h[np.abs(x) > 3.01], 1.0, atol=1e-6)


def random_line_density(g, rng, amp=0.4):
    x = g.nodes
    p = sum(rng.normal() * np.sin(k * x + rng.uniform(0, 6)) for k in (1, 2, 3)) * bump(x, g.support)
    p = amp * p / np.max(np.abs(p))
    mu = Density(g, 1 + p)
    # balance the mass so that phi is the identity on both sides
    corr = np.dot(g.weights, p) / np.dot(g.weights, bump(x, g.support) ** 2)
    return Density(g, 1 + p - corr * bump(x, g.support) ** 2)


def test_theta_round_trips(line):
    r = np.random.default_rng(2)
    for _ in range(10):
        mu = random_line_density(line, r)
        phi = theta_inverse(mu)
        assert np.all(np.diff(phi.phi) > 0)
        np.testing.assert_allclose(theta_map(phi).h, mu.h, atol=1e-12)
        back = theta_inverse(theta_map(Diffeo1D.from_phi(line, phi.phi)))
        assert np.max(np.abs(back.phi - phi.phi)) < 1e-6
        assert phi.left_defect() < 1e-12
        assert abs(phi.right_shift()) < 1e-8


def test_theta_inverse_mass_contract(line):
    x = line.nodes
    mu = Density(line, 1 + 0.3 * bump(x, 4.0))
    with pytest.raises(ContractViolation):
        theta_inverse(mu)
    assert theta_inverse(mu, strict=False).right_shift() > 0


def test_theta_inverse_against_quadrature(line):
    mu = random_line_density(line, np.random.default_rng(5))
    fine = np.linspace(-10, 10, 32 * 1023 + 1)
    h_fine = np.interp(fine, line.nodes, mu.h)  # only used away from kinks below
    phi = theta_inverse(mu).phi
    oracle = -10 + cumulative_trapezoid(h_fine, fine, initial=0)[::32]
    assert np.max(np.abs(phi - oracle)) < 1e-3


def test_diffeo_contracts(line):
    x = line.nodes
    with pytest.raises(ContractViolation):
        Diffeo1D(line, -x, -np.ones(line.n))
    with pytest.raises(ConfigurationError):
        from alphafr.grid import make_periodic
        Diffeo1D.identity(make_periodic(16))


def test_change_of_variables(line):
    x = line.nodes
    mu = random_line_density(line, np.random.default_rng(1))
    phi = theta_inverse(mu)
    assert change_of_variables_residual(phi, lambda s: np.exp(-s * s)) < 1e-6


def test_h1_inner_at_identity():
    line = make_line(4096, 10.0, 4.0)
    x = line.nodes
    U, V = gauss_u0(x), np.exp(-(x - 0.3) ** 2) * bump(x, 4.0)
    dV = np.exp(-(x - 0.3) ** 2) * (-2 * (x - 0.3) * bump(x, 4.0) + dbump(x, 4.0))
    plain = np.dot(line.weights, gauss_du0(x) * dV)
    for alpha in (-1.0, 0.0, 0.5, 2.0):
        assert alpha_h1_inner(alpha, Diffeo1D.identity(line), U, V) == pytest.approx(plain, abs=1e-8)


def _psi(x):
    return x + 0.3 * np.sin(x) * bump(x, 3.0), 1 + 0.3 * (np.cos(x) * bump(x, 3.0) + np.sin(x) * dbump(x, 3.0))


def _phi(x):
    return x + 0.25 * np.sin(2 * x) * bump(x, 3.5), 1 + 0.25 * (2 * np.cos(2 * x) * bump(x, 3.5)
                                                               + np.sin(2 * x) * dbump(x, 3.5))


def _field(x):
    return np.exp(-x * x) * np.cos(x) * bump(x, 3.5)


def test_right_invariance_only_at_zero():
    g = make_line(4096, 10.0, 4.0)
    x = g.nodes
    phi_v, dphi = _phi(x)
    psi_v, dpsi = _psi(x)
    comp_v, dcomp_a = _phi(psi_v)
    phi = Diffeo1D(g, phi_v, dphi)
    composed = Diffeo1D(g, comp_v, dcomp_a * dpsi)
    U, V = _field(x), np.exp(-(x + 0.4) ** 2) * bump(x, 3.5)
    Up = _field(psi_v)
    Vp = np.exp(-(psi_v + 0.4) ** 2) * bump(psi_v, 3.5)
    base = alpha_h1_inner(0.0, phi, U, V)
    assert alpha_h1_inner(0.0, composed, Up, Vp) == pytest.approx(base, abs=1e-8)
    other = abs(alpha_h1_inner(0.5, composed, Up, Vp) - alpha_h1_inner(0.5, phi, U, V))
    assert other > 1e-4


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0, 2.0])
def test_pullback_isometry(alpha, line):
    x = line.nodes
    phi = theta_inverse(random_line_density(line, np.random.default_rng(7)))
    U = np.exp(-(x - 0.5) ** 2) * np.cos(x) * bump(x, 4.0)
    V = np.exp(-(x + 0.3) ** 2 / 1.5) * bump(x, 4.0)
    lhs = alpha_h1_inner(alpha, phi, U, V)
    rhs = alpha_inner(alpha, theta_map(phi), dtheta(phi, U), dtheta(phi, V))
    assert abs(lhs - rhs) < 1e-6


def test_gpj_zero_data(line):
    out = gpj_solve(0.0, VelocityField(line, np.zeros(line.n)), [0.0, 0.5, 1.0])
    assert all(np.max(np.abs(f.u)) < 1e-14 for f in out)


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 1.0, 2.0])
def test_gpj_matches_characteristics(alpha, line):
    x = line.nodes
    out = gpj_solve(alpha, VelocityField(line, gauss_u0(x)), [0.5])
    X, U = characteristics(alpha, 0.5)
    assert np.max(np.abs(out[0].u - np.interp(x, X, U))) < 1e-7


def test_gpj_alpha1_global(line):
    r = np.random.default_rng(3)
    x = line.nodes
    u0 = VelocityField(line, 0.05 * r.normal() * np.exp(-(x - r.uniform(-1, 1)) ** 2) * bump(x, 4.0))
    assert gpj_blowup_time(1.0, u0) == math.inf
    out = gpj_solve(1.0, u0, [0.0, 50.0, 100.0])
    assert np.all(np.isfinite(out[-1].u))


def test_gpj_residual_trivial(line):
    ts = [0.0, 0.1, 0.2]
    zero = [VelocityField(line, np.zeros(line.n), t) for t in ts]
    assert gpj_residual(0.0, zero, ts) == 0.0
    const = [VelocityField(line, np.full(line.n, 0.7), t) for t in ts]
    assert gpj_residual(0.5, const, ts) < 1e-10  # stencil roundoff only
    with pytest.raises(ConfigurationError):
        gpj_residual(0.0, zero[:2], ts[:2])


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 2.0])
def test_gpj_residual_and_refinement(alpha):
    res = []
    for n, dt in ((256, 4e-3), (512, 2e-3), (1024, 1e-3)):
        g = make_line(n, 10.0, 4.0)
        ts = np.arange(0.0, 0.5 + dt / 2, dt)
        traj = gpj_solve(alpha, VelocityField(g, gauss_u0(g.nodes)), ts)
        res.append(gpj_residual(alpha, traj, ts))
    assert res[-1] < 1e-3
    assert np.log2(res[0] / res[1]) >= 2 and np.log2(res[1] / res[2]) >= 2


def test_gpj_residual_rejects_wrong_alpha(line):
    ts = np.arange(0.0, 0.2 + 5e-4, 1e-3)
    traj = gpj_solve(0.0, VelocityField(line, gauss_u0(line.nodes)), ts)
    assert gpj_residual(2.0, traj, ts) > 1e-2


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 2.0])
def test_gpj_escapes_at_density_blowup(alpha, line):
    u0 = VelocityField(line, gauss_u0(line.nodes, amp=2.0))
    T = gpj_blowup_time(alpha, u0)
    assert math.isfinite(T)
    # Riccati blowup along the steepest characteristic: u0_x hits -2/(1-alpha)
    # at its minimum for alpha < 1 and at its maximum for alpha > 1
    slopes = gauss_du0(np.linspace(-4, 4, 400001), 2.0)
    steepest = slopes.min() if alpha < 1 else slopes.max()
    expected = -2 / ((1 - alpha) * steepest)
    dt = 1e-3
    ts = np.arange(0.0, T + 2 * dt, dt)
    with pytest.raises(GeodesicEscape) as info:
        gpj_solve(alpha, u0, ts[ts > T - 5 * dt])
    assert abs(info.value.escape_time - T) <= dt
    # the grid samples the extremal slope, so agreement is to within a time step
    assert abs(T - expected) < dt


def test_blowup_table(line):
    table = dict(blowup_table([-1.0, 0.0, 1.0, 2.0], VelocityField(line, gauss_u0(line.nodes))))
    assert table[1.0] == math.inf
    assert all(math.isfinite(table[a]) for a in (-1.0, 0.0, 2.0))
    # the exit time scales like 1/|1 - alpha|
    assert table[-1.0] == pytest.approx(table[0.0] / 2)
    assert table[2.0] == pytest.approx(table[0.0])
