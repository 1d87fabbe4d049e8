import cmath
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from nls.criteria import FormulaId, Status
from nls.errors import ArgumentOutOfDomain, BranchViolation, CoincidentPoints
from nls.potentials import Potential
from nls.resolvent import (
    ResolventParams,
    hs_geometric,
    hs_norm,
    inner_G,
    kernel_prefactor,
    resolvent_kernel,
    thm5_verdict,
    zeta_branch,
)
from oracles import mc_geometric_s2


# branch of zeta
def test_zeta_at_zero():
    assert zeta_branch(0, 1.5, 1.0) == (0j, 0j)


@pytest.mark.parametrize("lam", [0.25, 0.5, 3.0])
def test_zeta_classical_branch(lam):
    zeta, root = zeta_branch(-lam, 2.0, 1.0)
    assert zeta == pytest.approx(-lam, abs=1e-14)
    assert root == pytest.approx(1j * math.sqrt(lam), abs=1e-14)


def test_zeta_polar_oracle():
    zeta, root = zeta_branch(1j, 1.5, 1.0)
    expected = complex(mpmath.power(mpmath.mpc(1, 1), mpmath.mpf(4) / 3)) - 1.0
    assert abs(zeta - expected) < 1e-14
    assert root.imag > 0
    assert abs(root * root - zeta) < 1e-14


@pytest.mark.parametrize("z", [0.3j, -0.3j, 2 + 1j, -0.5 - 0.2j, 5j])
def test_zeta_solves_dispersion(z):
    a, m = 1.5, 1.0
    zeta, root = zeta_branch(z, a, m)
    # principal power inverts on the returned branch
    assert abs((zeta + m ** (2 / a)) ** (a / 2) - m - z) < 1e-12 * max(1.0, abs(z))
    assert root.imag > 0


def test_zeta_conjugate_symmetry():
    z1, r1 = zeta_branch(0.4 + 0.7j, 1.3, 2.0)
    z2, r2 = zeta_branch(0.4 - 0.7j, 1.3, 2.0)
    assert z2 == pytest.approx(z1.conjugate(), abs=1e-14)
    assert r2 == pytest.approx(-r1.conjugate(), abs=1e-14)


def test_zeta_branch_violations():
    with pytest.raises(BranchViolation):
        zeta_branch(-2.0 + 0.1j, 1.5, 1.0)
    with pytest.raises(BranchViolation):
        zeta_branch(0.5, 1.5, 1.0)


def test_params_validation():
    for kw in ({"alpha": 2.0}, {"alpha": 1.0}, {"alpha": 1.5, "m": 0.0}, {"alpha": 1.5, "s": 1.0},
               {"alpha": 1.5, "z": 0.5}):
        with pytest.raises(ArgumentOutOfDomain):
            ResolventParams(**kw)
    ResolventParams(2.0, s=0.0, strict=False)


# kernel
def test_kernel_at_zero_energy():
    a, m, s = 1.5, 2.0, 1.3
    x, y = np.array([0.3, -1.0, 2.0]), np.array([1.0, 0.5, -0.2])
    k = resolvent_kernel(x, y, ResolventParams(a, m, s))
    dist = np.linalg.norm(x - y)
    expected = (1 + x @ x) ** (-s / 2) * (1 + y @ y) ** (-s / 2) * m ** (2 / a - 1) / (2 * a * math.pi * dist)
    assert k == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("m", [0.5, 1.0, 3.0])
def test_kernel_newton_limit(m):
    p = ResolventParams(2.0, m, 0.0, strict=False)
    x, y = np.array([1.0, 2.0, 3.0]), np.array([0.0, 0.0, 0.5])
    assert resolvent_kernel(x, y, p) == pytest.approx(1 / (4 * math.pi * np.linalg.norm(x - y)), rel=1e-14)


def test_kernel_decreasing_in_s():
    x, y = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 1.0])
    vals = [abs(resolvent_kernel(x, y, ResolventParams(1.5, 1.0, s, 0.2j))) for s in (1.1, 1.5, 2.0, 3.0)]
    assert all(u > v for u, v in zip(vals, vals[1:]))


def test_kernel_coincident_points():
    with pytest.raises(CoincidentPoints):
        resolvent_kernel([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], ResolventParams(1.5))


def test_kernel_decays_off_axis():
    p = ResolventParams(1.5, 1.0, 2.0, 1j)
    _, root = zeta_branch(p.z, p.alpha, p.m)
    x = np.zeros(3)
    k1 = resolvent_kernel(x, [1.0, 0, 0], p)
    k2 = resolvent_kernel(x, [2.0, 0, 0], p)
    assert abs(k2) < abs(k1)
    assert abs(kernel_prefactor(p)) == pytest.approx(abs(1j + 1) ** (2 / 1.5 - 1) / (3 * math.pi), rel=1e-14)
    assert cmath.isclose(k1 / k2, 2 * (2 / 5) ** -1 * cmath.exp(-1j * root), rel_tol=1e-12)


# inner integral and its bound
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("rho,s,kappa", [(0.3, 2.0, 0.0), (2.0, 1.3, 0.0), (5.0, 3.0, 0.0), (1.0, 2.0, 0.4)])
def test_inner_G_matches_direct_2d_quadrature(rho, s, kappa):
    def f(mu, r):
        t2 = rho * rho + r * r - 2 * rho * r * mu
        return 2 * math.pi * r * r * (1 + r * r) ** (-s) * math.exp(-2 * kappa * math.sqrt(t2)) / t2

    # split at r = rho where the integrand has its log singularity
    v1, _ = integrate.dblquad(f, 0, rho, -1, 1, epsabs=1e-12, epsrel=1e-10)
    v2, _ = integrate.dblquad(f, rho, 60 * max(rho, 1.0), -1, 1, epsabs=1e-12, epsrel=1e-10)
    tail = 4 * math.pi * integrate.quad(lambda r: (1 + r * r) ** (-s) * math.exp(-2 * kappa * r), 60 * max(rho, 1.0), np.inf)[0]
    assert inner_G(rho, s, kappa) == pytest.approx(v1 + v2 + tail, rel=2e-4)


@pytest.mark.parametrize("s", [1.2, 1.4, 2.0, 3.0])
def test_inner_G_tail_bound(s):
    s_prime = 0.5 * (1.0 + min(s, 1.5))
    fit = np.geomspace(0.1, 100.0, 30)
    G = np.array([inner_G(float(r), s) for r in fit])
    bound = fit ** (1 - 2 * s) + fit ** (1 - 2 * s_prime)
    C = float(np.max(G / bound))
    assert np.all(G <= C * bound * (1 + 1e-12))
    far = np.geomspace(100.0, 1e4, 10)
    G_far = np.array([inner_G(float(r), s) for r in far])
    assert np.all(G_far <= C * (far ** (1 - 2 * s) + far ** (1 - 2 * s_prime)))


# Hilbert-Schmidt norm
def test_hs_geometric_fourier_closed_form():
    # at s = 2: <x>^-4 has Fourier transform pi^2 e^-|k|, and |x|^-2 has 2 pi^2 / |k|
    assert hs_geometric(2.0) == pytest.approx(math.pi**4 / 4, rel=1e-10)


def test_hs_norm_monte_carlo():
    mean, sigma = mc_geometric_s2(10**7)
    geo = hs_geometric(2.0)
    assert abs(geo - mean) < 3 * sigma
    p = ResolventParams(1.5, 1.0, 2.0)
    assert hs_norm(p) == pytest.approx(abs(kernel_prefactor(p)) * math.sqrt(geo), rel=1e-14)


def test_hs_norm_mass_scaling():
    a, s = 1.5, 2.0
    base = hs_norm(ResolventParams(a, 1.0, s))
    for m in (0.5, 2.0):
        # the kernel prefactor is m^(2/a - 1) / (2 a pi) at z = 0
        assert hs_norm(ResolventParams(a, m, s)) / base == pytest.approx(m ** (2 / a - 1), rel=1e-12)


def test_hs_geometric_independent_of_alpha_and_mass():
    vals = [hs_norm(ResolventParams(a, m, 1.7)) / abs(kernel_prefactor(ResolventParams(a, m, 1.7)))
            for a, m in ((1.2, 0.5), (1.5, 1.0), (1.9, 3.0))]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-14)


def test_hs_norm_decreasing_in_s():
    vals = [hs_norm(ResolventParams(1.5, 1.0, s)) for s in (1.1, 1.5, 2.0, 3.0)]
    assert all(u > v for u, v in zip(vals, vals[1:]))


@pytest.mark.parametrize("z", [0.5j, -0.5j, 1 + 1j, 2j, -0.3 + 0.2j])
def test_hs_norm_nonreal_bound(z):
    a, m = 1.5, 1.0
    h0 = hs_norm(ResolventParams(a, m, 2.0))
    hz = hs_norm(ResolventParams(a, m, 2.0, z))
    assert hz <= h0 * (abs(z + m) / m) ** (2 / a - 1) * (1 + 1e-10)


def test_hs_norm_continuity_at_zero():
    h0 = hs_norm(ResolventParams(1.5, 1.0, 2.0))
    errs = [abs(hs_norm(ResolventParams(1.5, 1.0, 2.0, 1j * e)) - h0) for e in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(u > v for u, v in zip(errs, errs[1:]))
    assert errs[-1] < 0.02 * h0


def test_hs_norm_requires_s_above_one():
    with pytest.raises(ArgumentOutOfDomain):
        hs_norm(ResolventParams(1.5, 1.0, 0.5, strict=False))


# verdict
def test_thm5_zero_potential_holds():
    rep = thm5_verdict(Potential.inverse_power(0.0, 3.0), ResolventParams(1.5, 1.0, 1.5))
    assert rep.verdict is Status.HOLDS
    assert rep.formula_id is FormulaId.THM5


def test_thm5_example_coupling_scan():
    nu = 1.5
    p = ResolventParams(1.5, 1.0, nu)
    c_star = 1.0 / hs_norm(p)
    below = thm5_verdict(Potential.inverse_power(0.5 * c_star, 2 * nu), p)
    assert below.verdict is Status.HOLDS
    assert below.intermediates["product"] == pytest.approx(0.5, rel=1e-10)
    assert thm5_verdict(Potential.inverse_power(c_star, 2 * nu), p).verdict is Status.INCONCLUSIVE
    assert thm5_verdict(Potential.inverse_power(2 * c_star, 2 * nu), p).verdict is Status.FAILS
    assert any("exponent" in n for n in below.notes)


def test_thm5_rejects_positive_potential():
    with pytest.raises(ArgumentOutOfDomain):
        thm5_verdict(Potential.positive_bump(1.0, 2.0), ResolventParams(1.5, 1.0, 1.5))
