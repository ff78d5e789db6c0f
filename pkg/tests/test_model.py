import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad, trapezoid

from chemoblowup.errors import InfeasibleError, InvalidParameterError
from chemoblowup.model import (MassState, ModelParams, RadialProfile, build_diffusion,
                               density_from_mass, make_params, mass_from_profile, mu_bounds,
                               recover_potentials, unit_sphere_area)


def test_diffusion_anchor_values():
    D = build_diffusion(1.0, 1.1, 1.0)
    assert D(1.0) == 1.0
    assert D(0.0) == pytest.approx(float(mp.mpf(0.5) ** mp.mpf(0.05)), rel=1e-14)
    assert build_diffusion(1.0, 1.000001)(7.3) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("k,m", [(1.0, 1.1), (2.5, 2.0), (0.3, 3.7)])
def test_diffusion_upper_bound(k, m):
    D = build_diffusion(k, m)
    s = np.array([1.0, 1.5, 2.0, 10.0, 100.0])
    assert np.all(D(s) <= k * s ** (m - 1) * (1 + 1e-14))
    assert np.all(np.diff(D(np.linspace(0, 50, 200))) >= 0)


def test_diffusion_log_matches_linear():
    D = build_diffusion(1.3, 1.7, 0.5)
    x = np.array([1e-3, 0.7, 4.0, 1e5])
    np.testing.assert_allclose(D.log_at(np.log(x)), np.log(D(x)), rtol=1e-13)
    assert D.log_at(1e4) == pytest.approx(math.log(1.3) + 0.35 * (2e4 - math.log(1.5)), rel=1e-12)


@pytest.mark.parametrize("k,m,reg", [(0.0, 1.1, 1.0), (1.0, 1.0, 1.0), (1.0, 1.2, 0.0)])
def test_diffusion_rejects_bad_input(k, m, reg):
    with pytest.raises(InvalidParameterError):
        build_diffusion(k, m, reg)


@pytest.mark.parametrize("kw", [dict(n=2), dict(R=0.0), dict(m1=1.0), dict(k2=-1.0),
                                dict(mu1=0.0)])
def test_params_validation(kw):
    with pytest.raises(InvalidParameterError):
        make_params(**kw)


def test_params_reject_diffusion_above_bound():
    p = make_params()
    with pytest.raises(InvalidParameterError):
        ModelParams(3, 1.0, 1.1, 1.1, 1.0, 1.0, lambda s: 2.0 + 0 * s, p.D2, 1.0, 1.0)


def test_unit_sphere_area():
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_sphere_area(4) == pytest.approx(2 * math.pi ** 2)


def test_mass_of_constant_density_is_exact():
    r = np.linspace(0, 1, 37)
    s = np.linspace(0, 1, 101)
    np.testing.assert_allclose(mass_from_profile(RadialProfile(r, np.ones_like(r)), s, 3),
                               s / 3, rtol=0, atol=1e-15)
    assert np.all(mass_from_profile(RadialProfile(r, np.zeros_like(r)), s, 3) == 0)


def test_mass_is_monotone_for_nonnegative_profiles():
    rng = np.random.default_rng(0)
    r = np.linspace(0, 1, 200)
    U = mass_from_profile(RadialProfile(r, rng.uniform(0, 5, r.size)), np.linspace(0, 1, 500), 3)
    assert np.all(np.diff(U) >= 0)


def test_mu_bounds():
    r = np.linspace(0, 1, 11)
    one, two = RadialProfile(r, np.ones_like(r)), RadialProfile(r, 2 * np.ones_like(r))
    p = make_params()
    assert mu_bounds(one, two, p) == pytest.approx((1, 2, 2, 1))
    assert mu_bounds(two, two, p)[2:] == pytest.approx((2, 2))
    fine = np.linspace(0, 1, 4001)
    want = 3 * quad(lambda x: x * x * 2 * (1 - x), 0, 1)[0]
    mu1 = mu_bounds(RadialProfile(fine, 2 * (1 - fine)), one, p)[0]
    assert want == pytest.approx(0.5, rel=1e-14)
    assert mu1 == pytest.approx(want, rel=1e-6)
    with pytest.raises(InfeasibleError):
        mu_bounds(RadialProfile(r, np.zeros_like(r)), one, p)


def test_density_of_linear_mass_is_constant():
    s = np.linspace(0, 1, 50) ** 2
    u, w = density_from_mass(MassState(s, s / 3, 0 * s), 3)
    np.testing.assert_allclose(u.values, 1.0, rtol=1e-12)
    assert np.all(w.values == 0)
    with pytest.raises(InvalidParameterError):
        density_from_mass(MassState(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2)), 3)


def test_density_round_trip_is_second_order():
    def err(N):
        s = np.linspace(0, 1, N + 1)
        r = s ** (1 / 3)
        u = 2 + np.cos(np.pi * s)
        U = mass_from_profile(RadialProfile(r, u), s, 3)
        back, _ = density_from_mass(MassState(s, U, U), 3)
        return np.max(np.abs(back.values - u)[1:-1])
    e1, e2, e3 = err(200), err(400), err(800)
    assert math.log2(e1 / e2) > 1.8 and math.log2(e2 / e3) > 1.8


def test_potentials_vanish_for_constant_data():
    s = np.linspace(0, 1, 65) ** 2
    p = make_params(mu1=1.5, mu2=0.7)
    v, z = recover_potentials(MassState(s, 1.5 * s / 3, 0.7 * s / 3), p)
    assert np.max(np.abs(v.values)) < 1e-14
    assert np.max(np.abs(z.values)) < 1e-14


def test_potentials_have_zero_average():
    s = np.linspace(0, 1, 301) ** 2
    W = s ** 2 * 3 / 3 / 2          # density 2 s, mean mass mu2 = 3 W(1) = 1.5
    p = make_params(mu2=1.5)
    v, _ = recover_potentials(MassState(s, s / 3, W), p)
    assert abs(trapezoid(v.values, s)) <= 1e-10 * np.max(np.abs(v.values))


def test_mass_state_validation():
    s = np.linspace(0, 1, 5)
    with pytest.raises(InvalidParameterError):
        MassState(s[::-1], s, s)
    with pytest.raises(InvalidParameterError):
        MassState(s, s[:3], s)
    st = MassState(s, s / 3, s / 3)
    assert st.is_monotone() and st.check_boundary(make_params())
    assert not MassState(s, s[::-1].copy(), s).is_monotone()


def test_profile_validation():
    with pytest.raises(InvalidParameterError):
        RadialProfile(np.array([0.1, 1.0]), np.ones(2))
    with pytest.raises(InvalidParameterError):
        RadialProfile(np.array([0.0, 1.0]), np.array([1.0, -1.0]))
    assert RadialProfile(np.array([0.0, 1.0]), np.array([1.0, -1.0]), signed=True).R == 1.0
