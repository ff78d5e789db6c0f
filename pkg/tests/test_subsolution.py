import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import solve_ivp

from chemoblowup.errors import DomainError, InfeasibleError, NotRepresentableError
from chemoblowup.exponents import Exponents, select_exponents
from chemoblowup.model import make_params, mass_from_profile, unit_sphere_area
from chemoblowup.subsolution import (THEORY, TOY, Trajectory, derive_constants, eval_subsolution,
                                     generate_initial_profiles, initial_mass_threshold,
                                     subsolution_terms, y_of_t)


def l_oracle(mu=1, R=1, n=3):
    with mp.workdps(40):
        Rn = mp.mpf(R) ** n
        return mu * Rn / (n * mp.e ** (1 / mp.e) * (Rn + 1))


def test_constant_chain_anchors(p0_theory):
    l = l_oracle()
    assert p0_theory.l == pytest.approx(float(l), rel=1e-14)
    assert p0_theory.l == pytest.approx(0.1153667, abs=1e-6)
    with mp.workdps(40):
        lam = 3 * l / (2 * mp.e ** 2 * mp.mpf("0.9"))
    assert p0_theory.Lambda == pytest.approx(float(lam), rel=1e-14)
    assert p0_theory.Lambda == pytest.approx(0.026022, abs=1e-5)
    assert p0_theory.c1 == p0_theory.c2 == 1.0


def test_theory_chain_is_feasible_in_log_space(p0_theory):
    sp = p0_theory
    assert sp.mode == THEORY
    assert all(sp.feasibility.values())
    assert sp.log_s0 == pytest.approx(-64.0, abs=0.1)
    assert sp.log_y0 / math.log(10) == pytest.approx(138.6, abs=0.1)
    assert sp.log_theta > sp.log_theta0
    assert sp.log_T == pytest.approx(-sp.delta * sp.log_y0 - math.log(sp.delta * sp.Lambda))
    assert sp.y0 == math.inf or sp.y0 > 1e138
    assert all(math.isfinite(lg) for _, _, lg, _ in sp.as_records())


def test_toy_overrides_are_labelled(p0_toy):
    assert p0_toy.mode == TOY
    assert p0_toy.y0 == pytest.approx(1e3)
    assert p0_toy.theta == pytest.approx(1.0)
    assert not p0_toy.feasibility["theta_above_theta0"]


def test_c_constants_for_unequal_exponents(p0):
    sp = derive_constants(p0.with_exponents(1.4, 1.05), Exponents(0.2, 0.05, 0.4))
    assert sp.c1 == pytest.approx(1.0) and sp.c2 == pytest.approx(0.25)


def test_degenerate_radius_is_infeasible():
    with pytest.raises(InfeasibleError, match="l = exp"):
        derive_constants(make_params(R=1e-200), Exponents(0.1, 0.1, 0.45))


def test_toy_blowup_time_and_ode():
    traj = Trajectory.from_values(1000.0, 0.45, 0.026022)
    assert traj.T == pytest.approx(3.8145, abs=1e-3)
    assert y_of_t(0.0, traj)[0] == pytest.approx(1000.0, rel=1e-15)
    t_end = 0.99 * traj.T
    sol = solve_ivp(lambda t, y: 0.026022 * y ** 1.45, (0, t_end), [1000.0], method="DOP853",
                    rtol=1e-12, atol=1e-12, dense_output=True)
    ts = np.linspace(0, t_end, 200)
    y, _ = y_of_t(ts, traj)
    np.testing.assert_allclose(y, sol.sol(ts)[0], rtol=1e-6)
    assert np.all(np.diff(y) > 0)


def test_trajectory_derivative():
    traj = Trajectory.from_values(1000.0, 0.45, 0.026022)
    t, h = 1.3, 1e-4
    fd = (y_of_t(t + h, traj)[0] - y_of_t(t - h, traj)[0]) / (2 * h)
    y = y_of_t(t, traj)[0]
    assert fd == pytest.approx(0.026022 * y ** 1.45, rel=1e-7)
    assert math.exp(traj.log_y_prime(math.log(y))) == pytest.approx(0.026022 * y ** 1.45)


def test_trajectory_domain():
    traj = Trajectory.from_values(1000.0, 0.45, 0.026022)
    with pytest.raises(DomainError):
        y_of_t(traj.T, traj)
    with pytest.raises(DomainError):
        y_of_t(-1.0, traj)


def test_kink_value_and_slope(p0_toy):
    sp = p0_toy
    y, l = 1000.0, sp.l
    want = l * y ** -0.1
    assert want == pytest.approx(0.0578204, abs=1e-7)
    eps = 1e-13
    for s in (1 / y * (1 - eps), 1 / y * (1 + eps)):
        assert eval_subsolution(s, 0.0, "U", "0", sp) == pytest.approx(want, rel=1e-12)
        assert eval_subsolution(s, 0.0, "U", "s", sp) == pytest.approx(l * y ** 0.9, rel=1e-11)


def test_time_scaling(p0, ref_exp):
    damped = derive_constants(p0, ref_exp, y0=1e3, theta=1.0)
    plain = derive_constants(p0, ref_exp, y0=1e3, theta=0.0)
    s = np.array([1e-5, 1e-3, 0.2, 1.0])
    for order in ("0", "s", "ss"):
        a = eval_subsolution(s, 0.5, "U", order, damped)
        b = eval_subsolution(s, 0.5, "U", order, plain)
        np.testing.assert_allclose(a, math.exp(-0.5) * b, rtol=1e-14)


def test_derivatives_match_finite_differences(p0_toy):
    sp = p0_toy
    s = np.array([2e-4, 5e-3, 0.1, 0.7])
    t, h = 0.8, 1e-5
    for which in ("U", "W"):
        f = lambda s_, t_: eval_subsolution(s_, t_, which, "0", sp)
        ft = (f(s, t + h) - f(s, t - h)) / (2 * h)
        np.testing.assert_allclose(eval_subsolution(s, t, which, "t", sp), ft, rtol=1e-6)
        hs = 1e-6 * s
        fs = (f(s + hs, t) - f(s - hs, t)) / (2 * hs)
        np.testing.assert_allclose(eval_subsolution(s, t, which, "s", sp), fs, rtol=1e-7)
        g = lambda s_: eval_subsolution(s_, t, which, "s", sp)
        fss = (g(s + hs) - g(s - hs)) / (2 * hs)
        np.testing.assert_allclose(eval_subsolution(s, t, which, "ss", sp), fss, rtol=1e-6)


def test_eval_domain_errors(p0_toy):
    with pytest.raises(DomainError):
        eval_subsolution(1.5, 0.0, "U", "0", p0_toy)
    with pytest.raises(DomainError):
        eval_subsolution(0.5, p0_toy.T, "U", "0", p0_toy)
    with pytest.raises(DomainError):
        eval_subsolution(1e-3, 0.0, "U", "ss", p0_toy)
    with pytest.raises(ValueError):
        eval_subsolution(0.5, 0.0, "V", "0", p0_toy)


def test_mass_threshold(p0_toy):
    r = np.linspace(0, 1, 100)
    M1, M2 = initial_mass_threshold(r, p0_toy)
    assert M1[0] == 0 and M2[0] == 0
    assert np.all(np.diff(M1) > 0)
    assert M1[-1] <= unit_sphere_area(3) * 1.0 / 3
    np.testing.assert_array_equal(M1, M2)


def test_boundary_bound_holds_in_log_space(p0_theory):
    sp = p0_theory
    fr = np.linspace(0, 0.999, 50)
    log_y = sp.trajectory.log_y_at_fraction(fr)
    theta_t = np.exp(np.log(fr + 1e-300) + sp.log_T + sp.log_theta)
    for which in ("U", "W"):
        phi = subsolution_terms(which, 0.0, log_y, theta_t, sp).phi.log
        assert np.all(phi <= math.log(sp.mu_star_up / 3))


def test_divergence_at_origin(p0_toy):
    sp = p0_toy
    ts = sp.T * np.array([0.1, 0.5, 0.9, 0.99])
    for t in ts:
        y = y_of_t(t, sp.trajectory)[0]
        centre = 3 * eval_subsolution(0.0, t, "U", "s", sp)
        if sp.theta * t <= 1:
            assert centre >= sp.l / math.e * y ** 0.9
    late = 3 * eval_subsolution(0.0, 0.999999 * sp.T, "U", "s", sp)
    assert late > 1e6


def test_initial_profiles(p0_toy):
    sp = p0_toy
    u0, w0 = generate_initial_profiles(sp)
    assert u0.values[0] == pytest.approx(3 * sp.l * 1000 ** 0.9, rel=1e-12)
    assert u0.values[0] == pytest.approx(173.46, abs=0.01)
    np.testing.assert_array_equal(u0.values, w0.values)
    s = np.concatenate([np.geomspace(1e-6, 1, 200), [1e-3]])
    U = mass_from_profile(u0, s, 3)
    np.testing.assert_allclose(U, eval_subsolution(s, 0.0, "U", "0", sp), rtol=1e-6)


def test_theory_profiles_are_not_representable(p0):
    params = p0.with_exponents(1.4, 1.05)
    sp = derive_constants(params, select_exponents(1.4, 1.05, 3))
    assert sp.log_center_density > 709
    with pytest.raises(NotRepresentableError):
        generate_initial_profiles(sp)
