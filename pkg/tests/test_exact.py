import math

import numpy as np
import pytest

from trunclap.exact import (
    ball_solution,
    bump_solution,
    gaussian_limit_profile,
    gaussian_target,
    integrate_radial_ode,
    max_amplitude,
    pde_residual,
    pplus_supersolution,
    radial_hessian_eigs,
    rescaled_cap,
    subsolution_envelope,
    supersolution_envelope,
    RadialProfile,
)
from trunclap.geometry import CRDomain

from independent import central_derivative, central_second_derivative


def unit_disk():
    return CRDomain(1.0, [[0.0, 0.0]])


def lens_domain():
    return CRDomain(1.0, [[0.3, 0.0], [-0.3, 0.0]])


# ---------------------------------------------------------------------------
# ball and bump solutions
# ---------------------------------------------------------------------------

def test_ball_solution_center_value():
    u = ball_solution(0.5, 1, 1.0, [0.0, 0.0])
    assert u([0.0, 0.0]) == 0.0625
    assert max_amplitude(0.5, 1, 1.0) == 0.0625


def test_ball_solution_boundary_value():
    u = ball_solution(0.7, 2, 1.3, [0.2, -0.1, 0.4])
    x = np.array([0.2, -0.1, 0.4]) + 1.3 * np.array([1.0, 0.0, 0.0])
    assert u(x) == 0.0
    assert u(x + np.array([0.5, 0, 0])) == 0.0


def test_ball_solution_rejects_superlinear():
    for p in (1.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            ball_solution(p, 1, 1.0, [0.0, 0.0])


@pytest.mark.parametrize("p,k,n", [(0.5, 1, 2), (0.5, 1, 3), (0.75, 2, 3), (0.3, 1, 2)])
def test_ball_solution_residual(p, k, n):
    u = ball_solution(p, k, 1.0, np.zeros(n))
    for r in np.linspace(0.02, 0.98, 50):
        res = pde_residual(u.profile, r, n, k, "minus", lambda v: v**p)
        assert abs(res) <= 1e-8


def test_bump_value_and_gradient():
    bump = bump_solution(0.5, 1, 0.5, [0.0, 0.0])
    assert bump([0.0, 0.0]) == (0.25 * 0.25) ** 2 == 0.00390625
    edge = np.array([0.5, 0.0])
    assert bump(edge) == 0.0
    np.testing.assert_allclose(bump.gradient(edge), [0.0, 0.0], atol=1e-12)
    # C^1 matching from inside: finite-difference slope along the radius -> 0
    eps = 1e-7
    inner = bump(edge - np.array([eps, 0.0]))
    assert inner / eps < 1e-5


def test_bump_residual():
    bump = bump_solution(0.5, 1, 0.5, [0.3, -0.2])
    for r in np.linspace(0.01, 0.49, 25):
        res = pde_residual(bump.profile, r, 2, 1, "minus", lambda v: math.sqrt(v))
        assert abs(res) <= 1e-8


# ---------------------------------------------------------------------------
# radial Hessian eigenvalues
# ---------------------------------------------------------------------------

def test_radial_hessian_identity_profile():
    prof = RadialProfile(lambda r: r * r / 2, lambda r: r, lambda r: 1.0, math.inf)
    np.testing.assert_allclose(radial_hessian_eigs(prof, 0.7, 4), np.ones(4))
    np.testing.assert_allclose(radial_hessian_eigs(prof, 0.0, 3), np.ones(3))


def test_gaussian_profile_derivatives_match_finite_differences():
    prof = gaussian_limit_profile(2)
    for r in (0.3, 1.0, 2.5):
        assert abs(prof.du(r) - central_derivative(prof.u, r)) <= 1e-7
        assert abs(prof.d2u(r) - central_second_derivative(prof.u, r)) <= 1e-7
        # u'/r = -u/k and u'' = u (r^2/k^2 - 1/k)
        assert abs(prof.du(r) / r + prof.u(r) / 2.0) <= 1e-12
        assert abs(prof.d2u(r) - prof.u(r) * (r * r / 4.0 - 0.5)) <= 1e-12


def test_ball_profile_first_order_identity():
    # for the convex-decreasing cap, the k-smallest sum equals k u'(r)/r
    u = ball_solution(0.5, 2, 1.0, np.zeros(4))
    for r in (0.2, 0.5, 0.9):
        eigs = radial_hessian_eigs(u.profile, r, 4)
        assert abs(eigs[:2].sum() - 2.0 * u.profile.du(r) / r) <= 1e-12


def test_gaussian_limit_values():
    prof = gaussian_limit_profile(2)
    assert prof.u(0.0) == 1.0
    for r in (0.5, 1.0, 3.0):
        assert abs(2.0 * prof.du(r) / r + prof.u(r)) == 0.0
    res = pde_residual(prof, 2.0, 3, 2, "minus", lambda v: v)
    assert abs(res) <= 1e-9


def test_radial_hessian_validation():
    prof = gaussian_limit_profile(1)
    with pytest.raises(ValueError):
        radial_hessian_eigs(prof, -1.0, 2)
    with pytest.raises(ValueError):
        radial_hessian_eigs(prof, 1.0, 1)


# ---------------------------------------------------------------------------
# envelopes
# ---------------------------------------------------------------------------

def test_supersolution_single_ball_equals_ball_solution(rng):
    dom = unit_disk()
    env = supersolution_envelope(dom, 0.5, 1)
    u = ball_solution(0.5, 1, 1.0, [0.0, 0.0])
    pts = rng.uniform(-0.7, 0.7, size=(100, 2))
    np.testing.assert_allclose(env(pts), u(pts), atol=1e-14)


def test_supersolution_lens_center_value():
    env = supersolution_envelope(lens_domain(), 0.5, 1)
    assert abs(env([0.0, 0.0]) - 0.05175625) <= 1e-15


def test_supersolution_vanishes_on_boundary():
    dom = lens_domain()
    env = supersolution_envelope(dom, 0.5, 1)
    # boundary points of the lens: on the sphere of one center, inside the other
    tip = np.array([0.0, np.sqrt(1.0 - 0.09)])
    side = np.array([0.7, 0.0])
    for x in (tip, side):
        assert abs(dom.margin(x)) <= 1e-12
        assert env(x) <= 1e-12


def test_subsolution_positive_and_below_supersolution(rng):
    dom = lens_domain()
    sub = subsolution_envelope(dom, 0.5, 1)
    sup = supersolution_envelope(dom, 0.5, 1)
    pts = rng.uniform(-0.7, 0.7, size=(400, 2))
    pts = pts[dom.margins(pts) > 0.01]
    sub_v = sub(pts)
    sup_v = sup(pts)
    assert np.all(sub_v > 0)
    assert np.all(sup_v - sub_v >= -1e-10)


def test_subsolution_lower_bound_at_samples():
    dom = lens_domain()
    z = np.array([[0.1, 0.2], [0.0, 0.0], [-0.3, 0.1]])
    sub = subsolution_envelope(dom, 0.5, 1, sample_points=z)
    for zi in z:
        delta = dom.boundary_distance(zi)
        assert sub(zi) >= (0.25 * delta**2) ** 2 - 1e-15


def test_subsolution_monotone_in_sampling(rng):
    dom = lens_domain()
    coarse_z = rng.uniform(-0.5, 0.5, size=(20, 2))
    dense_z = np.concatenate([coarse_z, rng.uniform(-0.6, 0.6, size=(200, 2))])
    coarse = subsolution_envelope(dom, 0.5, 1, sample_points=coarse_z)
    dense = subsolution_envelope(dom, 0.5, 1, sample_points=dense_z)
    pts = rng.uniform(-0.6, 0.6, size=(200, 2))
    pts = pts[dom.margins(pts) > 0]
    assert np.all(coarse(pts) <= dense(pts) + 1e-15)


def test_pplus_supersolution_values():
    dom = unit_disk()
    env = pplus_supersolution(dom, 0.5, 1)
    # tau = (R^(2p)/2k)^(1/(1-p)) = 0.25 for p=1/2, k=1, R=1
    assert abs(env([0.0, 0.0]) - 0.25) <= 1e-15
    assert env([1.0, 0.0]) == 0.0
    # equality case at the center: P_k^+(D^2 v) + v^p = -2k tau + tau^p R^(2p) = 0
    tau = 0.25
    assert abs(-2.0 * 1 * tau + tau**0.5 * 1.0) <= 1e-15


def test_pplus_supersolution_positivity_bound(rng):
    dom = lens_domain()
    env = pplus_supersolution(dom, 0.5, 1)
    tau = 0.25
    pts = rng.uniform(-0.6, 0.6, size=(300, 2))
    pts = pts[dom.margins(pts) > 0]
    deltas = dom.margins(pts)
    assert np.all(env(pts) >= tau * dom.radius * deltas - 1e-12)


def test_envelope_empty_member_set():
    with pytest.raises(ValueError):
        subsolution_envelope(unit_disk(), 0.5, 1, sample_points=np.array([[5.0, 5.0]]))


# ---------------------------------------------------------------------------
# anti-Hopf rate and rescaling identity of the explicit solution
# ---------------------------------------------------------------------------

def test_anti_hopf_slope_of_ball_solution():
    for p in (0.5, 0.75):
        u = ball_solution(p, 1, 1.0, [0.0, 0.0])
        dists = np.array([1e-3, 1e-4, 1e-5])
        vals = np.array([u([1.0 - d, 0.0]) for d in dists])
        slope = np.polyfit(np.log(dists), np.log(vals), 1)[0]
        assert abs(slope - 1.0 / (1.0 - p)) <= 0.02 / (1.0 - p)


def test_rescaling_identity_converges_to_gaussian():
    target = gaussian_target(1)
    xs = np.linspace(-2.0, 2.0, 81)
    pts = np.stack([xs, np.zeros_like(xs)], axis=1)
    errs = []
    for p in (0.5, 0.9, 0.99):
        cap = rescaled_cap(p, 1)
        errs.append(np.abs(cap(pts) - target(pts)).max())
    assert errs[0] > errs[1] > errs[2]


def test_rescaled_cap_matches_scaled_ball_solution(rng):
    # U_p(M^( (1-p)/2 ) x)/M with M = max amplitude equals the rescaled cap
    p, k = 0.7, 1
    u = ball_solution(p, k, 1.0, [0.0, 0.0])
    m = max_amplitude(p, k)
    cap = rescaled_cap(p, k)
    pts = rng.uniform(-1.5, 1.5, size=(50, 2))
    lhs = u(pts * m ** ((1.0 - p) / 2.0)) / m
    np.testing.assert_allclose(lhs, cap(pts), rtol=1e-10, atol=1e-12)


# ---------------------------------------------------------------------------
# radial ODE integrator
# ---------------------------------------------------------------------------

def test_ode_constant_forcing_exact():
    prof = integrate_radial_ode(lambda u: 1.0, 1.0, 2, 1.5, 1e-3)
    for r in (0.3, 0.9, 1.4):
        assert abs(prof.u(r) - (1.0 - r * r / 4.0)) <= 1e-12


def test_ode_linear_forcing_matches_gaussian():
    prof = integrate_radial_ode(lambda u: u, 1.0, 1, 3.0, 1e-3)
    gauss = gaussian_limit_profile(1)
    rs = np.linspace(0.0, 3.0, 61)
    err = max(abs(prof.u(r) - gauss.u(r)) for r in rs)
    assert err <= 1e-8


def test_ode_sqrt_forcing_first_zero():
    prof = integrate_radial_ode(lambda u: math.sqrt(max(u, 0.0)), 0.0625, 1, 1.5, 2e-4)
    assert prof.first_zero is not None
    assert abs(prof.first_zero - 1.0) <= 1e-6


def test_ode_profile_derivatives():
    prof = integrate_radial_ode(lambda u: u, 1.0, 1, 3.0, 1e-3, f_prime=lambda u: 1.0)
    gauss = gaussian_limit_profile(1)
    for r in (0.5, 1.5, 2.5):
        assert abs(prof.du(r) - gauss.du(r)) <= 1e-7
        assert abs(prof.d2u(r) - gauss.d2u(r)) <= 1e-7


def test_ode_validation():
    with pytest.raises(ValueError):
        integrate_radial_ode(lambda u: 1.0, 1.0, 1, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate_radial_ode(lambda u: -1.0, 1.0, 1, 1.0, 1e-2)
    with pytest.raises(ValueError):
        integrate_radial_ode(lambda u: 1.0 - u, 1.0, 1, 1.0, 1e-2)
