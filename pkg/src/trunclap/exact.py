"""Closed-form solutions, barriers and envelopes used as reference data.

Radial power caps ((R^2 - r^2) to a power), compactly supported bumps, the
Gaussian limit profile, sub/supersolution envelopes on intersections of
balls, and a fixed-step integrator for the reduced radial ODE
k u'/r + f(u) = 0.  Everything evaluates pointwise with explicit first and
second derivatives so that residuals can be checked through an independent
Hessian route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import CRDomain


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """A scalar profile r -> u(r) with first and second derivatives."""

    u: Callable[[float], float]
    du: Callable[[float], float]
    d2u: Callable[[float], float]
    r_max: float
    params: dict = field(default_factory=dict)
    first_zero: Optional[float] = None


def radial_hessian_eigs(profile: RadialProfile, r: float, n: int):
    """Hessian eigenvalues of x -> u(|x|) at radius r, ascending.

    They are u''(r) once (radial direction) and u'(r)/r with multiplicity
    n - 1 (tangential).  At r = 0 the limit is u''(0) with multiplicity n.
    """
    if n < 2:
        raise ValueError("need dimension >= 2")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0.0:
        return np.full(n, profile.d2u(0.0))
    eigs = np.empty(n)
    eigs[: n - 1] = profile.du(r) / r
    eigs[n - 1] = profile.d2u(r)
    return np.sort(eigs)


def pde_residual(profile: RadialProfile, r: float, n: int, k: int, sign: str,
                 zero_order: Callable[[float], float]):
    """Residual F(D^2 u) + g(u) at radius r, with F evaluated through the
    Hessian eigenvalues rather than the profile's own algebra."""
    eigs = radial_hessian_eigs(profile, r, n)
    if sign == "minus":
        val = float(np.sum(eigs[:k]))
    elif sign == "plus":
        val = float(np.sum(eigs[n - k:]))
    else:
        raise ValueError(f"unknown sign {sign!r}")
    return val + zero_order(profile.u(r))


# ---------------------------------------------------------------------------
# power caps: the explicit ball solutions
# ---------------------------------------------------------------------------

class RadialSolution:
    """A radial function u(x) = profile(|x - center|), zero outside r_max."""

    def __init__(self, profile: RadialProfile, center, p, k):
        self.profile = profile
        self.center = np.asarray(center, dtype=float)
        self.p = p
        self.k = k

    @property
    def radius(self):
        return self.profile.r_max

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        r = np.linalg.norm(pts - self.center, axis=-1)
        out = np.where(r < self.radius, self._values(np.minimum(r, self.radius)), 0.0)
        return float(out[0]) if x.ndim == 1 else out

    def _values(self, r):
        c = self.profile.params["c"]
        m = self.profile.params["m"]
        arg = np.maximum(c * (self.radius**2 - r**2), 0.0)
        return arg**m

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x - self.center))
        if r >= self.radius:
            return np.zeros_like(x)
        if r == 0.0:
            return np.zeros_like(x)
        return self.profile.du(r) * (x - self.center) / r


def _power_cap_profile(p, k, radius):
    """Profile of [(1-p)/(2k) (radius^2 - r^2)]^(1/(1-p)) on [0, radius]."""
    c = (1.0 - p) / (2.0 * k)
    m = 1.0 / (1.0 - p)

    def val(r):
        arg = c * (radius**2 - r**2)
        return max(arg, 0.0) ** m

    def dval(r):
        arg = c * (radius**2 - r**2)
        if arg <= 0.0:
            return 0.0
        return -2.0 * c * m * r * arg ** (m - 1.0)

    def d2val(r):
        arg = c * (radius**2 - r**2)
        if arg <= 0.0:
            return 0.0
        out = -2.0 * c * m * arg ** (m - 1.0)
        out += 4.0 * c * c * m * (m - 1.0) * r * r * arg ** (m - 2.0)
        return out

    return RadialProfile(val, dval, d2val, radius, params={"c": c, "m": m, "p": p, "k": k})


def max_amplitude(p, k, radius=1.0):
    """Peak value ((1-p) radius^2 / (2k))^(1/(1-p)) of the ball solution."""
    return ((1.0 - p) * radius**2 / (2.0 * k)) ** (1.0 / (1.0 - p))


def _check_sublinear(p):
    if not 0.0 < p < 1.0:
        raise ValueError(
            f"p={p} outside (0,1): no positive solution exists in the superlinear range"
        )


def ball_solution(p, k, radius, center) -> RadialSolution:
    """The explicit positive solution of the k-smallest-sum problem on a ball.

    u(x) = [(1-p)/(2k) (R^2 - |x - center|^2)]^(1/(1-p)) inside, 0 outside.
    """
    _check_sublinear(p)
    if k < 1:
        raise ValueError("k must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    return RadialSolution(_power_cap_profile(p, k, radius), center, p, k)


def bump_solution(p, k, r, x0) -> RadialSolution:
    """Compactly supported C^1 solution on the ball B_r(x0), zero outside."""
    _check_sublinear(p)
    if r <= 0:
        raise ValueError("support radius must be positive")
    return RadialSolution(_power_cap_profile(p, k, r), x0, p, k)


def gaussian_limit_profile(k) -> RadialProfile:
    """exp(-r^2/(2k)): the limit of rescaled sublinear solutions as p -> 1.

    Satisfies k u'/r + u = 0 identically, with u'/r <= u'' everywhere.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    def val(r):
        return math.exp(-r * r / (2.0 * k))

    def dval(r):
        return -(r / k) * val(r)

    def d2val(r):
        return (r * r / (k * k) - 1.0 / k) * val(r)

    return RadialProfile(val, dval, d2val, math.inf, params={"k": k})


def rescaled_cap(p, k):
    """The rescaled ball solution (1 - (1-p)|x|^2/(2k))_+^(1/(1-p)) as a
    function of the rescaled variable; converges pointwise to the Gaussian."""
    _check_sublinear(p)
    m = 1.0 / (1.0 - p)

    def val(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(np.atleast_2d(x) ** 2, axis=-1)
        base = np.maximum(1.0 - (1.0 - p) * r2 / (2.0 * k), 0.0)
        out = base**m
        return float(out[0]) if x.ndim == 1 else out

    return val


def gaussian_target(k):
    def val(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(np.atleast_2d(x) ** 2, axis=-1)
        out = np.exp(-r2 / (2.0 * k))
        return float(out[0]) if x.ndim == 1 else out

    return val


# ---------------------------------------------------------------------------
# envelopes on intersections of balls
# ---------------------------------------------------------------------------

class EnvelopeFunction:
    """Pointwise inf or sup of a family of radial cap members.

    Member i is coef * ((rho_i^2 - |x - z_i|^2)_+)^expo.  Covers the three
    families in use: ball supersolutions (inf over centers), bump
    subsolutions (sup over interior points), and the quadratic barriers for
    the k-largest-sum problem (inf over centers, expo = 1).
    """

    def __init__(self, mode, points, rho, coef, expo, domain: CRDomain):
        if mode not in ("inf", "sup"):
            raise ValueError("mode must be 'inf' or 'sup'")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[0] == 0:
            raise ValueError("envelope needs at least one member")
        self.mode = mode
        self.points = points
        self.rho = np.broadcast_to(np.asarray(rho, dtype=float), (points.shape[0],)).copy()
        self.coef = float(coef)
        self.expo = float(expo)
        self.domain = domain

    def member_values(self, x):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        d2 = np.sum((pts[None, :, :] - self.points[:, None, :]) ** 2, axis=-1)
        base = np.maximum(self.rho[:, None] ** 2 - d2, 0.0)
        return self.coef * base**self.expo

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        reduce = np.min if self.mode == "inf" else np.max
        # chunk over points: members x points can get large on solver grids
        chunk = max(1, 4_000_000 // max(len(self.points), 1))
        pieces = [reduce(self.member_values(pts[i:i + chunk]), axis=0)
                  for i in range(0, pts.shape[0], chunk)]
        out = np.concatenate(pieces)
        return float(out[0]) if x.ndim == 1 else out


def supersolution_envelope(domain: CRDomain, p, k) -> EnvelopeFunction:
    """Infimum over the defining balls of the explicit ball solutions.

    Lipschitz supersolution of the k-smallest-sum problem, vanishing on the
    boundary, above the bump subsolution envelope.
    """
    _check_sublinear(p)
    c = (1.0 - p) / (2.0 * k)
    m = 1.0 / (1.0 - p)
    return EnvelopeFunction("inf", domain.centers, domain.radius, c**m, m, domain)


def subsolution_envelope(domain: CRDomain, p, k, sample_points=None) -> EnvelopeFunction:
    """Supremum of compactly supported bumps centered at interior samples.

    Each member is the bump of support radius dist(z, boundary).  Sample
    points default to a coarse interior lattice; solver runs pass the grid
    nodes of the target discretization.
    """
    _check_sublinear(p)
    if sample_points is None:
        sample_points = _default_interior_samples(domain)
    z = np.atleast_2d(np.asarray(sample_points, dtype=float))
    margins = domain.margins(z)
    keep = margins > 0
    if not np.any(keep):
        raise ValueError("no interior sample points for the bump envelope")
    c = (1.0 - p) / (2.0 * k)
    m = 1.0 / (1.0 - p)
    return EnvelopeFunction("sup", z[keep], margins[keep], c**m, m, domain)


def pplus_supersolution(domain: CRDomain, p, k) -> EnvelopeFunction:
    """Infimum of quadratic barriers tau (R^2 - |x - y|^2) over the centers.

    Supersolution of the k-largest-sum problem; tau = (R^(2p)/(2k))^(1/(1-p))
    balances the forcing exactly at the ball center.  Bounded below by
    tau * R * dist(x, boundary) inside.
    """
    _check_sublinear(p)
    tau = (domain.radius ** (2.0 * p) / (2.0 * k)) ** (1.0 / (1.0 - p))
    return EnvelopeFunction("inf", domain.centers, domain.radius, tau, 1.0, domain)


def _default_interior_samples(domain: CRDomain, per_axis=24):
    lo, hi = domain.bounding_box()
    axes = [np.linspace(lo[d], hi[d], per_axis) for d in range(domain.dim)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dim)
    return mesh[domain.margins(mesh) > 0]


# ---------------------------------------------------------------------------
# radial ODE integration: k u'/r + f(u) = 0
# ---------------------------------------------------------------------------

def integrate_radial_ode(f, u0, k, r_max, step, f_prime=None) -> RadialProfile:
    """Fixed-step RK4 integration of u' = -(r/k) f(u), clamped at u = 0.

    Parameters
    ----------
    f : callable
        Zero-order term; must be nonnegative and nondecreasing on [0, u0]
        (checked by sampling).
    u0 : scalar
        Center value u(0) >= 0.
    k : int
        Eigenvalue count in the radial identity.
    r_max, step : scalars
        Integration range and fixed step size.
    f_prime : callable, optional
        Derivative of f; a central difference is used when omitted.

    Returns
    -------
    RadialProfile
        Piecewise cubic Hermite evaluator with exact first derivative from
        the ODE and second derivative from u'' = -(f(u) + r f'(u) u')/k.
        `first_zero` records where the profile hits zero, if it does.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if u0 < 0:
        raise ValueError("u0 must be nonnegative")
    if r_max <= 0:
        raise ValueError("r_max must be positive")
    _check_monotone(f, u0)

    def fval(u):
        return f(max(u, 0.0))

    def slope(r, u):
        return -(r / k) * fval(u)

    def rk4(r, u, h):
        k1 = slope(r, u)
        k2 = slope(r + 0.5 * h, u + 0.5 * h * k1)
        k3 = slope(r + 0.5 * h, u + 0.5 * h * k2)
        k4 = slope(r + h, u + h * k3)
        return u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    # the touchdown at u = 0 can be tangential and locally stiff; halving the
    # step inside the collapse layer keeps the recorded zero sharp while the
    # smooth region stays at the fixed step (deterministic either way)
    max_depth = 42

    def advance(r, u, h, depth, out):
        u_new = rk4(r, u, h)
        if depth < max_depth and u > 0.0 and (u_new <= 0.0 or u_new < 0.9 * u):
            advance(r, u, 0.5 * h, depth + 1, out)
            r_mid, u_mid = out[-1]
            if u_mid > 0.0:
                advance(r_mid, u_mid, 0.5 * h, depth + 1, out)
            return
        out.append((r + h, u_new))

    n_steps = int(math.ceil(r_max / step))
    h = step
    nodes = [(0.0, float(u0))]
    first_zero = None if u0 > 0 else 0.0
    # series start around r = 0: u(h) = u0 - f(u0) h^2/(2k) + O(h^4)
    u1 = u0 - fval(u0) * h * h / (2.0 * k)
    if u1 <= 0.0 and first_zero is None:
        first_zero = math.sqrt(max(2.0 * k * u0 / max(fval(u0), 1e-300), 0.0))
        u1 = 0.0
    nodes.append((h, u1))
    while nodes[-1][0] < n_steps * step - 1e-12 * step:
        r, u = nodes[-1]
        out = []
        advance(r, u, min(h, n_steps * step - r), 0, out)
        for r_new, u_new in out:
            if u_new <= 0.0 and first_zero is None and u > 0.0:
                first_zero = _hermite_zero(r, u, slope(r, u), r_new, u_new,
                                           slope(r_new, u_new))
            nodes.append((r_new, max(u_new, 0.0)))
            r, u = nodes[-1]

    rs = np.array([n[0] for n in nodes])
    us = np.array([n[1] for n in nodes])
    dus = np.array([slope(r, u) for r, u in zip(rs, us)])

    if f_prime is None:
        def f_prime(u, _f=f):
            d = 1e-6 * (1.0 + abs(u))
            lo = max(u - d, 0.0)
            return (_f(u + d) - _f(lo)) / (u + d - lo)

    def val(r):
        return _hermite_eval(rs, us, dus, r)

    def dval(r):
        return slope(r, val(r))

    def d2val(r):
        u = val(r)
        return -(fval(u) + r * f_prime(max(u, 0.0)) * slope(r, u)) / k

    return RadialProfile(val, dval, d2val, float(rs[-1]),
                         params={"k": k, "u0": float(u0)}, first_zero=first_zero)


def _check_monotone(f, u0, samples=200):
    span = np.linspace(0.0, max(u0, 1.0) * 1.05 + 1e-9, samples)
    vals = np.array([f(u) for u in span])
    if vals[0] < -1e-12:
        raise ValueError("f(0) must be nonnegative")
    scale = 1.0 + np.abs(vals).max()
    if np.any(np.diff(vals) < -1e-10 * scale):
        raise ValueError("f must be nondecreasing on the relevant range")


def _hermite_eval(rs, us, dus, r):
    r = float(r)
    if r <= rs[0]:
        return float(us[0])
    if r >= rs[-1]:
        return float(us[-1])
    i = int(np.searchsorted(rs, r) - 1)
    h = rs[i + 1] - rs[i]
    t = (r - rs[i]) / h
    h00 = (1 + 2 * t) * (1 - t) ** 2
    h10 = t * (1 - t) ** 2
    h01 = t * t * (3 - 2 * t)
    h11 = t * t * (t - 1)
    v = h00 * us[i] + h10 * h * dus[i] + h01 * us[i + 1] + h11 * h * dus[i + 1]
    return float(max(v, 0.0))


def _hermite_zero(r0, u0, d0, r1, u1, d1, iters=80):
    """Root of the cubic Hermite interpolant on [r0, r1] with u0>0>=u1."""
    h = r1 - r0
    lo, hi = 0.0, 1.0

    def ev(t):
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ev(mid) > 0:
            lo = mid
        else:
            hi = mid
    return r0 + 0.5 * (lo + hi) * h
