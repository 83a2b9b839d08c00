"""Monotone wide-stencil solver for extremal eigenvalue-sum operators.

Discretizes F(D^2 u) for F in {k smallest sum, k largest sum, their mean}
as a min/max over orthogonal lattice frames of Shortley-Weller second
differences, and provides the iteration strategies built on it: explicit
monotone pseudo-time marching, two-sided squeeze runs, Howard policy
iteration for linear problems, the source-map fixed point for the
superlinear problem, and inverse power iteration for the principal
eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .geometry import CRDomain, Grid, rasterize
from .stencil import StencilScheme

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

ARM_FLOOR_FACTOR = 1e-3
CFL_SAFETY = 0.9

SIGN_CODES = {"minus": 0, "plus": 1, "mean": 2}


def default_order(dim):
    # wide stencils: angular resolution dominates the error in 2D
    return 6 if dim == 2 else 1


# ---------------------------------------------------------------------------
# problem description and states
# ---------------------------------------------------------------------------

@dataclass
class ProblemSpec:
    """One Dirichlet problem F(D^2 u) + a(x) (u + shift)^p = 0, u=0 on the
    boundary."""

    sign: str
    k: int
    p: float
    domain: CRDomain
    h: float
    order: Optional[int] = None
    a: Union[None, float, Callable] = None
    shift: float = 0.0

    def __post_init__(self):
        if self.sign not in SIGN_CODES:
            raise ValueError(f"sign must be one of {sorted(SIGN_CODES)}")
        if self.p <= 0:
            raise ValueError("exponent p must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.shift < 0:
            raise ValueError("homotopy shift must be nonnegative")

    def coefficient_values(self, points):
        if self.a is None:
            return np.ones(points.shape[0])
        if callable(self.a):
            vals = np.asarray(self.a(points), dtype=float)
        else:
            vals = np.full(points.shape[0], float(self.a))
        if vals.min() <= 0 or not np.isfinite(vals).all():
            raise ValueError("coefficient a(x) must be bounded between positive constants")
        return vals


@dataclass
class DiscreteState:
    """Solution values on the interior nodes plus iteration metadata."""

    values: np.ndarray
    iterations: int
    residual_sup: float
    converged: bool
    monotone: Optional[str] = None  # 'nonincreasing' | 'nondecreasing' | None
    history: list = field(default_factory=list)
    method: str = ""

    def sup(self):
        return float(np.abs(self.values).max()) if self.values.size else 0.0


@dataclass
class SqueezeResult:
    lower: DiscreteState
    upper: DiscreteState
    gap: float
    converged: bool
    note: str = ""


@dataclass
class FixedPointResult:
    state: DiscreteState
    mu: float
    mu_history: list
    converged: bool


@dataclass
class EigenEstimate:
    mu: float
    mode: np.ndarray
    history: list
    converged: bool

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("eigenvalue estimate must be positive")


@dataclass
class AprioriCheck:
    passed: bool
    sup: float
    bound: float
    margin: float
    radius: float


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------

class Discretization:
    """Grid plus stencil with precomputed Shortley-Weller coefficients.

    Per interior node i and direction d the arrays hold the neighbor
    ordinals (sentinel N when the arm is cut at the boundary, where the
    value 0 is read) and the second-difference weights
    cp = 2/(a(a+b)), cm = 2/(b(a+b)), c0 = 2/(ab) for arms a, b.
    """

    def __init__(self, domain: CRDomain, h, order=None, node_budget=None):
        order = default_order(domain.dim) if order is None else order
        self.scheme = StencilScheme(domain.dim, order)
        kwargs = {} if node_budget is None else {"node_budget": node_budget}
        self.grid: Grid = rasterize(domain, h, self.scheme.directions, **kwargs)
        self.domain = domain
        self.h = float(h)

        grid = self.grid
        n, d_count = grid.n_interior, len(grid.directions)
        self.n_nodes = n
        floor = ARM_FLOOR_FACTOR * self.h
        self.floored_arms = 0
        cp = np.empty((n, d_count))
        cm = np.empty((n, d_count))
        c0 = np.empty((n, d_count))
        ip = np.empty((n, d_count), dtype=np.int64)
        im = np.empty((n, d_count), dtype=np.int64)
        for d in range(d_count):
            a = grid.arm_plus[d]
            b = grid.arm_minus[d]
            self.floored_arms += int((a < floor).sum() + (b < floor).sum())
            a = np.maximum(a, floor)
            b = np.maximum(b, floor)
            cp[:, d] = 2.0 / (a * (a + b))
            cm[:, d] = 2.0 / (b * (a + b))
            c0[:, d] = 2.0 / (a * b)
            ip[:, d] = np.where(grid.nbr_plus[d] < 0, n, grid.nbr_plus[d])
            im[:, d] = np.where(grid.nbr_minus[d] < 0, n, grid.nbr_minus[d])
        self.cp, self.cm, self.c0, self.ip, self.im = cp, cm, c0, ip, im
        self._frames = {}
        self._dir_index = {e: i for i, e in enumerate(grid.directions)}

    @property
    def points(self):
        return self.grid.points

    def frames_array(self, k):
        if k not in self._frames:
            self._frames[k] = np.array(self.scheme.frames(k), dtype=np.int64)
        return self._frames[k]

    def direction_ordinal(self, direction):
        key = tuple(int(c) for c in direction)
        if key in self._dir_index:
            return self._dir_index[key]
        neg = tuple(-c for c in key)
        if neg in self._dir_index:
            return self._dir_index[neg]
        raise ValueError(f"direction {direction} not in stencil")

    # -- pointwise operations ------------------------------------------------

    def second_difference(self, values, node, direction):
        """Shortley-Weller second difference of the node values along one
        stencil direction: (2/(a+b)) (u+/a + u-/b - u (a+b)/(ab))."""
        d = self.direction_ordinal(direction)
        up = values[self.ip[node, d]] if self.ip[node, d] < self.n_nodes else 0.0
        um = values[self.im[node, d]] if self.im[node, d] < self.n_nodes else 0.0
        return float(self.cp[node, d] * up + self.cm[node, d] * um
                     - self.c0[node, d] * values[node])

    def discrete_operator(self, values, sign, k, node):
        """Min (sign 'minus') or max ('plus') over frames of summed second
        differences at one node; 'mean' averages the two extremes."""
        vals = self.directional_values(values)[:, node]
        fa = self.frames_array(k)
        sums = vals[fa].sum(axis=1)
        if sign == "minus":
            return float(sums.min())
        if sign == "plus":
            return float(sums.max())
        return 0.5 * (float(sums.min()) + float(sums.max()))

    # -- vectorized operations ----------------------------------------------

    def directional_values(self, values):
        """(D, N) array of second differences for every direction."""
        up = np.append(values, 0.0)
        out = np.empty((self.ip.shape[1], self.n_nodes))
        for d in range(self.ip.shape[1]):
            out[d] = (self.cp[:, d] * up[self.ip[:, d]]
                      + self.cm[:, d] * up[self.im[:, d]]
                      - self.c0[:, d] * values)
        return out

    def operator_values(self, values, sign, k):
        """Vectorized discrete operator over all interior nodes."""
        vals = self.directional_values(values)
        fa = self.frames_array(k)
        if fa.shape[1] == 1:
            sums = vals
        else:
            sums = vals[fa].sum(axis=1)
        if sign == "minus":
            return sums.min(axis=0)
        if sign == "plus":
            return sums.max(axis=0)
        return 0.5 * (sums.min(axis=0) + sums.max(axis=0))

    def residual_sup(self, values, sign, k, forcing):
        return float(np.abs(self.operator_values(values, sign, k) + forcing).max())

    def cfl_steps(self, k):
        """Per-node stable explicit steps: 0.9 / max over frames of the
        frame's own-value weight sum.  Full-arm nodes get 0.9 h^2/(2k)."""
        fa = self.frames_array(k)
        worst = self.c0[:, fa].sum(axis=2).max(axis=1)
        return CFL_SAFETY / worst

    def frame_policy_values(self, values, k):
        """Frame sums (F, N) for policy selection."""
        vals = self.directional_values(values)
        fa = self.frames_array(k)
        if fa.shape[1] == 1:
            return vals
        return vals[fa].sum(axis=1)

    def interpolate(self, values, points):
        return self.grid.interpolate(values, points)


def discretize(domain: CRDomain, h, order=None, node_budget=None) -> Discretization:
    return Discretization(domain, h, order=order, node_budget=node_budget)


def second_difference(disc: Discretization, values, node, direction):
    return disc.second_difference(values, node, direction)


def discrete_operator(disc: Discretization, sign, k, values, node):
    return disc.discrete_operator(values, sign, k, node)


# ---------------------------------------------------------------------------
# explicit step kernels
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _step_k1(u, up, ip, im, cp, cm, c0, sign, dtv, forc, unew):
        n, d_count = ip.shape
        supres = 0.0
        rmin = 1e300
        rmax = -1e300
        supu = 0.0
        for i in range(n):
            ui = u[i]
            lo = 1e300
            hi = -1e300
            for d in range(d_count):
                v = cp[i, d] * up[ip[i, d]] + cm[i, d] * up[im[i, d]] - c0[i, d] * ui
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if sign == 0:
                r = lo
            elif sign == 1:
                r = hi
            else:
                r = 0.5 * (lo + hi)
            r += forc[i]
            unew[i] = ui + dtv[i] * r
            if r < rmin:
                rmin = r
            if r > rmax:
                rmax = r
            ar = abs(r)
            if ar > supres:
                supres = ar
            au = abs(unew[i])
            if au > supu:
                supu = au
        return supres, rmin, rmax, supu

    @njit(cache=True)
    def _step_frames(u, up, ip, im, cp, cm, c0, frames, sign, dtv, forc, unew):
        n, d_count = ip.shape
        f_count, k = frames.shape
        dv = np.empty(d_count)
        supres = 0.0
        rmin = 1e300
        rmax = -1e300
        supu = 0.0
        for i in range(n):
            ui = u[i]
            for d in range(d_count):
                dv[d] = cp[i, d] * up[ip[i, d]] + cm[i, d] * up[im[i, d]] - c0[i, d] * ui
            lo = 1e300
            hi = -1e300
            for f in range(f_count):
                s = 0.0
                for j in range(k):
                    s += dv[frames[f, j]]
                if s < lo:
                    lo = s
                if s > hi:
                    hi = s
            if sign == 0:
                r = lo
            elif sign == 1:
                r = hi
            else:
                r = 0.5 * (lo + hi)
            r += forc[i]
            unew[i] = ui + dtv[i] * r
            if r < rmin:
                rmin = r
            if r > rmax:
                rmax = r
            ar = abs(r)
            if ar > supres:
                supres = ar
            au = abs(unew[i])
            if au > supu:
                supu = au
        return supres, rmin, rmax, supu


def _step_numpy(disc, u, up, sign_code, k, dtv, forc, unew):
    vals = disc.directional_values(u)
    fa = disc.frames_array(k)
    sums = vals if fa.shape[1] == 1 else vals[fa].sum(axis=1)
    if sign_code == 0:
        r = sums.min(axis=0)
    elif sign_code == 1:
        r = sums.max(axis=0)
    else:
        r = 0.5 * (sums.min(axis=0) + sums.max(axis=0))
    r = r + forc
    np.multiply(dtv, r, out=unew)
    unew += u
    return (float(np.abs(r).max()), float(r.min()), float(r.max()),
            float(np.abs(unew).max()))


def _power_forcing(p):
    if p == 0.5:
        return np.sqrt
    if p == 1.0:
        return lambda x: x
    if p == 2.0:
        return np.square
    return lambda x: np.power(x, p)


# ---------------------------------------------------------------------------
# pseudo-time marching
# ---------------------------------------------------------------------------

def pseudo_time_solve(disc: Discretization, spec: ProblemSpec, init,
                      dt=None, tol=1e-7, max_iter=400_000,
                      frozen_forcing=None, stop_below_sup=None,
                      record_every=500, use_numba=None) -> DiscreteState:
    """Explicit monotone marching u <- u + dt (S(u) + a max(u+shift,0)^p).

    Parameters
    ----------
    disc, spec : discretization and problem description.
    init : array, scalar or callable on points
        Starting values.  From a discrete supersolution the iterates are
        pointwise nonincreasing; from a subsolution, nondecreasing (the
        update is a monotone map), and the reported `monotone` field
        records which happened.
    dt : scalar, optional
        Explicit step.  Defaults to the per-node stable step
        min over frames of 0.9/sum(2/(arm products)), which equals
        0.9 h^2/(2k) on full-arm nodes; a scalar above the stable step is
        rejected.
    tol : scalar
        Stop when the sup norm of S(u) + forcing drops below tol (the update
        is dt times that residual).
    frozen_forcing : array, optional
        Fixed forcing field replacing the power term.
    stop_below_sup : scalar, optional
        Early exit once sup|u| falls below this (collapse detection).

    Returns
    -------
    DiscreteState with convergence flag, monotonicity flag and a recorded
    (iteration, residual, sup) history.
    """
    sign_code = SIGN_CODES[spec.sign]
    k = spec.k
    n = disc.n_nodes
    dtv_auto = disc.cfl_steps(k)
    if dt is None:
        dtv = dtv_auto
    else:
        if dt > dtv_auto.min() * (1.0 + 1e-12):
            raise ValueError(
                f"dt={dt} violates the stable step {dtv_auto.min():.3e} on this grid")
        dtv = np.full(n, float(dt))

    u = _init_values(disc, init)
    a_arr = None if frozen_forcing is not None else spec.coefficient_values(disc.points)
    power = _power_forcing(spec.p)
    shift = spec.shift
    frozen = None if frozen_forcing is None else np.asarray(frozen_forcing, dtype=float)

    up = np.zeros(n + 1)
    unew = np.empty(n)
    fa = disc.frames_array(k)
    numba_ok = HAVE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    nondecreasing = True
    nonincreasing = True
    history = []
    it = 0
    supres = math.inf
    while it < max_iter:
        up[:n] = u
        if frozen is not None:
            forc = frozen
        else:
            base = np.maximum(u, 0.0)
            if shift:
                base = base + shift
            forc = a_arr * power(base)
        if numba_ok and fa.shape[1] == 1:
            stats = _step_k1(u, up, disc.ip, disc.im, disc.cp, disc.cm, disc.c0,
                             sign_code, dtv, forc, unew)
        elif numba_ok:
            stats = _step_frames(u, up, disc.ip, disc.im, disc.cp, disc.cm, disc.c0,
                                 fa, sign_code, dtv, forc, unew)
        else:
            stats = _step_numpy(disc, u, up, sign_code, k, dtv, forc, unew)
        supres, rmin, rmax, supu = stats
        if rmin < -1e-13:
            nondecreasing = False
        if rmax > 1e-13:
            nonincreasing = False
        u, unew = unew, u
        it += 1
        if it % record_every == 0 or supres <= tol:
            history.append((it, supres, supu))
        if supres <= tol:
            break
        if stop_below_sup is not None and supu <= stop_below_sup:
            history.append((it, supres, supu))
            break

    converged = supres <= tol or (
        stop_below_sup is not None and float(np.abs(u).max()) <= stop_below_sup)
    monotone = ("nondecreasing" if nondecreasing else
                "nonincreasing" if nonincreasing else None)
    if frozen is not None:
        final_forc = frozen
    else:
        base = np.maximum(u, 0.0)
        if shift:
            base = base + shift
        final_forc = a_arr * power(base)
    res = disc.residual_sup(u, spec.sign, k, final_forc)
    return DiscreteState(u, it, res, converged, monotone, history, method="pseudo_time")


def _init_values(disc, init):
    if callable(init):
        vals = np.asarray(init(disc.points), dtype=float)
    elif np.isscalar(init):
        vals = np.full(disc.n_nodes, float(init))
    else:
        vals = np.array(init, dtype=float)
    if vals.shape != (disc.n_nodes,):
        raise ValueError("init has the wrong shape for this grid")
    return vals


# ---------------------------------------------------------------------------
# two-sided squeeze
# ---------------------------------------------------------------------------

def squeeze_solve(disc: Discretization, spec: ProblemSpec, tol=1e-4,
                  iter_tol=1e-7, max_iter=400_000, max_members=1500,
                  init_lower=None, init_upper=None) -> SqueezeResult:
    """Ascending run from the bump envelope and descending run from the ball
    envelope; the pair brackets the positive solution of the sublinear
    problem.  Success means both runs converged and their sup gap is below
    tol; a stagnating gap is reported (possible convergence toward a
    compactly supported spurious solution), never silently accepted.
    """
    if not 0.0 < spec.p < 1.0:
        raise ValueError("squeeze requires a sublinear exponent p in (0,1)")
    from .exact import subsolution_envelope, supersolution_envelope

    if init_lower is None:
        z = disc.points[:: max(1, disc.n_nodes // max_members)]
        init_lower = subsolution_envelope(spec.domain, spec.p, spec.k, sample_points=z)
    if init_upper is None:
        init_upper = supersolution_envelope(spec.domain, spec.p, spec.k)
    lower = pseudo_time_solve(disc, spec, init_lower, tol=iter_tol, max_iter=max_iter)
    upper = pseudo_time_solve(disc, spec, init_upper, tol=iter_tol, max_iter=max_iter)
    gap = float(np.abs(upper.values - lower.values).max()) if disc.n_nodes else 0.0
    converged = lower.converged and upper.converged and gap <= tol
    note = ""
    if gap > tol:
        note = ("sub/super gap stagnated above tolerance; possible spurious "
                "compactly supported limit")
    return SqueezeResult(lower, upper, gap, converged, note)


# ---------------------------------------------------------------------------
# policy iteration for linear problems
# ---------------------------------------------------------------------------

def _policy_matrix(disc, pol_dirs, f_arr):
    """Assemble the frozen-policy system A u = -f with A an M-matrix:
    (sum_e c0) u_i - sum_e (cp u_i+e + cm u_i-e) = -f_i."""
    n, k = disc.n_nodes, pol_dirs.shape[1]
    rows_i = np.arange(n)
    idx = (rows_i[:, None], pol_dirs)
    diag = disc.c0[idx].sum(axis=1)
    rows = [rows_i]
    cols = [rows_i]
    data = [diag]
    for j in range(k):
        d = pol_dirs[:, j]
        for nbr_arr, w_arr in ((disc.ip, disc.cp), (disc.im, disc.cm)):
            nbr = nbr_arr[rows_i, d]
            w = w_arr[rows_i, d]
            keep = nbr < n
            rows.append(rows_i[keep])
            cols.append(nbr[keep])
            data.append(-w[keep])
    a = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n)).tocsr()
    return a


def _select_policy(disc, values, sign, k):
    sums = disc.frame_policy_values(values, k)
    fa = disc.frames_array(k)
    if sign == "minus":
        return fa[np.argmin(sums, axis=0)]
    if sign == "plus":
        return fa[np.argmax(sums, axis=0)]
    return fa[np.argmin(sums, axis=0)], fa[np.argmax(sums, axis=0)]


def _sor_sweeps(disc, a_mat, rhs, u, tol, omega=1.0, max_sweeps=20_000):
    """Red-black relaxation sweeps on the frozen-policy system.

    The coloring is the lattice parity; nodes of one color update together
    (fixed ordering, deterministic).  omega = 1 is a regular splitting of the
    M-matrix and always converges; over-relaxation is opt-in.
    """
    color = disc.grid.lattice.sum(axis=1) % 2 == 0
    diag = a_mat.diagonal()
    masks = (color, ~color)
    guard = 1e6 * (1.0 + float(np.abs(rhs).max()))
    for sweep in range(max_sweeps):
        for mask in masks:
            r = rhs[mask] - a_mat[mask] @ u + diag[mask] * u[mask]
            u[mask] = (1.0 - omega) * u[mask] + omega * r / diag[mask]
        if sweep % 10 == 0:
            res = float(np.abs(rhs - a_mat @ u).max())
            if res <= tol:
                break
            if not math.isfinite(res) or float(np.abs(u).max()) > guard:
                break  # diverging relaxation; caller's residual check handles it
    return u


def linear_dirichlet_solve(disc: Discretization, sign, k, f, tol=1e-10,
                           inner="direct", max_policy=60, u0=None,
                           omega=1.0) -> DiscreteState:
    """Howard policy iteration for F(D^2 u) = f with zero boundary data.

    Alternates (i) per-node selection of the extremizing frame and (ii) a
    frozen-policy linear solve, until the policy is stable and the true
    min/max residual meets tol.  The frozen systems are strictly diagonally
    dominant M-matrices; `inner` picks a direct sparse factorization
    (default) or red-black SOR sweeps.  A detected policy cycle falls back
    to pseudo-time with frozen forcing.
    """
    if sign not in SIGN_CODES:
        raise ValueError(f"sign must be one of {sorted(SIGN_CODES)}")
    f_arr = (np.asarray(f(disc.points), dtype=float) if callable(f)
             else np.broadcast_to(np.asarray(f, dtype=float), (disc.n_nodes,)).copy())
    u = np.zeros(disc.n_nodes) if u0 is None else np.array(u0, dtype=float)
    guard = _stima_guard(disc, k, f_arr)
    seen = set()
    history = []
    for it in range(1, max_policy + 1):
        pol = _select_policy(disc, u, sign, k)
        key = (pol[0].tobytes(), pol[1].tobytes()) if sign == "mean" else pol.tobytes()
        if sign == "mean":
            a_mat = 0.5 * (_policy_matrix(disc, pol[0], f_arr)
                           + _policy_matrix(disc, pol[1], f_arr))
        else:
            a_mat = _policy_matrix(disc, pol, f_arr)
        if inner == "direct":
            u = spla.spsolve(a_mat.tocsc(), -f_arr)
        elif inner == "sweeps":
            u = _sor_sweeps(disc, a_mat, -f_arr, u.copy(), tol=0.1 * tol, omega=omega)
        else:
            raise ValueError("inner must be 'direct' or 'sweeps'")
        res = float(np.abs(disc.operator_values(u, sign, k) - f_arr).max())
        history.append((it, res, float(np.abs(u).max())))
        if float(np.abs(u).max()) > guard:
            break  # diverging policy loop; fall back below
        if res <= tol:
            return DiscreteState(u, it, res, True, None, history, method=f"policy-{inner}")
        if key in seen:
            break  # policy cycle
        seen.add(key)
    # fallback: monotone pseudo-time with the forcing frozen at f
    spec = ProblemSpec(sign, k, 1.0, disc.domain, disc.h)
    state = pseudo_time_solve(disc, spec, u if np.isfinite(u).all() else 0.0,
                              tol=tol, frozen_forcing=-f_arr)
    state.method = "policy-fallback-pseudo-time"
    state.history = history + state.history
    res = float(np.abs(disc.operator_values(state.values, sign, k) - f_arr).max())
    state.residual_sup = res
    state.converged = res <= tol
    return state


def _stima_guard(disc, k, f_arr):
    """Sup-norm guard from the quadratic barrier: C = (diam^2/(2k)) sup f^-,
    used only as an iteration safeguard."""
    diam = disc.domain.diameter_bound()
    neg = float(np.maximum(-f_arr, 0.0).max()) if f_arr.size else 0.0
    return 10.0 * (diam**2 / (2.0 * k)) * max(neg, 1.0) + 1e3


# ---------------------------------------------------------------------------
# source map, superlinear fixed point, principal eigenvalue
# ---------------------------------------------------------------------------

def phi_map(disc: Discretization, v, p, t=0.0, tol=1e-11, u0=None) -> DiscreteState:
    """Solution map of the k-largest-sum problem with k = 1: the unique u
    with max-frame operator value - (v + t)^p, zero on the boundary."""
    v = np.asarray(v, dtype=float)
    if v.shape != (disc.n_nodes,):
        raise ValueError("v has the wrong shape for this grid")
    if v.min() < 0:
        raise ValueError("phi map requires nonnegative input values")
    if t < 0:
        raise ValueError("homotopy shift must be nonnegative")
    rhs = -np.power(v + t, p) if t else -np.power(v, p)
    return linear_dirichlet_solve(disc, "plus", 1, rhs, tol=tol, u0=u0)


def normalized_fixed_point(disc: Discretization, p, tol=1e-3, fp_tol=1e-10,
                           max_iter=200, init=None) -> FixedPointResult:
    """Normalized source-map iteration for the superlinear k-largest-sum
    problem with k = 1.

    Iterates v <- Phi(v)/sup Phi(v) with damping on oscillation; at a fixed
    point (v, mu) the rescaling u* = mu^(1/(1-p)) v solves the problem by
    1-homogeneity.  Acceptance is purely by the discrete residual
    sup|S(u*) + (u*)^p| <= tol (1 + sup u*).
    """
    if p <= 1.0:
        raise ValueError("normalized fixed point requires a superlinear exponent p > 1")
    if init is None:
        margins = disc.domain.margins(disc.points)
        v = margins / margins.max()
    else:
        v = _init_values(disc, init)
        v = v / np.abs(v).max()
    mu = 1.0
    mu_history = []
    theta = 1.0
    prev_change = math.inf
    w_prev = None
    u_star = v
    res = math.inf
    ok = False
    for it in range(1, max_iter + 1):
        w = phi_map(disc, v, p, u0=w_prev).values
        w_prev = w
        mu_new = float(w.max())
        if mu_new <= 0:
            break
        v_new = w / mu_new
        if theta < 1.0:
            v_new = (1.0 - theta) * v + theta * v_new
            v_new = v_new / v_new.max()
        change = float(np.abs(v_new - v).max())
        if change > prev_change * 1.2:
            theta = max(0.5 * theta, 0.1)  # damp on oscillation
        prev_change = change
        v, mu = v_new, mu_new
        # acceptance is residual-based: rescale and test every iterate
        u_star = mu ** (1.0 / (1.0 - p)) * v
        forcing = np.power(np.maximum(u_star, 0.0), p)
        res = disc.residual_sup(u_star, "plus", 1, forcing)
        mu_history.append((it, mu_new, change, res))
        if res <= 0.2 * tol * (1.0 + float(u_star.max())) or change <= fp_tol:
            break
    ok = res <= tol * (1.0 + float(u_star.max()))
    state = DiscreteState(u_star, len(mu_history), res, ok,
                          None, mu_history, method="normalized_fixed_point")
    return FixedPointResult(state, mu, mu_history, ok)


def principal_eigenvalue_estimate(disc: Discretization, k=1, sign="plus",
                                  tol=1e-10, max_iter=300) -> EigenEstimate:
    """Inverse power iteration for the generalized principal eigenvalue.

    v <- solve(F(D^2 w) = -v) normalized in sup norm; the estimate is
    sup v_n / sup w_n, the threshold for the maximum principle.
    """
    margins = disc.domain.margins(disc.points)
    v = margins / margins.max()
    mu = 0.0
    history = []
    u_prev = None
    for it in range(1, max_iter + 1):
        state = linear_dirichlet_solve(disc, sign, k, -v, tol=1e-12, u0=u_prev)
        w = state.values
        u_prev = w
        top = float(w.max())
        if top <= 0:
            raise RuntimeError("inverse power iteration lost positivity")
        mu_new = float(v.max()) / top
        history.append((it, mu_new))
        v = w / top
        if abs(mu_new - mu) <= tol * max(mu_new, 1.0):
            mu = mu_new
            return EigenEstimate(mu, v, history, True)
        mu = mu_new
    return EigenEstimate(mu, v, history, False)


# ---------------------------------------------------------------------------
# a priori bound
# ---------------------------------------------------------------------------

def circumscribed_radius(disc: Discretization):
    """Radius of a ball around the domain's inner certificate point that
    contains the discrete domain: max over interior nodes and exact boundary
    crossing points."""
    center = disc.domain.inner_point
    r_nodes = np.linalg.norm(disc.points - center, axis=1).max() if disc.n_nodes else 0.0
    ends = disc.grid.boundary_arm_endpoints()
    r_ends = np.linalg.norm(ends - center, axis=1).max() if len(ends) else 0.0
    return float(max(r_nodes, r_ends))


def apriori_check(disc: Discretization, values, p, k, slack=1e-8) -> AprioriCheck:
    """Sup bound ((1-p) R^2/(2k))^(1/(1-p)) with R the circumscribed radius;
    every discrete subsolution must stay below it."""
    if not 0.0 < p < 1.0:
        raise ValueError("the a priori bound applies to p in (0,1)")
    radius = circumscribed_radius(disc)
    bound = ((1.0 - p) * radius**2 / (2.0 * k)) ** (1.0 / (1.0 - p))
    sup = float(np.max(values)) if np.size(values) else 0.0
    return AprioriCheck(sup <= bound + slack, sup, bound, bound + slack - sup, radius)
