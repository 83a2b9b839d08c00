"""Geometry of uniformly convex domains: finite intersections of equal balls,
and their rasterization into node-classified grids with exact boundary arms.

The boundary treatment is arm shortening (Shortley-Weller): every grid arm
that leaves the domain is cut at its exact crossing with one of the defining
spheres, where the Dirichlet value 0 is imposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_NODE_BUDGET = 4_000_000
INTERIOR_CERTIFICATE_MARGIN = 1e-9


class ResourceError(RuntimeError):
    """Grid would exceed the configured node budget."""


class CRDomain:
    """Bounded uniformly convex domain: intersection of balls of one radius.

    Omega = intersection over y in centers of B_R(y), dimension 2 or 3.
    Construction certifies a nonempty interior by locating a point whose
    worst distance to the centers is strictly below R.
    """

    def __init__(self, radius, centers):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if centers.shape[0] < 1:
            raise ValueError("need at least one ball center")
        if centers.shape[1] not in (2, 3):
            raise ValueError("dimension must be 2 or 3")
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.centers = centers
        self.centers.flags.writeable = False
        self.inner_point = _minimax_center(centers)
        if self.margin(self.inner_point) <= INTERIOR_CERTIFICATE_MARGIN:
            raise ValueError("intersection of balls has empty interior")

    @property
    def dim(self):
        return self.centers.shape[1]

    def margins(self, points):
        """Signed margin R - max_y |x - y| for a batch of points; positive
        inside, negative outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.linalg.norm(pts[:, None, :] - self.centers[None, :, :], axis=-1)
        return self.radius - d.max(axis=1)

    def margin(self, x):
        return float(self.margins(np.asarray(x, dtype=float)[None, :])[0])

    def contains(self, x):
        """Classification of a point with its signed margin."""
        m = self.margin(x)
        return ("interior" if m > 0 else "exterior"), m

    def boundary_distance(self, x):
        """Exact distance to the boundary for an interior point: the least
        slack min_y (R - |x - y|) among the ball constraints."""
        m = self.margin(x)
        if m <= 0:
            raise ValueError("point is not interior")
        return m

    def boundary_crossing(self, x, direction, max_len):
        """Smallest t in (0, max_len] with x + t*direction/|direction| on the
        boundary, by exact quadratic solves per ball; None if the segment
        stays interior."""
        x = np.asarray(x, dtype=float)
        e = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(e)
        if norm == 0:
            raise ValueError("direction must be nonzero")
        if self.margin(x) <= 0:
            raise ValueError("crossing requires an interior start point")
        e = e / norm
        diff = x - self.centers
        b = diff @ e
        disc = b**2 + self.radius**2 - np.sum(diff**2, axis=1)
        # interior start => disc > 0 for every ball
        t = -b + np.sqrt(np.maximum(disc, 0.0))
        t_exit = float(t.min())
        return t_exit if t_exit <= max_len else None

    def bounding_box(self):
        lo = (self.centers - self.radius).max(axis=0)
        hi = (self.centers + self.radius).min(axis=0)
        return lo, hi

    def diameter_bound(self):
        return 2.0 * self.radius

    def __repr__(self):
        return f"CRDomain(R={self.radius}, centers={len(self.centers)}, dim={self.dim})"


def _minimax_center(centers, iters=3000):
    """Point minimizing the maximum distance to the centers
    (Badoiu-Clarkson iteration; exact enough for certification)."""
    x = centers.mean(axis=0)
    if len(centers) == 1:
        return centers[0].copy()
    for t in range(1, iters + 1):
        d = np.linalg.norm(centers - x, axis=1)
        far = int(np.argmax(d))
        x = x + (centers[far] - x) / (t + 1)
    return x


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass
class Grid:
    """Node-classified lattice over a CRDomain with per-direction arm data.

    Nodes sit at integer multiples of the spacing h (so refining h -> h/2
    keeps node positions nested).  For each interior node and stencil
    direction e, the arm either reaches the neighbor node (length h|e|) or is
    shortened to the exact boundary crossing.
    """

    domain: CRDomain
    h: float
    directions: tuple            # primitive integer vectors, one per antipodal pair
    lattice: np.ndarray          # (N, dim) integer node coordinates
    points: np.ndarray           # (N, dim) physical node coordinates
    nbr_plus: list = field(repr=False)
    arm_plus: list = field(repr=False)
    nbr_minus: list = field(repr=False)
    arm_minus: list = field(repr=False)

    @property
    def n_interior(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def direction_lengths(self):
        return np.array([np.linalg.norm(e) for e in self.directions])

    def boundary_arm_endpoints(self):
        """Physical coordinates of all shortened-arm crossing points; these
        lie exactly on the defining spheres."""
        out = []
        for d, e in enumerate(self.directions):
            unit = np.asarray(e, dtype=float)
            unit = unit / np.linalg.norm(unit)
            for nbr, arm, sgn in ((self.nbr_plus[d], self.arm_plus[d], 1.0),
                                  (self.nbr_minus[d], self.arm_minus[d], -1.0)):
                cut = nbr < 0
                if np.any(cut):
                    out.append(self.points[cut] + sgn * arm[cut, None] * unit[None, :])
        if not out:
            return np.zeros((0, self.dim))
        return np.concatenate(out, axis=0)

    def interpolate(self, values, points):
        """Multilinear interpolation of interior node values at arbitrary
        points; nodes outside the interior contribute the boundary value 0."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = self.lattice.min(axis=0)
        hi = self.lattice.max(axis=0)
        shape = tuple(hi - lo + 1)
        box = np.zeros(shape)
        idx = tuple((self.lattice - lo).T)
        box[idx] = values
        rel = pts / self.h - lo
        base = np.floor(rel).astype(int)
        frac = rel - base
        base = np.clip(base, 0, np.array(shape) - 2)
        frac = np.clip(rel - base, 0.0, 1.0)
        out = np.zeros(pts.shape[0])
        for corner in np.ndindex(*(2,) * self.dim):
            w = np.ones(pts.shape[0])
            loc = []
            for d in range(self.dim):
                w = w * (frac[:, d] if corner[d] else 1.0 - frac[:, d])
                loc.append(base[:, d] + corner[d])
            out += w * box[tuple(loc)]
        return out

    def to_csv(self, values, path):
        """Write one row per interior node: coordinates then value."""
        cols = ["x", "y", "z"][: self.dim]
        with open(path, "w") as fh:
            fh.write(",".join(cols + ["u"]) + "\n")
            for pt, v in zip(self.points, values):
                coords = ",".join(repr(float(c)) for c in pt)
                fh.write(f"{coords},{float(v)!r}\n")

    def classification_csv(self, path):
        """Write every bounding-box lattice node with its class."""
        lo, hi = self.domain.bounding_box()
        i_lo = np.ceil(lo / self.h - 1e-12).astype(int)
        i_hi = np.floor(hi / self.h + 1e-12).astype(int)
        axes = [np.arange(a, b + 1) for a, b in zip(i_lo, i_hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        lattice_all = mesh.reshape(-1, self.dim)
        margins = self.domain.margins(lattice_all * self.h)
        cols = ["x", "y", "z"][: self.dim]
        with open(path, "w") as fh:
            fh.write(",".join(cols + ["class"]) + "\n")
            for node, m in zip(lattice_all, margins):
                coords = ",".join(repr(float(c * self.h)) for c in node)
                fh.write(f"{coords},{'interior' if m > 0 else 'exterior'}\n")


def rasterize(domain: CRDomain, h, directions, node_budget=DEFAULT_NODE_BUDGET) -> Grid:
    """Classify lattice nodes against the domain and record arm data.

    Parameters
    ----------
    domain : CRDomain
    h : scalar
        Grid spacing; nodes at integer multiples of h.
    directions : sequence of integer vectors
        One representative per antipodal pair; arms are recorded for both
        orientations.
    node_budget : int
        Upper bound on bounding-box nodes.
    """
    if h <= 0:
        raise ValueError("spacing must be positive")
    directions = tuple(tuple(int(c) for c in e) for e in directions)
    lo, hi = domain.bounding_box()
    i_lo = np.ceil(lo / h - 1e-12).astype(int)
    i_hi = np.floor(hi / h + 1e-12).astype(int)
    shape = tuple(max(b - a + 1, 0) for a, b in zip(i_lo, i_hi))
    total = int(np.prod([max(s, 1) for s in shape])) if all(s > 0 for s in shape) else 0
    if total > node_budget:
        raise ResourceError(f"grid would have {total} nodes, over budget {node_budget}")
    if total == 0:
        raise ValueError("domain bounding box contains no lattice nodes at this spacing")

    axes = [np.arange(a, b + 1) for a, b in zip(i_lo, i_hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    lattice_all = mesh.reshape(-1, domain.dim)
    margins = domain.margins(lattice_all * h)
    interior_mask = margins > 0
    lattice = lattice_all[interior_mask]
    points = lattice * h

    # ordinal lookup over the bounding box, -1 for non-interior
    ordinal = -np.ones(shape, dtype=np.int64)
    ordinal[tuple((lattice - i_lo).T)] = np.arange(lattice.shape[0])

    def lookup(lat):
        inside = np.all((lat >= i_lo) & (lat <= i_hi), axis=1)
        out = -np.ones(lat.shape[0], dtype=np.int64)
        if np.any(inside):
            out[inside] = ordinal[tuple((lat[inside] - i_lo).T)]
        return out

    nbr_plus, arm_plus, nbr_minus, arm_minus = [], [], [], []
    for e in directions:
        evec = np.array(e, dtype=int)
        full_len = h * float(np.linalg.norm(evec))
        for sgn, nbrs, arms in ((1, nbr_plus, arm_plus), (-1, nbr_minus, arm_minus)):
            lat_n = lattice + sgn * evec
            nbr = lookup(lat_n)
            arm = np.full(lattice.shape[0], full_len)
            cut = nbr < 0
            if np.any(cut):
                arm[cut] = _crossings(domain, points[cut], sgn * evec)
            nbrs.append(nbr)
            arms.append(arm)

    return Grid(domain, float(h), directions, lattice, points,
                nbr_plus, arm_plus, nbr_minus, arm_minus)


def _crossings(domain: CRDomain, pts, evec):
    """Vectorized boundary crossing distance along one direction for a batch
    of interior points whose arm leaves the domain."""
    unit = np.asarray(evec, dtype=float)
    unit = unit / np.linalg.norm(unit)
    diff = pts[:, None, :] - domain.centers[None, :, :]
    b = diff @ unit
    disc = b**2 + domain.radius**2 - np.sum(diff**2, axis=-1)
    t = -b + np.sqrt(np.maximum(disc, 0.0))
    return t.min(axis=1)
