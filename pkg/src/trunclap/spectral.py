"""Eigenvalue-sum operators on small symmetric matrices.

Evaluates operators of the form "sum of selected eigenvalues of a symmetric
matrix": the extremal partial sums (k smallest / k largest), convex
combinations, partial sums over an index set, and min/max/mean families built
from them.  These are the matrix-level ground truth that the grid solver is
checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Union

import numpy as np

MIN_DIM = 2
MAX_DIM = 6

ORTHO_TOL = 1e-10
WEIGHT_TOL = 1e-12


def scaled_tol(norm, base=1e-10):
    """Absolute tolerance scaled by (1 + matrix norm)."""
    return base * (1.0 + norm)


# ---------------------------------------------------------------------------
# symmetric matrices
# ---------------------------------------------------------------------------

class SymMat:
    """Dense real symmetric matrix of order 2..6.

    Storage is exactly symmetric: the constructor rejects inputs that are
    asymmetric beyond roundoff and stores (A + A^T)/2.  Eigenvalues are
    computed once, on demand, by cyclic Jacobi rotations.
    """

    __slots__ = ("mat", "_eigs")

    def __init__(self, entries):
        a = np.asarray(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if not MIN_DIM <= n <= MAX_DIM:
            raise ValueError(f"dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        scale = 1.0 + np.abs(a).max()
        if np.abs(a - a.T).max() > 1e-8 * scale:
            raise ValueError("matrix is not symmetric")
        self.mat = 0.5 * (a + a.T)
        self.mat.flags.writeable = False
        self._eigs = None

    @property
    def n(self):
        return self.mat.shape[0]

    @classmethod
    def diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def outer(cls, zeta):
        """Tensor product zeta (x) zeta."""
        z = np.asarray(zeta, dtype=float)
        return cls(np.outer(z, z))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n)))

    @classmethod
    def from_text(cls, text):
        """Parse a whitespace-separated row-major square matrix."""
        vals = [float(tok) for tok in text.split()]
        n = math.isqrt(len(vals))
        if n * n != len(vals):
            raise ValueError(f"{len(vals)} entries do not form a square matrix")
        return cls(np.array(vals).reshape(n, n))

    def to_text(self):
        """Whitespace-separated row-major serialization (test fixtures)."""
        return " ".join(repr(float(v)) for v in self.mat.ravel())

    def eigenvalues(self):
        """Ascending eigenvalues, cached after the first call."""
        if self._eigs is None:
            e = _jacobi_eigenvalues(self.mat)
            e.flags.writeable = False
            self._eigs = e
        return self._eigs

    def norm(self):
        """Spectral norm max_i |lambda_i|."""
        e = self.eigenvalues()
        return max(abs(e[0]), abs(e[-1]))

    def trace(self):
        return float(np.trace(self.mat))

    def __add__(self, other):
        return SymMat(self.mat + other.mat)

    def __sub__(self, other):
        return SymMat(self.mat - other.mat)

    def __neg__(self):
        return SymMat(-self.mat)

    def __mul__(self, t):
        return SymMat(self.mat * float(t))

    __rmul__ = __mul__

    def __repr__(self):
        return f"SymMat(n={self.n})"


def _jacobi_eigenvalues(mat, max_sweeps=50):
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Works on nested lists for speed at these tiny sizes; accurate to a few
    ulps, which is what oracle duty requires.
    """
    n = mat.shape[0]
    a = [list(map(float, row)) for row in mat]
    scale = max(1.0, max(abs(v) for row in a for v in row))
    stop = (1e-15 * scale) ** 2 * n * n
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            row = a[p]
            for q in range(p + 1, n):
                off += row[q] * row[q]
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = 0.5 * (a[q][q] - a[p][p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p][p], a[q][q]
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = 0.0
                a[q][p] = 0.0
                for r in range(n):
                    if r == p or r == q:
                        continue
                    arp, arq = a[r][p], a[r][q]
                    a[r][p] = c * arp - s * arq
                    a[p][r] = a[r][p]
                    a[r][q] = s * arp + c * arq
                    a[q][r] = a[r][q]
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.array([a[i][i] for i in range(n)]))


def eigenvalues_sorted(x: SymMat):
    """Ascending eigenvalues of a SymMat."""
    return x.eigenvalues()


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PminusK:
    """Sum of the k smallest eigenvalues."""
    k: int
    n: int

    def __post_init__(self):
        _check_k(self.k, self.n)

    @property
    def dimension(self):
        return self.n

    def evaluate_sorted(self, eigs):
        return float(np.sum(eigs[: self.k]))


@dataclass(frozen=True)
class PplusK:
    """Sum of the k largest eigenvalues."""
    k: int
    n: int

    def __post_init__(self):
        _check_k(self.k, self.n)

    @property
    def dimension(self):
        return self.n

    def evaluate_sorted(self, eigs):
        return float(np.sum(eigs[self.n - self.k:]))


@dataclass(frozen=True)
class WeightedSum:
    """Convex combination sum_i alpha_i lambda_i, weights on the simplex."""
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if not MIN_DIM <= w.size <= MAX_DIM:
            raise ValueError(f"weight count {w.size} outside [{MIN_DIM}, {MAX_DIM}]")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 within {WEIGHT_TOL}")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    @property
    def dimension(self):
        return len(self.weights)

    def evaluate_sorted(self, eigs):
        return float(np.dot(self.weights, eigs))


@dataclass(frozen=True)
class PartialSum:
    """Sum of eigenvalues at fixed (1-based) positions j_1 < ... < j_k."""
    indices: tuple
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) == 0 or len(set(idx)) != len(idx) or list(idx) != sorted(idx):
            raise ValueError("indices must be strictly increasing and nonempty")
        if idx[0] < 1 or idx[-1] > self.n:
            raise ValueError(f"indices must lie in [1, {self.n}]")
        object.__setattr__(self, "indices", idx)

    @property
    def dimension(self):
        return self.n

    def evaluate_sorted(self, eigs):
        return float(sum(eigs[j - 1] for j in self.indices))


def _member_dimension(members):
    dims = {m.dimension for m in members}
    if len(dims) != 1:
        raise ValueError("member operators must share one dimension")
    return dims.pop()


@dataclass(frozen=True)
class MaxOf:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        _member_dimension(self.members)

    @property
    def dimension(self):
        return _member_dimension(self.members)

    def evaluate_sorted(self, eigs):
        return max(m.evaluate_sorted(eigs) for m in self.members)


@dataclass(frozen=True)
class MinOf:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        _member_dimension(self.members)

    @property
    def dimension(self):
        return _member_dimension(self.members)

    def evaluate_sorted(self, eigs):
        return min(m.evaluate_sorted(eigs) for m in self.members)


@dataclass(frozen=True)
class MeanOf:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        _member_dimension(self.members)

    @property
    def dimension(self):
        return _member_dimension(self.members)

    def evaluate_sorted(self, eigs):
        vals = [m.evaluate_sorted(eigs) for m in self.members]
        return float(sum(vals)) / len(vals)


SpectralOperator = Union[PminusK, PplusK, WeightedSum, PartialSum, MaxOf, MinOf, MeanOf]


def _check_k(k, n):
    if not MIN_DIM <= n <= MAX_DIM:
        raise ValueError(f"dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")


def apply_operator(op: SpectralOperator, x: SymMat) -> float:
    """Value of an eigenvalue-sum operator on a symmetric matrix."""
    if op.dimension != x.n:
        raise ValueError(f"operator dimension {op.dimension} != matrix dimension {x.n}")
    return op.evaluate_sorted(x.eigenvalues())


def pminus(x: SymMat, k: int) -> float:
    """Sum of the k smallest eigenvalues of x."""
    return apply_operator(PminusK(k, x.n), x)


def pplus(x: SymMat, k: int) -> float:
    """Sum of the k largest eigenvalues of x."""
    return apply_operator(PplusK(k, x.n), x)


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------

class Frame:
    """A set of k pairwise orthonormal direction vectors in R^n."""

    __slots__ = ("vectors", "tol")

    def __init__(self, vectors, tol=ORTHO_TOL):
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.ndim != 2 or v.shape[0] > v.shape[1]:
            raise ValueError(f"expected k<=n direction vectors, got shape {v.shape}")
        gram = v @ v.T
        if np.abs(np.diag(gram) - 1.0).max() > tol:
            raise ValueError("frame vectors must have unit norm")
        off = gram - np.diag(np.diag(gram))
        if off.size and np.abs(off).max() > tol:
            raise ValueError("frame vectors must be pairwise orthogonal")
        self.vectors = v
        self.vectors.flags.writeable = False
        self.tol = tol

    @property
    def k(self):
        return self.vectors.shape[0]

    @property
    def n(self):
        return self.vectors.shape[1]

    @classmethod
    def axes(cls, n, k=None):
        """The first k coordinate directions."""
        k = n if k is None else k
        return cls(np.eye(n)[:k])


def frame_sum(x: SymMat, frame: Frame) -> float:
    """sum_i <X zeta_i, zeta_i> over the frame directions.

    Always lies between the k smallest and k largest eigenvalue sums.
    """
    if frame.n != x.n:
        raise ValueError(f"frame dimension {frame.n} != matrix dimension {x.n}")
    v = frame.vectors
    return float(np.einsum("in,nm,im->", v, x.mat, v))


def random_frames(n, k, n_samples, rng):
    """Haar-distributed orthonormal k-frames in R^n.

    Gram-Schmidt orthonormalization of standard Gaussian draws, realized as
    batched QR with the sign of the R diagonal fixed (identical result,
    rotation invariant).
    """
    g = rng.standard_normal((n_samples, n, k))
    q, r = np.linalg.qr(g)
    signs = np.sign(np.einsum("mkk->mk", r))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def sample_inf_sup(x: SymMat, k: int, n_samples: int, rng=None):
    """Monte Carlo bracket of the extremal eigenvalue sums.

    Returns (inf_estimate, sup_estimate): min and max of the frame sum over
    random orthonormal k-frames.  The inf estimate is >= the k smallest
    eigenvalue sum, the sup estimate <= the k largest, and both converge to
    the exact values as the sample count grows.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    _check_k(k, x.n)
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    lo = math.inf
    hi = -math.inf
    chunk = 20000
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        q = random_frames(x.n, k, m, rng)
        t = np.einsum("mik,ij,mjk->m", q, x.mat, q)
        lo = min(lo, float(t.min()))
        hi = max(hi, float(t.max()))
        done += m
    return lo, hi


def degeneracy_witness(k: int, n: int, zeta) -> float:
    """Increment of the k-smallest eigenvalue sum under a rank-one bump at X=0.

    Vanishes whenever k < n: adding zeta (x) zeta does not move the k smallest
    eigenvalues at all, which is the loss of strict directional ellipticity.
    For k = n the operator is the trace and the increment is |zeta|^2 > 0, so
    the witness is rejected.
    """
    _check_k(k, n)
    if k == n:
        raise ValueError("witness requires k < n: for k = n the operator is uniformly elliptic")
    z = np.asarray(zeta, dtype=float)
    if z.shape != (n,):
        raise ValueError(f"zeta must be a vector of length {n}")
    bump = SymMat.outer(z)
    return pminus(bump, k) - pminus(SymMat.zero(n), k)
