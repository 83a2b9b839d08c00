"""Wide-stencil direction sets on the integer lattice.

A scheme of order s uses every primitive integer direction with coordinates
bounded by s (antipodes identified).  Discrete frames are the size-k subsets
of those directions that are exactly orthogonal in integer arithmetic; the
min/max of frame sums of second differences is the monotone discretization of
the extremal eigenvalue-sum operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np


class ConfigurationError(ValueError):
    """The stencil cannot express the requested operator."""


def _is_canonical(vec):
    for c in vec:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


def _primitive(vec):
    g = 0
    for c in vec:
        g = math.gcd(g, abs(c))
    return g == 1


def lattice_directions(dim, order):
    """Primitive integer vectors with max coordinate <= order, one
    representative per antipodal pair, axes first."""
    if dim not in (2, 3):
        raise ConfigurationError("stencil dimension must be 2 or 3")
    if order < 1:
        raise ConfigurationError("stencil order must be >= 1")
    dirs = []
    for vec in product(range(-order, order + 1), repeat=dim):
        if any(vec) and _primitive(vec) and _is_canonical(vec):
            dirs.append(vec)

    def sort_key(v):
        return (sum(c * c for c in v), tuple(-c for c in v))

    dirs.sort(key=sort_key)
    return tuple(dirs)


@dataclass(frozen=True)
class StencilScheme:
    """Direction set of one stencil order plus its orthogonal k-frames."""

    dim: int
    order: int
    directions: tuple = field(init=False)

    def __post_init__(self):
        dirs = lattice_directions(self.dim, self.order)
        object.__setattr__(self, "directions", dirs)
        axes = {tuple(int(i == d) for i in range(self.dim)) for d in range(self.dim)}
        if not axes.issubset(set(dirs)):
            raise ConfigurationError("axis directions missing from stencil")

    @property
    def n_directions(self):
        return len(self.directions)

    def lengths_squared(self):
        return np.array([sum(c * c for c in e) for e in self.directions], dtype=float)

    def frames(self, k):
        """Orthogonal k-frames as tuples of direction ordinals.

        The all-axes subsets are always among them; raises when no exactly
        orthogonal k-subset exists.
        """
        return orthogonal_frames(self.directions, k)


def orthogonal_frames(directions, k):
    if k < 1:
        raise ConfigurationError("k must be >= 1")
    dim = len(directions[0])
    if k > dim:
        raise ConfigurationError(f"k={k} exceeds dimension {dim}")
    out = []
    for combo in combinations(range(len(directions)), k):
        ok = True
        for a, b in combinations(combo, 2):
            if sum(x * y for x, y in zip(directions[a], directions[b])) != 0:
                ok = False
                break
        if ok:
            out.append(combo)
    if not out:
        raise ConfigurationError(f"no orthogonal {k}-frame exists in this stencil")
    return tuple(out)
