"""Numerical toolkit for truncated Laplacians with power nonlinearities.

Extremal eigenvalue-sum operators on symmetric matrices, closed-form
reference solutions and envelopes, uniformly convex domain geometry, a
monotone wide-stencil finite difference solver, and reproducible
experiments keyed to the operators' existence and boundary phenomena.
"""

from .exact import (
    ball_solution,
    bump_solution,
    gaussian_limit_profile,
    integrate_radial_ode,
    max_amplitude,
    pplus_supersolution,
    radial_hessian_eigs,
    subsolution_envelope,
    supersolution_envelope,
)
from .geometry import CRDomain, Grid, rasterize
from .solver import (
    Discretization,
    ProblemSpec,
    apriori_check,
    discretize,
    linear_dirichlet_solve,
    normalized_fixed_point,
    phi_map,
    principal_eigenvalue_estimate,
    pseudo_time_solve,
    squeeze_solve,
)
from .spectral import (
    Frame,
    SymMat,
    apply_operator,
    degeneracy_witness,
    eigenvalues_sorted,
    frame_sum,
    pminus,
    pplus,
    sample_inf_sup,
)
from .stencil import StencilScheme

__version__ = "0.1.0"
