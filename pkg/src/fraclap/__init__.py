"""Spectral Galerkin solver for bipolynomial fractional Dirichlet-Laplace
problems: w^2((-Laplace)) u = D_u F(x, u) on boxes and 2-D polygons."""

from .domain import Domain, InvalidDomainError, integrate, make_box, make_polygon2d
from .eigenbasis import (
    ConvergenceReport,
    EigenPair,
    EigensolveError,
    SpectralBasis,
    analytic_box_basis,
    basis_from_eigenvalues,
    discrete_basis,
    eigen_convergence_report,
    gram_matrix,
)
from .calculus import (
    DecayDiagnostic,
    FractionalPolynomial,
    SpectralFunction,
    apply_inverse_sq,
    apply_poly,
    apply_power,
    domain_decay_diagnostic,
    eval_poly,
    m_beta,
    norm_beta,
    norm_tilde,
    project,
    synthesize,
    unit_function,
    zero_function,
)
from .linear import (
    LinearSolveReport,
    equivalence_check,
    inverse_spectrum,
    solve_linear,
    weak_residual,
)
from .variational import (
    CoercivityCheck,
    GrowthConstants,
    MinimizeReport,
    Nonlinearity,
    NonFiniteSampleError,
    builtin_example_nonlinearity,
    check_coercivity,
    derivative_mismatch,
    energy,
    gradient,
    growth_violations,
    linear_source_nonlinearity,
    minimize,
    minimize_multistart,
    polynomial_nonlinearity,
)

__version__ = "0.1.0"
