"""Operator calculus for the Dirichlet Laplacian in coefficient space.

With the eigenpairs (lambda_j, e_j) in hand, any Borel function b of the
operator acts diagonally on the expansion u = sum a_j e_j via
a_j -> b(lambda_j) a_j.  Everything here is an exact elementwise multiply
on coefficient vectors; synthesis to grid samples happens only at module
boundaries, so operator identities (semigroup, inverse round trip, ...)
hold to floating-point accuracy rather than quadrature accuracy.

The central function class is w(lambda) = sum alpha_i lambda^{beta_i} with
positive weights and strictly increasing nonnegative exponents, extended
by 0 for lambda < 0.  Its square w^2 drives the linear problem; the
fractional power lambda^beta is the single-term special case.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import integrate
from .eigenbasis import SpectralBasis


@dataclass(frozen=True)
class FractionalPolynomial:
    """w(lambda) = sum alpha_i lambda^{beta_i}, zero for negative lambda.

    Requires alpha_i > 0 and 0 <= beta_0 < beta_1 < ... < beta_k.
    """

    terms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(a), float(b)) for a, b in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("polynomial needs at least one term")
        alphas = [a for a, _ in terms]
        betas = [b for _, b in terms]
        if any(a <= 0 for a in alphas):
            raise ValueError(f"coefficients alpha must be positive, got {alphas}")
        if betas[0] < 0 or any(b1 >= b2 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError(
                "exponents must satisfy 0 <= beta_0 < beta_1 < ... < beta_k, "
                f"got {betas}"
            )

    @property
    def leading(self) -> tuple[float, float]:
        """(alpha_k, beta_k) of the top-order term."""
        return self.terms[-1]

    def __call__(self, lam):
        return eval_poly(self, lam)

    def __add__(self, other: "FractionalPolynomial") -> "FractionalPolynomial":
        merged: dict[float, float] = {}
        for a, b in self.terms + other.terms:
            merged[b] = merged.get(b, 0.0) + a
        return FractionalPolynomial(tuple((merged[b], b) for b in sorted(merged)))


def eval_poly(w: FractionalPolynomial, lam):
    """Evaluate w pointwise; scalar in, scalar out."""
    arr = np.asarray(lam, dtype=float)
    out = np.zeros_like(arr)
    pos = arr >= 0
    for a, b in w.terms:
        out[pos] += a * np.power(arr[pos], b)
    if np.isscalar(lam) or arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SpectralFunction:
    """u = sum a_j e_j as a coefficient vector tied to a basis."""

    basis: SpectralBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (len(self.basis),):
            raise ValueError(
                f"expected {len(self.basis)} coefficients, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        _require_same_basis(self, other)
        return SpectralFunction(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralFunction") -> "SpectralFunction":
        _require_same_basis(self, other)
        return SpectralFunction(self.basis, self.coeffs - other.coeffs)

    def __rmul__(self, scalar) -> "SpectralFunction":
        return SpectralFunction(self.basis, float(scalar) * self.coeffs)

    def l2_norm(self) -> float:
        """Parseval: ||u||_{L2} = ||coeffs||_2."""
        return float(np.linalg.norm(self.coeffs))


def _require_same_basis(u: SpectralFunction, v: SpectralFunction):
    if u.basis is not v.basis:
        raise ValueError("operands are tied to different bases")


def zero_function(basis: SpectralBasis) -> SpectralFunction:
    return SpectralFunction(basis, np.zeros(len(basis)))


def unit_function(basis: SpectralBasis, j: int) -> SpectralFunction:
    """The j-th basis eigenfunction as a SpectralFunction (0-based j)."""
    c = np.zeros(len(basis))
    c[j] = 1.0
    return SpectralFunction(basis, c)


def synthesize(u: SpectralFunction) -> np.ndarray:
    """Grid samples of u on the basis's quadrature nodes."""
    return u.basis.values @ u.coeffs


def project(basis: SpectralBasis, samples) -> SpectralFunction:
    """L2 projection of grid samples onto the truncated basis."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (basis.domain.node_count,):
        raise ValueError(
            f"expected {basis.domain.node_count} samples, got {samples.shape}"
        )
    coeffs = basis.values.T @ (basis.domain.weights * samples)
    return SpectralFunction(basis, coeffs)


def apply_power(u: SpectralFunction, beta: float) -> SpectralFunction:
    """Fractional power: a_j -> lambda_j^beta a_j (beta = 0 is the identity)."""
    beta = float(beta)
    if beta < 0:
        raise ValueError("negative powers are not defined here; "
                         "use apply_inverse_sq for 1/w^2")
    if beta == 0.0:
        return SpectralFunction(u.basis, u.coeffs)
    return SpectralFunction(u.basis, u.basis.eigenvalues**beta * u.coeffs)


def apply_poly(u: SpectralFunction, w: FractionalPolynomial) -> SpectralFunction:
    """a_j -> w(lambda_j) a_j."""
    return SpectralFunction(u.basis, eval_poly(w, u.basis.eigenvalues) * u.coeffs)


def apply_inverse_sq(g: SpectralFunction, w: FractionalPolynomial) -> SpectralFunction:
    """Inverse of w^2 of the operator: a_j -> a_j / w(lambda_j)^2.

    Well-defined because all eigenvalues are positive and w has positive
    coefficients, so w(lambda_j)^2 > 0.
    """
    lam = g.basis.eigenvalues
    if np.any(lam <= 0):
        raise ValueError("basis violates the positive-spectrum invariant")
    w2 = eval_poly(w, lam) ** 2
    return SpectralFunction(g.basis, g.coeffs / w2)


def m_beta(basis: SpectralBasis, beta: float) -> float:
    """Norm-equivalence constant: max of lambda_j^(-2 beta) over lambda_j < 1.

    Equals 1 when no eigenvalue lies below 1 (always >= 1).  It is the
    sharp constant in ||u||_{L2}^2 <= M_beta * ||A^beta u||_{L2}^2 on the
    span of the basis.
    """
    if len(basis) == 0:
        raise ValueError("basis is empty")
    lam = basis.eigenvalues
    small = lam[lam < 1.0]
    if small.size == 0:
        return 1.0
    return float(np.max(small ** (-2.0 * float(beta))))


def norm_tilde(u: SpectralFunction, beta: float) -> float:
    """Homogeneous norm ||A^beta u||_{L2} = sqrt(sum (lambda_j^beta a_j)^2)."""
    return float(np.linalg.norm(u.basis.eigenvalues ** float(beta) * u.coeffs))


def norm_beta(u: SpectralFunction, beta: float) -> float:
    """Graph norm sqrt(||u||_{L2}^2 + ||A^beta u||_{L2}^2).

    Satisfies norm_tilde(u) <= norm_beta(u) <= sqrt(M_beta + 1) * norm_tilde(u).
    """
    nt = norm_tilde(u, beta)
    return float(np.sqrt(np.dot(u.coeffs, u.coeffs) + nt * nt))


@dataclass(frozen=True)
class DecayDiagnostic:
    """Truncation-level proxy for membership of u in the domain of A^beta.

    The infinite-series condition sum (lambda_j^beta a_j)^2 < inf is not
    decidable from J coefficients; instead we report the fraction of the
    weighted energy carried by the top quarter of retained modes and flag
    it against a threshold.  Heuristic by construction.
    """

    tail_fraction: float
    in_domain_at_truncation: bool
    threshold: float


def domain_decay_diagnostic(
    u: SpectralFunction, beta: float, threshold: float = 0.01
) -> DecayDiagnostic:
    J = len(u.basis)
    if J < 8:
        raise ValueError("decay diagnostic needs J >= 8")
    terms = (u.basis.eigenvalues ** float(beta) * u.coeffs) ** 2
    total = float(np.sum(terms))
    tail = float(np.sum(terms[J - J // 4:]))
    frac = tail / total if total > 0 else 0.0
    return DecayDiagnostic(
        tail_fraction=frac,
        in_domain_at_truncation=frac <= threshold,
        threshold=threshold,
    )


def parseval_gap(u: SpectralFunction) -> float:
    """|quadrature ||u||^2 - sum a_j^2|; small iff the basis is orthonormal
    under its quadrature and u is exactly representable."""
    s = synthesize(u)
    quad = integrate(u.basis.domain, s * s)
    return abs(quad - float(np.dot(u.coeffs, u.coeffs)))
