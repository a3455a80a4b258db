"""Energy minimization for the semilinear problem w^2(A) u = D_u F(x, u).

A stationary point of

    f(u) = 1/2 ||w(A) u||_{L2}^2 - int F(x, u(x)) dx

satisfies the weak identity int w(A)u w(A)v = int D_uF(x,u) v for every
test function v, which at truncation is exactly the strong equation, so
minimizing f solves the problem.  The directional derivative of f along
e_m is w(lambda_m)^2 u_m - <D_uF(., u), e_m>, i.e. the gradient vector is
the Euler-Lagrange residual by components.

Minimization uses gradient descent with a diagonal preconditioner
1/(w(lambda_j)^2 + 1) (equalizes the known spectral stiffness without
moving stationary points) and Armijo backtracking.  Existence of a global
minimizer is guaranteed when F grows at most like (A/2)|u|^2 + B|u| + C
with A below alpha_k^2 / M_{beta_k}: then f is coercive.  A descent
method may still only find a critical point; the seeded multi-start
helper is the mitigation, and reports carry energies and residuals so
distinct critical points are visible rather than silently merged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calculus import (
    FractionalPolynomial,
    SpectralFunction,
    eval_poly,
    m_beta,
    synthesize,
)
from .domain import integrate
from .eigenbasis import SpectralBasis

ARMIJO_C1 = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-20


class NonFiniteSampleError(ValueError):
    """The nonlinearity produced a non-finite value at a quadrature node."""

    def __init__(self, kind: str, node_index: int, node: np.ndarray):
        self.kind = kind
        self.node_index = node_index
        self.node = np.asarray(node)
        coords = ", ".join(repr(float(c)) for c in self.node)
        super().__init__(
            f"{kind} is non-finite at quadrature node {node_index} ({coords})"
        )


@dataclass(frozen=True)
class GrowthConstants:
    """User-declared growth bounds for F and D_uF.

    |F(x,u)|    <= a u^2 + b        (b an L1-bound constant)
    |D_uF(x,u)| <= c |u| + d        (d an L2-bound constant)
    F(x,u)      <= (A/2) u^2 + B |u| + C

    The third line is what coercivity of the energy rests on; only A
    enters the coercivity criterion.
    """

    a: float
    b: float
    c: float
    d: float
    A: float
    B: float
    C: float


@dataclass(frozen=True)
class Nonlinearity:
    """F(x, u) and its u-derivative, vectorized over quadrature nodes.

    ``F`` and ``dF`` map (nodes, values) -> per-node array, where nodes is
    the (Q, N) node array and values a (Q,) sample vector.  ``growth`` may
    be None when no bounds are declared; coercivity then cannot be checked.
    """

    F: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dF: Callable[[np.ndarray, np.ndarray], np.ndarray]
    growth: GrowthConstants | None = None
    name: str = "custom"


def _eval_checked(fn, nodes, values, kind: str) -> np.ndarray:
    out = np.asarray(fn(nodes, values), dtype=float)
    if out.shape != (nodes.shape[0],):
        raise ValueError(f"{kind} must return one value per node")
    bad = ~np.isfinite(out)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonFiniteSampleError(kind, i, nodes[i])
    return out


def derivative_mismatch(nl: Nonlinearity, nodes: np.ndarray, values: np.ndarray,
                        step: float = 1e-5) -> float:
    """Max deviation between dF and a central difference of F.

    The invariant expected of a well-formed Nonlinearity is a mismatch
    below 1e-4 at step 1e-5 on representative (x, u) samples.
    """
    fd = (nl.F(nodes, values + step) - nl.F(nodes, values - step)) / (2.0 * step)
    return float(np.max(np.abs(fd - nl.dF(nodes, values))))


def growth_violations(nl: Nonlinearity, nodes: np.ndarray,
                      u_max: float = 10.0, u_samples: int = 41) -> dict[str, float]:
    """Pointwise scan of the declared growth bounds over u in [-u_max, u_max].

    Returns the worst signed excess per condition (<= 0 means satisfied on
    the scanned set).  The bounds are hypotheses of the existence theory,
    not algorithm preconditions, so callers warn rather than fail.
    """
    if nl.growth is None:
        raise ValueError("nonlinearity declares no growth constants")
    g = nl.growth
    worst = {"quadratic_bound": -np.inf, "derivative_bound": -np.inf,
             "upper_bound": -np.inf}
    for u in np.linspace(-u_max, u_max, u_samples):
        uu = np.full(nodes.shape[0], u)
        Fv = np.asarray(nl.F(nodes, uu), dtype=float)
        dFv = np.asarray(nl.dF(nodes, uu), dtype=float)
        worst["quadratic_bound"] = max(
            worst["quadratic_bound"], float(np.max(np.abs(Fv) - (g.a * u * u + g.b)))
        )
        worst["derivative_bound"] = max(
            worst["derivative_bound"],
            float(np.max(np.abs(dFv) - (g.c * abs(u) + g.d))),
        )
        worst["upper_bound"] = max(
            worst["upper_bound"],
            float(np.max(Fv - (0.5 * g.A * u * u + g.B * abs(u) + g.C))),
        )
    return worst


def energy(u: SpectralFunction, nl: Nonlinearity, w: FractionalPolynomial) -> float:
    """f(u) = 1/2 sum (w(lambda_j) u_j)^2 - int F(x, u(x)) dx."""
    wl = eval_poly(w, u.basis.eigenvalues)
    quad = 0.5 * float(np.dot(wl * u.coeffs, wl * u.coeffs))
    nodes = u.basis.domain.nodes
    Fv = _eval_checked(nl.F, nodes, synthesize(u), "F")
    return quad - integrate(u.basis.domain, Fv)


def gradient(u: SpectralFunction, nl: Nonlinearity,
             w: FractionalPolynomial) -> np.ndarray:
    """Gateaux gradient by components: w(lambda_j)^2 u_j - <dF(., u), e_j>."""
    basis = u.basis
    w2 = eval_poly(w, basis.eigenvalues) ** 2
    dFv = _eval_checked(nl.dF, basis.domain.nodes, synthesize(u), "dF")
    proj = basis.values.T @ (basis.domain.weights * dFv)
    return w2 * u.coeffs - proj


@dataclass(frozen=True)
class CoercivityCheck:
    ok: bool
    margin: float
    threshold: float


def check_coercivity(nl: Nonlinearity, w: FractionalPolynomial,
                     basis: SpectralBasis) -> CoercivityCheck:
    """Test A < alpha_k^2 / M_{beta_k}, the condition for f -> inf.

    Uses the truncated spectrum for M_{beta_k}; since eigenvalues below 1
    (if any) are among the smallest, truncation does not change the
    constant once J reaches their count.
    """
    if nl.growth is None:
        raise ValueError("coercivity check needs declared growth constants")
    alpha_k, beta_k = w.leading
    threshold = alpha_k**2 / m_beta(basis, beta_k)
    margin = threshold - nl.growth.A
    return CoercivityCheck(ok=nl.growth.A < threshold, margin=float(margin),
                           threshold=float(threshold))


@dataclass
class MinimizeReport:
    """Outcome of one descent run.

    ``status`` is "converged", "max_iters" or "line_search_underflow";
    ``converged`` implies gradient_norm <= the effective tolerance.  The
    Euler-Lagrange residual is the max-norm of the gradient, i.e. the worst
    per-test-function defect of the weak identity.
    """

    solution: SpectralFunction
    energy: float
    gradient_norm: float
    euler_lagrange_residual: float
    iterations: int
    coercivity_margin: float
    converged: bool
    status: str
    trace: list[tuple[int, float, float, float]] = field(default_factory=list)


def minimize(nl: Nonlinearity, w: FractionalPolynomial, basis: SpectralBasis,
             gtol: float | None = None, max_iters: int = 10000,
             u0: SpectralFunction | None = None,
             allow_noncoercive: bool = False,
             record_trace: bool = False) -> MinimizeReport:
    """Preconditioned gradient descent with Armijo backtracking.

    Starts from ``u0`` (default 0) and stops when the gradient 2-norm drops
    below ``gtol``; the default tolerance is 1e-8 * (1 + |f(u)|), evaluated
    at the current iterate.  When the declared growth constants fail the
    coercivity test this raises unless ``allow_noncoercive`` is set, in
    which case it warns and proceeds (descent is still well-defined; only
    the existence guarantee is lost).
    """
    coercivity_margin = float("nan")
    if nl.growth is not None:
        chk = check_coercivity(nl, w, basis)
        coercivity_margin = chk.margin
        if not chk.ok:
            msg = (f"coercivity condition fails: A={nl.growth.A} >= "
                   f"threshold {chk.threshold}")
            if not allow_noncoercive:
                raise ValueError(msg + " (pass allow_noncoercive=True to proceed)")
            warnings.warn(msg + "; proceeding without an existence guarantee",
                          UserWarning, stacklevel=2)
    else:
        warnings.warn("growth constants undeclared; coercivity unchecked",
                      UserWarning, stacklevel=2)

    if u0 is None:
        u = np.zeros(len(basis))
    else:
        if u0.basis is not basis:
            raise ValueError("u0 is tied to a different basis")
        u = u0.coeffs.copy()

    w2 = eval_poly(w, basis.eigenvalues) ** 2
    precond = 1.0 / (w2 + 1.0)

    def f(vec: np.ndarray) -> float:
        return energy(SpectralFunction(basis, vec), nl, w)

    def df(vec: np.ndarray) -> np.ndarray:
        return gradient(SpectralFunction(basis, vec), nl, w)

    trace: list[tuple[int, float, float, float]] = []
    status = "max_iters"
    iterations = 0
    E = f(u)
    for it in range(int(max_iters)):
        g = df(u)
        gn = float(np.linalg.norm(g))
        tol = gtol if gtol is not None else 1e-8 * (1.0 + abs(E))
        if gn <= tol:
            status = "converged"
            break
        d = -precond * g
        slope = float(np.dot(g, d))
        t = 1.0
        while True:
            E_new = f(u + t * d)
            if E_new <= E + ARMIJO_C1 * t * slope:
                break
            t *= BACKTRACK
            if t < MIN_STEP:
                status = "line_search_underflow"
                break
        if status == "line_search_underflow":
            break
        u = u + t * d
        E = E_new
        iterations = it + 1
        if record_trace:
            trace.append((iterations, E, gn, t))

    g = df(u)
    gn = float(np.linalg.norm(g))
    E = f(u)
    tol = gtol if gtol is not None else 1e-8 * (1.0 + abs(E))
    converged = gn <= tol
    if converged:
        status = "converged"
    return MinimizeReport(
        solution=SpectralFunction(basis, u),
        energy=E,
        gradient_norm=gn,
        euler_lagrange_residual=float(np.max(np.abs(g))),
        iterations=iterations,
        coercivity_margin=coercivity_margin,
        converged=converged,
        status=status,
        trace=trace,
    )


def minimize_multistart(nl: Nonlinearity, w: FractionalPolynomial,
                        basis: SpectralBasis, starts: int = 5, seed: int = 0,
                        start_scale: float = 1.0,
                        **opts) -> list[MinimizeReport]:
    """Run minimize from u0 = 0 plus ``starts - 1`` seeded random starts.

    Returns all reports (in start order) so callers can compare the final
    energies: the problem does not promise a unique critical point, and
    distinct limits with equally small residuals are reported, not hidden.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    rng = np.random.default_rng(seed)
    reports = [minimize(nl, w, basis, **opts)]
    for _ in range(starts - 1):
        u0 = SpectralFunction(basis, start_scale * rng.standard_normal(len(basis)))
        reports.append(minimize(nl, w, basis, u0=u0, **opts))
    return reports


def builtin_example_nonlinearity(A: float, b, dimension: int) -> Nonlinearity:
    """The cosine/sine model nonlinearity

        F(x, u) = (A/2) cos(x_1 + ... + x_N) u^2 + b(x) sin(u)

    with derivative A cos(x_1 + ... + x_N) u + b(x) cos(u).  ``b`` is a
    constant or a bounded per-node callable; growth constants are filled
    automatically: a = A/2, c = A, d = B = sup|b|, quadratic-upper A, C = 0.
    """
    A = float(A)
    if callable(b):
        b_fn = b
        b_sup = None
    else:
        b_const = float(b)
        b_fn = lambda nodes: np.full(nodes.shape[0], b_const)  # noqa: E731
        b_sup = abs(b_const)

    def _check_dim(nodes):
        if nodes.shape[1] != dimension:
            raise ValueError(
                f"nonlinearity built for dimension {dimension}, "
                f"got nodes of dimension {nodes.shape[1]}"
            )

    def F(nodes, u):
        _check_dim(nodes)
        return 0.5 * A * np.cos(nodes.sum(axis=1)) * u**2 + b_fn(nodes) * np.sin(u)

    def dF(nodes, u):
        _check_dim(nodes)
        return A * np.cos(nodes.sum(axis=1)) * u + b_fn(nodes) * np.cos(u)

    growth = None
    if b_sup is not None:
        growth = GrowthConstants(a=abs(A) / 2.0, b=b_sup, c=abs(A), d=b_sup,
                                 A=A, B=b_sup, C=0.0)
    return Nonlinearity(F=F, dF=dF, growth=growth, name="builtin_example")


def polynomial_nonlinearity(powers, coeffs, growth: GrowthConstants | None = None,
                            ) -> Nonlinearity:
    """F(x, u) = sum_p c_p(x) u^p with per-node or constant coefficients.

    When every power is <= 2 and no growth constants are supplied, the
    (then exact) quadratic growth bounds are derived from the coefficient
    sups; for higher powers the constants must come from the caller or
    remain undeclared.
    """
    powers = [int(p) for p in powers]
    if len(powers) != len(coeffs):
        raise ValueError("powers and coeffs must have equal length")
    if any(p < 0 for p in powers):
        raise ValueError("powers must be nonnegative integers")
    coeff_arrays = [np.asarray(c, dtype=float) for c in coeffs]

    def _coeff(c: np.ndarray, nodes: np.ndarray) -> np.ndarray:
        if c.ndim == 0:
            return np.full(nodes.shape[0], float(c))
        if c.shape != (nodes.shape[0],):
            raise ValueError("per-node coefficient length does not match nodes")
        return c

    def F(nodes, u):
        out = np.zeros(nodes.shape[0])
        for p, c in zip(powers, coeff_arrays):
            out += _coeff(c, nodes) * u**p
        return out

    def dF(nodes, u):
        out = np.zeros(nodes.shape[0])
        for p, c in zip(powers, coeff_arrays):
            if p >= 1:
                out += p * _coeff(c, nodes) * u ** (p - 1)
        return out

    if growth is None and all(p <= 2 for p in powers):
        sup = {p: 0.0 for p in (0, 1, 2)}
        top = {p: 0.0 for p in (0, 1, 2)}
        for p, c in zip(powers, coeff_arrays):
            sup[p] = max(sup[p], float(np.max(np.abs(c))))
            top[p] = max(top[p], float(np.max(c)))
        growth = GrowthConstants(
            a=sup[2], b=sup[0], c=2.0 * sup[2], d=sup[1],
            A=2.0 * max(0.0, top[2]), B=sup[1], C=max(0.0, top[0]),
        )
    return Nonlinearity(F=F, dF=dF, growth=growth, name="polynomial")


def linear_source_nonlinearity(g_samples) -> Nonlinearity:
    """F(x, u) = g(x) u, the linear-source case whose minimizer is the
    solution of w^2(A) u = (projection of g)."""
    return polynomial_nonlinearity([1], [np.asarray(g_samples, dtype=float)])
