"""Built-in invariant suite: every checkable identity, as a pass/fail table.

Each check exercises one property the library is supposed to guarantee
(quadrature linearity and order, basis orthonormality, operator-calculus
identities, residual equivalence, bounded/compact inverse, gradient
correctness, coercivity behavior).  The suite is deterministic for a fixed
seed and is what the ``verify`` CLI subcommand runs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import calculus as calc
from . import linear
from . import variational as var
from .domain import integrate, make_box, make_polygon2d
from .eigenbasis import (
    analytic_box_basis,
    basis_from_eigenvalues,
    discrete_basis,
    eigen_convergence_report,
    gram_matrix,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_poly(rng) -> calc.FractionalPolynomial:
    k = int(rng.integers(1, 4))
    betas = np.sort(rng.uniform(0.0, 3.0, size=k))
    while np.any(np.diff(betas) <= 1e-9):
        betas = np.sort(rng.uniform(0.0, 3.0, size=k))
    alphas = rng.uniform(0.2, 3.0, size=k)
    return calc.FractionalPolynomial(tuple(zip(alphas, betas)))


def run_verify(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results: list[CheckResult] = []

    def check(name: str, passed: bool, detail: str):
        results.append(CheckResult(name, bool(passed), detail))

    # --- domain quadrature -------------------------------------------------
    box1 = make_box([math.pi], nodes_per_axis=64)
    f = np.sin(box1.nodes[:, 0])
    g = np.cos(box1.nodes[:, 0]) ** 2
    lin_lhs = integrate(box1, 2.5 * f - 1.5 * g)
    lin_rhs = 2.5 * integrate(box1, f) - 1.5 * integrate(box1, g)
    check("domain.integrate_linearity", abs(lin_lhs - lin_rhs) < 1e-12,
          f"|lhs-rhs|={abs(lin_lhs - lin_rhs):.2e}")

    errs = []
    for n in (64, 128, 256):
        b = make_box([math.pi], nodes_per_axis=n)
        errs.append(abs(integrate(b, np.sin(b.nodes[:, 0])) - 2.0))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    check("domain.refinement_order2",
          all(3.5 <= r <= 4.5 for r in ratios),
          f"error ratios {ratios[0]:.3f}, {ratios[1]:.3f}")

    sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    d1 = make_polygon2d(sq, 0.1)
    d2 = make_polygon2d(sq[2:] + sq[:2], 0.1)
    check("domain.polygon_rotation_invariance",
          d1.node_count == d2.node_count and np.array_equal(d1.nodes, d2.nodes),
          f"{d1.node_count} nodes either way")

    # --- eigenbasis --------------------------------------------------------
    box2 = make_box([math.pi, math.pi])
    basis = analytic_box_basis(box2, 10)
    lam = basis.eigenvalues
    check("eigenbasis.square_spectrum",
          lam[0] == 2.0 and np.allclose(lam[:5], [2, 5, 5, 8, 10]),
          f"first five: {lam[:5].tolist()}")
    check("eigenbasis.multiplicity_of_5",
          int(np.sum(lam[:3] == 5.0)) == 2, "eigenvalue 5 twice in first three")

    G = gram_matrix(basis)
    gerr = float(np.max(np.abs(G - np.eye(len(basis)))))
    check("eigenbasis.orthonormality_analytic", gerr <= 1e-6, f"max|G-I|={gerr:.2e}")

    disc = discrete_basis(box2, 5, h=math.pi / 32)
    Gd = gram_matrix(disc)
    gderr = float(np.max(np.abs(Gd - np.eye(len(disc)))))
    check("eigenbasis.orthonormality_discrete", gderr <= 1e-4,
          f"max|G-I|={gderr:.2e}")
    rmax = max(p.residual for p in disc.pairs)
    check("eigenbasis.discrete_residuals", rmax <= 1e-8, f"max residual {rmax:.2e}")
    rel = np.abs(disc.eigenvalues - lam[:5]) / lam[:5]
    check("eigenbasis.discrete_matches_analytic", float(np.max(rel)) <= 0.01,
          f"max rel err {float(np.max(rel)):.2e} at h=pi/32")

    rep = eigen_convergence_report(box2, 1,
                                   [math.pi / 8, math.pi / 16, math.pi / 32])
    order = float(rep.observed_orders[0])
    check("eigenbasis.convergence_order", 1.8 <= order <= 2.2,
          f"observed order {order:.3f}")

    # --- operator calculus -------------------------------------------------
    basis64 = analytic_box_basis(box2, 64)
    ok = True
    worst = 0.0
    for _ in range(100):
        u = calc.SpectralFunction(basis64, rng.standard_normal(64))
        b1, b2 = rng.uniform(0.05, 2.0, size=2)
        lhs = calc.apply_power(calc.apply_power(u, b1), b2).coeffs
        rhs = calc.apply_power(u, b1 + b2).coeffs
        rel = np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(rhs)), 1e-300)
        worst = max(worst, float(rel))
        ok &= rel <= 1e-12
    check("calculus.semigroup", ok, f"worst rel dev {worst:.2e} over 100 draws")

    u = calc.SpectralFunction(basis64, rng.standard_normal(64))
    worst = 0.0
    for n in range(1, 5):
        v = u
        for _ in range(n):
            v = calc.apply_power(v, 1.0)
        rhs = calc.apply_power(u, float(n)).coeffs
        rel = np.max(np.abs(v.coeffs - rhs)) / np.max(np.abs(rhs))
        worst = max(worst, float(rel))
    check("calculus.integer_power_consistency", worst <= 1e-12,
          f"worst rel dev {worst:.2e}, n<=4")

    w1 = calc.FractionalPolynomial(((1.0, 0.5),))
    w2 = calc.FractionalPolynomial(((2.0, 0.5), (1.0, 1.5)))
    merged = w1 + w2
    lhs = calc.apply_poly(u, merged).coeffs
    rhs = (calc.apply_poly(u, w1) + calc.apply_poly(u, w2)).coeffs
    rel = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    check("calculus.poly_additivity", rel <= 1e-14,
          f"rel dev {rel:.2e} (identity of coefficient vectors)")

    v = calc.SpectralFunction(basis64, rng.standard_normal(64))
    wp = _random_poly(rng)
    lhs = integrate(box2, calc.synthesize(calc.apply_poly(u, wp)) * calc.synthesize(v))
    rhs = integrate(box2, calc.synthesize(u) * calc.synthesize(calc.apply_poly(v, wp)))
    check("calculus.self_adjoint_at_truncation", abs(lhs - rhs) <= 1e-6,
          f"|<Au,v>-<u,Av>|={abs(lhs - rhs):.2e}")

    # sandwich on a spectrum with eigenvalues below 1
    small = basis_from_eigenvalues(box1, [0.25, 0.5, 0.9, 1.5, 2.0, 4.0, 9.0, 16.0])
    ok = True
    for _ in range(200):
        beta = float(rng.uniform(0.01, 3.0))
        uu = calc.SpectralFunction(small, rng.standard_normal(8))
        nt, nb = calc.norm_tilde(uu, beta), calc.norm_beta(uu, beta)
        M = calc.m_beta(small, beta)
        ok &= nt <= nb <= math.sqrt(M + 1.0) * nt
    check("calculus.norm_sandwich", ok, "0 violations over 200 draws, lambda<1 present")

    # nested decay flags: convergent profile stays flagged at smaller beta
    big = basis_from_eigenvalues(
        make_box([math.pi], nodes_per_axis=300), np.arange(1, 257, dtype=float) ** 2
    )
    prof = calc.SpectralFunction(big, big.eigenvalues ** (-1.7))
    d_hi = calc.domain_decay_diagnostic(prof, 0.7)
    d_lo = calc.domain_decay_diagnostic(prof, 0.3)
    check("calculus.domain_nesting",
          d_hi.in_domain_at_truncation and d_lo.in_domain_at_truncation
          and d_lo.tail_fraction <= d_hi.tail_fraction,
          f"tail {d_lo.tail_fraction:.2e} <= {d_hi.tail_fraction:.2e}")

    ok = True
    worst = 0.0
    for _ in range(50):
        uu = calc.SpectralFunction(basis64, rng.standard_normal(64))
        ww = _random_poly(rng)
        back = calc.apply_inverse_sq(calc.apply_poly(calc.apply_poly(uu, ww), ww), ww)
        dev = float(np.max(np.abs(back.coeffs - uu.coeffs)))
        worst = max(worst, dev)
        ok &= dev <= 1e-10
    check("calculus.inverse_round_trip", ok, f"worst dev {worst:.2e} over 50 draws")

    # --- linear solver -----------------------------------------------------
    gg = calc.SpectralFunction(basis64, rng.standard_normal(64))
    ww = _random_poly(rng)
    r1 = linear.solve_linear(gg, ww)
    r2 = linear.solve_linear(gg, ww)
    check("linear.deterministic_solve",
          np.array_equal(r1.solution.coeffs, r2.solution.coeffs),
          "bit-identical coefficients on repeat solve")

    ok = True
    for _ in range(100):
        gg = calc.SpectralFunction(basis64, rng.standard_normal(64))
        ww = _random_poly(rng)
        rep2 = linear.solve_linear(gg, ww)
        ok &= rep2.inverse_bound_check >= -1e-10
        ok &= linear.equivalence_check(rep2.solution, gg, ww)
    check("linear.bounded_inverse", ok, "0 violations over 100 random (g, w)")

    mu = linear.inverse_spectrum(basis64, ww)
    lam64 = basis64.eigenvalues
    strict = all(
        mu[j] > mu[j + 1] for j in range(63) if lam64[j] < lam64[j + 1]
    ) and all(mu[j] >= mu[j + 1] for j in range(63))
    check("linear.compact_inverse_decay", strict and mu[-1] < mu[0] / 10,
          f"mu_1={mu[0]:.3e} ... mu_J={mu[-1]:.3e}")

    # --- variational solver ------------------------------------------------
    basis25 = analytic_box_basis(box2, 25)
    nl = var.builtin_example_nonlinearity(0.5, 0.1, 2)
    wex = calc.FractionalPolynomial(((1.0, 0.5),))
    ok = True
    worst = 0.0
    for _ in range(10):
        uu = calc.SpectralFunction(basis25, rng.standard_normal(25))
        gvec = var.gradient(uu, nl, wex)
        d = rng.standard_normal(25)
        d /= np.linalg.norm(d)
        h = 1e-6
        up = calc.SpectralFunction(basis25, uu.coeffs + h * d)
        um = calc.SpectralFunction(basis25, uu.coeffs - h * d)
        fd = (var.energy(up, nl, wex) - var.energy(um, nl, wex)) / (2 * h)
        an = float(np.dot(gvec, d))
        rel = abs(fd - an) / max(abs(fd), 1e-8)
        worst = max(worst, rel)
        ok &= rel <= 1e-5
    check("variational.gradient_fd", ok, f"worst rel dev {worst:.2e} over 10 draws")

    mrep = var.minimize(nl, wex, basis25, record_trace=True)
    energies = [row[1] for row in mrep.trace]
    descending = all(e2 <= e1 + 1e-14 for e1, e2 in zip(energies, energies[1:]))
    check("variational.descent_monotone", mrep.converged and descending,
          f"{mrep.iterations} iterations, E={mrep.energy:.6f}")

    dsol = var.gradient(mrep.solution, nl, wex)
    gav = calc.SpectralFunction(
        basis25,
        basis25.values.T @ (box2.weights * nl.dF(box2.nodes,
                                                 calc.synthesize(mrep.solution))),
    )
    check("variational.critical_point_is_weak_solution",
          float(np.max(np.abs(dsol))) <= 1e-6
          and linear.equivalence_check(mrep.solution, gav, wex),
          f"EL residual {float(np.max(np.abs(dsol))):.2e}")

    ok = True
    for _ in range(5):
        uu = calc.SpectralFunction(basis25, rng.standard_normal(25))
        es = [var.energy(calc.SpectralFunction(basis25, t * uu.coeffs), nl, wex)
              for t in (1, 2, 4, 8, 16)]
        ok &= es[-1] > es[0] and es[-1] > 0
    check("variational.coercive_rays", ok,
          "energy grows along rays t*u, t in {1..16}")

    gsamp = np.cos(box2.nodes[:, 0]) * np.sin(box2.nodes[:, 1])
    nl_lin = var.linear_source_nonlinearity(gsamp)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        mlin = var.minimize(nl_lin, wex, basis25)
    gproj = calc.project(basis25, gsamp)
    lsol = linear.solve_linear(gproj, wex).solution
    dev = float(np.max(np.abs(mlin.solution.coeffs - lsol.coeffs)))
    check("variational.linear_limit_matches_direct_solve", dev <= 1e-6,
          f"max coeff dev {dev:.2e}")

    viol = var.growth_violations(nl, box2.nodes)
    check("variational.builtin_growth_bounds",
          all(v <= 1e-12 for v in viol.values()),
          "pointwise scan of |F|, |dF|, upper bound on u in [-10, 10]")

    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{mark}  {r.name:<{width}}  {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines)
