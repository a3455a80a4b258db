"""Config-driven run orchestration: build objects, dispatch, emit bundle."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from . import __version__
from .bundle import ResultBundle
from .calculus import (
    FractionalPolynomial,
    SpectralFunction,
    project,
    synthesize,
)
from .config import (
    ConvergenceSpec,
    EigSpec,
    LinearSpec,
    NonlinearSpec,
    RunConfig,
    VerifySpec,
    config_digest,
)
from .domain import make_box, make_polygon2d
from .eigenbasis import analytic_box_basis, discrete_basis, eigen_convergence_report
from .linear import solve_linear, weak_residual, equivalence_check
from .variational import (
    GrowthConstants,
    builtin_example_nonlinearity,
    minimize_multistart,
    polynomial_nonlinearity,
)
from .verify import format_table, run_verify

ENV_OUT = "FRACLAP_OUT"


def resolve_out_dir(config: RunConfig, cli_out: str | None) -> Path:
    # precedence: CLI flag, then FRACLAP_OUT, then config, then default
    out = cli_out or os.environ.get(ENV_OUT) or config.output or "fraclap_out"
    return Path(out)


def build_domain(config: RunConfig):
    d = config.domain
    if d.kind == "box":
        return make_box(d.lengths, nodes_per_axis=d.nodes_per_axis)
    return make_polygon2d(d.vertices, d.h)


def build_basis(config: RunConfig, domain):
    if config.basis.source == "analytic":
        return analytic_box_basis(domain, config.basis.J)
    return discrete_basis(domain, config.basis.J)


def build_poly(config: RunConfig) -> FractionalPolynomial:
    return FractionalPolynomial(config.w_terms)


def _read_column_csv(path: Path) -> np.ndarray:
    """Single-column CSV of floats; an optional non-numeric header is skipped."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty sample file")
    try:
        float(lines[0])
    except ValueError:
        lines = lines[1:]
    return np.array([float(ln) for ln in lines])


def run(config: RunConfig, out_dir: str | None = None, quiet: bool = False,
        config_dir: Path | None = None) -> ResultBundle:
    """Execute one run and write its output bundle atomically.

    ``config_dir`` anchors relative CSV paths referenced by the config
    (defaults to the working directory).
    """
    out = resolve_out_dir(config, out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = config_dir or Path.cwd()

    domain = build_domain(config)
    poly = build_poly(config)

    problem = config.problem
    bundle = ResultBundle(out_dir=out, report={})

    if isinstance(problem, VerifySpec):
        results = run_verify(seed=config.seed)
        if not quiet:
            print(format_table(results))
        bundle.report = {
            "problem": "verify",
            "passed": all(r.passed for r in results),
            "checks": [
                {"name": r.name, "passed": r.passed, "detail": r.detail}
                for r in results
            ],
        }
    elif isinstance(problem, ConvergenceSpec):
        rep = eigen_convergence_report(domain, config.basis.J, problem.spacings)
        rows = []
        for i, h in enumerate(rep.spacings):
            for j in range(config.basis.J):
                rows.append((h, j + 1, rep.eigenvalues[i, j],
                             rep.richardson_limits[j], rep.errors[i, j]))
        bundle.add_csv("convergence.csv",
                       ["h", "j", "lambda", "richardson_limit", "abs_error"], rows)
        bundle.report = {
            "problem": "convergence",
            "spacings": [float(h) for h in rep.spacings],
            "observed_orders": [float(p) for p in rep.observed_orders],
            "richardson_limits": [float(x) for x in rep.richardson_limits],
        }
    else:
        basis = build_basis(config, domain)
        if isinstance(problem, EigSpec):
            _run_eig(bundle, basis)
        elif isinstance(problem, LinearSpec):
            _run_linear(bundle, basis, poly, problem, base)
        elif isinstance(problem, NonlinearSpec):
            _run_nonlinear(bundle, basis, poly, problem, config.seed, base)
        else:
            raise ValueError(f"unsupported problem {problem!r}")

    bundle.finalize(config_digest(config), __version__)
    if not quiet:
        print(f"wrote {bundle.out_dir}/report.json")
    return bundle


def _run_eig(bundle: ResultBundle, basis) -> None:
    rows = []
    for j, p in enumerate(basis.pairs, start=1):
        mode = " ".join(str(k) for k in p.mode_index) if p.mode_index else ""
        rows.append((j, p.eigenvalue, mode, p.residual))
    bundle.add_csv("eigen.csv", ["j", "lambda", "mode_index", "residual"], rows)
    bundle.report = {
        "problem": "eig",
        "J": len(basis),
        "source": basis.source,
        "eigenvalues": [float(x) for x in basis.eigenvalues],
        "max_residual": max(p.residual for p in basis.pairs),
    }


def _solution_rows(basis, u: SpectralFunction):
    samples = synthesize(u)
    nodes = basis.domain.nodes
    return [tuple(nodes[q]) + (samples[q],) for q in range(nodes.shape[0])]


def _coord_header(ndim: int) -> list[str]:
    return [f"x{i + 1}" for i in range(ndim)]


def _run_linear(bundle: ResultBundle, basis, poly, spec: LinearSpec,
                base: Path) -> None:
    if spec.g.coeffs is not None:
        coeffs = np.asarray(spec.g.coeffs, dtype=float)
        if coeffs.shape != (len(basis),):
            raise ValueError(
                f"g coefficient list has length {coeffs.size}, basis has J={len(basis)}"
            )
        g = SpectralFunction(basis, coeffs)
    else:
        samples = _read_column_csv(base / spec.g.samples_csv)
        if samples.shape != (basis.domain.node_count,):
            raise ValueError(
                f"g sample file has {samples.size} rows, quadrature has "
                f"{basis.domain.node_count} nodes"
            )
        g = project(basis, samples)

    rep = solve_linear(g, poly)
    u = rep.solution
    bundle.add_csv("solution.csv",
                   _coord_header(basis.domain.dimension) + ["u"],
                   _solution_rows(basis, u))
    report = {
        "problem": "linear",
        "strong_residual": rep.strong_residual,
        "weak_residual_max": rep.weak_residual_max,
        "inverse_bound_check": rep.inverse_bound_check,
        "equivalence": equivalence_check(u, g, poly),
        "solution_coeffs": [float(c) for c in u.coeffs],
        "g_coeffs": [float(c) for c in g.coeffs],
    }
    if spec.test_count is not None:
        report["weak_residual_at_test_count"] = weak_residual(
            u, g, poly, spec.test_count)
    bundle.report = report


def _build_nonlinearity(spec, basis, base: Path):
    growth = None
    if spec.growth is not None:
        growth = GrowthConstants(**spec.growth)
    if spec.type == "builtin":
        nl = builtin_example_nonlinearity(spec.A, spec.b, basis.domain.dimension)
        if growth is not None:
            nl = type(nl)(F=nl.F, dF=nl.dF, growth=growth, name=nl.name)
        return nl
    powers, coeffs = [], []
    for t in spec.terms:
        powers.append(t.power)
        if t.coeff is not None:
            coeffs.append(t.coeff)
        else:
            samples = _read_column_csv(base / t.coeff_csv)
            if samples.shape != (basis.domain.node_count,):
                raise ValueError(
                    f"coefficient file {t.coeff_csv} has {samples.size} rows, "
                    f"quadrature has {basis.domain.node_count} nodes"
                )
            coeffs.append(samples)
    return polynomial_nonlinearity(powers, coeffs, growth=growth)


def _run_nonlinear(bundle: ResultBundle, basis, poly, spec: NonlinearSpec,
                   seed: int, base: Path) -> None:
    nl = _build_nonlinearity(spec.nonlinearity, basis, base)
    opt = spec.optimizer
    reports = minimize_multistart(
        nl, poly, basis,
        starts=opt.multistart, seed=seed, start_scale=opt.start_scale,
        gtol=opt.gtol, max_iters=opt.max_iters,
        allow_noncoercive=opt.allow_noncoercive, record_trace=True,
    )
    converged = [r for r in reports if r.converged]
    best = min(converged or reports, key=lambda r: r.energy)

    bundle.add_csv("solution.csv",
                   _coord_header(basis.domain.dimension) + ["u"],
                   _solution_rows(basis, best.solution))
    bundle.add_csv("energy_log.csv",
                   ["iteration", "energy", "gradient_norm", "step"],
                   best.trace)
    bundle.report = {
        "problem": "nonlinear",
        "energy": best.energy,
        "gradient_norm": best.gradient_norm,
        "euler_lagrange_residual": best.euler_lagrange_residual,
        "iterations": best.iterations,
        "converged": best.converged,
        "status": best.status,
        "coercivity_margin": best.coercivity_margin,
        "multistart_energies": [r.energy for r in reports],
        "multistart_statuses": [r.status for r in reports],
        "solution_coeffs": [float(c) for c in best.solution.coeffs],
    }
