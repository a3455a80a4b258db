"""Acceptance suite: the nine shipping criteria, one test each.

Every test prints one PASS/FAIL line (run with ``pytest -s`` to see them
all) and asserts the criterion at its stated tolerance and runtime budget.
"""

import hashlib
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

import fraclap as fl
from fraclap import FractionalPolynomial, SpectralFunction


def report(number: int, name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}  criterion {number} ({name}): {detail}")
    assert ok, f"criterion {number} ({name}): {detail}"


def random_poly(rng, beta_hi=2.0, allow_zero_beta0=True):
    while True:
        k = int(rng.integers(1, 4))
        betas = np.sort(rng.uniform(0.0, beta_hi, size=k))
        if allow_zero_beta0 and rng.random() < 0.3:
            betas[0] = 0.0
        if np.all(np.diff(betas) > 1e-6):
            alphas = rng.uniform(0.2, 2.0, size=k)
            return FractionalPolynomial(tuple(zip(alphas, betas)))


@pytest.fixture(scope="module")
def square():
    return fl.make_box([math.pi, math.pi])


@pytest.fixture(scope="module")
def basis64(square):
    return fl.analytic_box_basis(square, 64)


def test_criterion_1_spectrum(square):
    t0 = time.perf_counter()
    basis = fl.analytic_box_basis(square, 5)
    elapsed = time.perf_counter() - t0
    lam = basis.eigenvalues
    ok = (lam[0] == 2.0
          and np.array_equal(lam, [2.0, 5.0, 5.0, 8.0, 10.0])
          and elapsed < 1.0)
    report(1, "spectrum", ok,
           f"lambda = {lam.tolist()}, {elapsed:.3f}s")


def test_criterion_2_discrete_analytic_agreement(square):
    t0 = time.perf_counter()
    analytic = fl.analytic_box_basis(square, 10).eigenvalues
    disc = fl.discrete_basis(square, 10, h=math.pi / 64).eigenvalues
    rel = np.abs(disc - analytic) / analytic
    conv = fl.eigen_convergence_report(
        square, 10, [math.pi / 16, math.pi / 32, math.pi / 64])
    orders = conv.observed_orders
    elapsed = time.perf_counter() - t0
    ok = (float(np.max(rel)) <= 0.01
          and bool(np.all((orders >= 1.8) & (orders <= 2.2)))
          and elapsed < 60.0)
    report(2, "discrete-analytic agreement", ok,
           f"max rel err {np.max(rel):.2e}, orders in "
           f"[{orders.min():.2f}, {orders.max():.2f}], {elapsed:.1f}s")


def test_criterion_3_operator_identities(square, basis64):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)

    worst_semigroup = 0.0
    for _ in range(100):
        u = SpectralFunction(basis64, rng.standard_normal(64))
        b1, b2 = rng.uniform(0.05, 2.0, size=2)
        lhs = fl.apply_power(fl.apply_power(u, b1), b2).coeffs
        rhs = fl.apply_power(u, b1 + b2).coeffs
        worst_semigroup = max(
            worst_semigroup, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))))

    small = fl.basis_from_eigenvalues(
        fl.make_box([math.pi]), [0.25, 0.5, 0.9, 1.5, 2.0, 4.0, 9.0, 16.0])
    violations = 0
    for basis in (basis64, small):
        for _ in range(500):
            beta = float(rng.uniform(0.0, 3.0)) or 1e-6
            u = SpectralFunction(basis, rng.standard_normal(len(basis)))
            nt, nb = fl.norm_tilde(u, beta), fl.norm_beta(u, beta)
            M = fl.m_beta(basis, beta)
            if not (nt <= nb <= math.sqrt(M + 1.0) * nt):
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = worst_semigroup <= 1e-12 and violations == 0 and elapsed < 5.0
    report(3, "operator-calculus identities", ok,
           f"semigroup worst rel {worst_semigroup:.2e}, "
           f"sandwich violations {violations}/1000, {elapsed:.1f}s")


def test_criterion_4_linear_round_trip(basis64):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    agree = True
    for _ in range(100):
        u_star = SpectralFunction(basis64, rng.standard_normal(64))
        w = random_poly(rng)
        g = fl.apply_poly(fl.apply_poly(u_star, w), w)
        rep = fl.solve_linear(g, w)
        worst = max(worst, float(np.max(np.abs(rep.solution.coeffs
                                               - u_star.coeffs))))
        agree &= fl.equivalence_check(rep.solution, g, w)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and agree and elapsed < 5.0
    report(4, "manufactured linear solves", ok,
           f"max coeff err {worst:.2e} over 100 draws, "
           f"classification agree: {agree}, {elapsed:.1f}s")


def test_criterion_5_bounded_inverse(basis64):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    violations = 0
    for _ in range(1000):
        g = SpectralFunction(basis64, rng.standard_normal(64))
        w = random_poly(rng)
        rep = fl.solve_linear(g, w)
        if rep.inverse_bound_check < -1e-10:
            violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 5.0
    report(5, "bounded-inverse estimate", ok,
           f"{violations}/1000 violations, {elapsed:.1f}s")


def _random_nonlinearity(rng, nodes):
    kind = rng.integers(0, 3)
    if kind == 0:
        return fl.builtin_example_nonlinearity(
            float(rng.uniform(0.0, 0.9)), float(rng.uniform(-0.5, 0.5)), 2)
    if kind == 1:
        c1 = np.sin(rng.uniform(0.5, 2.0) * nodes[:, 0])
        c2 = float(rng.uniform(-0.2, 0.2))
        return fl.polynomial_nonlinearity([0, 1, 2],
                                          [float(rng.uniform(-1, 1)), c1, c2])
    g = np.cos(nodes[:, 0]) * np.sin(rng.uniform(0.5, 2.0) * nodes[:, 1])
    return fl.linear_source_nonlinearity(g)


def test_criterion_6_gradient_correctness(square):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    basis = fl.analytic_box_basis(square, 16)
    worst = 0.0
    cases = [fl.builtin_example_nonlinearity(0.5, 0.1, 2)]
    cases += [_random_nonlinearity(rng, square.nodes) for _ in range(49)]
    for nl in cases:
        u = SpectralFunction(basis, rng.standard_normal(16))
        w = random_poly(rng)
        grad = fl.gradient(u, nl, w)
        for _ in range(2):
            d = rng.standard_normal(16)
            d /= np.linalg.norm(d)
            h = 1e-6
            up = SpectralFunction(basis, u.coeffs + h * d)
            um = SpectralFunction(basis, u.coeffs - h * d)
            fd = (fl.energy(up, nl, w) - fl.energy(um, nl, w)) / (2 * h)
            an = float(np.dot(grad, d))
            worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-8))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 30.0
    report(6, "gradient vs finite differences", ok,
           f"worst rel dev {worst:.2e} over 50 cases, {elapsed:.1f}s")


def test_criterion_7_nonlinear_existence_instance(square):
    t0 = time.perf_counter()
    basis = fl.analytic_box_basis(square, 25)
    w = FractionalPolynomial(((1.0, 0.5),))
    nl = fl.builtin_example_nonlinearity(0.5, 0.1, 2)

    chk = fl.check_coercivity(nl, w, basis)
    from_zero = fl.minimize(nl, w, basis)
    reports = fl.minimize_multistart(nl, w, basis, starts=5, seed=7)
    energies = [r.energy for r in reports]
    spread = max(energies) - min(energies)
    elapsed = time.perf_counter() - t0
    ok = (chk.ok
          and from_zero.converged
          and from_zero.euler_lagrange_residual <= 1e-6
          and all(r.converged for r in reports)
          and spread <= 1e-8
          and elapsed < 120.0)
    report(7, "model nonlinear instance", ok,
           f"EL residual {from_zero.euler_lagrange_residual:.2e}, "
           f"5-start energy spread {spread:.2e}, {elapsed:.1f}s")


def test_criterion_8_linear_limit(square):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    basis = fl.analytic_box_basis(square, 16)
    w = FractionalPolynomial(((1.0, 0.5),))
    worst = 0.0
    for _ in range(20):
        g_coeffs = rng.standard_normal(16)
        g_samples = fl.synthesize(SpectralFunction(basis, g_coeffs))
        nl = fl.linear_source_nonlinearity(g_samples)
        mrep = fl.minimize(nl, w, basis)
        direct = fl.solve_linear(fl.project(basis, g_samples), w).solution
        worst = max(worst, float(np.max(np.abs(mrep.solution.coeffs
                                               - direct.coeffs))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30.0
    report(8, "linear-limit oracle", ok,
           f"max coeff err {worst:.2e} over 20 sources, {elapsed:.1f}s")


def _criterion_configs():
    pi = math.pi
    box = {"kind": "box", "lengths": [pi, pi]}
    rng = np.random.default_rng(9)
    g = [float(x) for x in rng.standard_normal(8)]
    return {
        "eig": ("eig", {
            "domain": box, "basis": {"source": "analytic", "J": 5},
            "problem": {"kind": "eig"}, "seed": 0}),
        "eig-discrete": ("eig", {
            "domain": box, "basis": {"source": "discrete", "J": 3},
            "problem": {"kind": "eig"}, "seed": 0}),
        "convergence": ("convergence", {
            "domain": box, "basis": {"J": 1},
            "problem": {"kind": "convergence",
                        "spacings": [pi / 8, pi / 16, pi / 32]},
            "seed": 0}),
        "linear": ("solve-linear", {
            "domain": box, "basis": {"J": 8}, "w": [[1.0, 0.5], [0.5, 1.25]],
            "problem": {"kind": "linear", "g": {"coeffs": g}}, "seed": 0}),
        "nonlinear": ("solve-nonlinear", {
            "domain": box, "basis": {"J": 25}, "w": [[1.0, 0.5]],
            "problem": {"kind": "nonlinear",
                        "nonlinearity": {"type": "builtin", "A": 0.5, "b": 0.1},
                        "optimizer": {"multistart": 5}},
            "seed": 7}),
        "verify": ("verify", {
            "domain": box, "problem": {"kind": "verify"}, "seed": 0}),
    }


def _hash_dir(path):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(path.iterdir())
    }


def test_criterion_9_determinism(tmp_path):
    t0 = time.perf_counter()
    mismatches = []
    for name, (command, doc) in _criterion_configs().items():
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(json.dumps(doc))
        hashes = []
        for attempt in ("a", "b"):
            out = tmp_path / f"{name}-{attempt}"
            proc = subprocess.run(
                [sys.executable, "-m", "fraclap", command,
                 "--config", str(cfg), "--out", str(out), "--quiet"],
                capture_output=True, text=True)
            assert proc.returncode == 0, f"{name}: {proc.stderr}"
            hashes.append(_hash_dir(out))
        if hashes[0] != hashes[1]:
            mismatches.append(name)
    elapsed = time.perf_counter() - t0
    ok = not mismatches
    report(9, "bit-exact reproducibility", ok,
           f"{len(_criterion_configs())} configs x 2 runs, "
           f"mismatches: {mismatches or 'none'}, {elapsed:.1f}s")
