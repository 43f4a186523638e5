"""Invariant suite behind ``koszul selftest`` plus random generators it shares with the tests."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .curvature import WeightSystem, condition15, hessian_log_g
from .division import DivisionProblem, NoSolutionAtCap, pointwise_solution, solve
from .exterior import KoszulElement, contract, gnorm_sq, multi_indices, norm_sq, pairing, wedge_conj
from .lemma1 import verify_lemma1
from .polyalg import GaussQ, Polynomial, parse_polynomial
from .quadrature import Domain, integrate, sample_many
from .triples import (
    combined_triple,
    cor3_envelope,
    cor2_efficiency_bound,
    derived,
    exp_triple,
    log_triple,
    validate,
    validation_grid,
)

REL = 1e-10


def random_gauss(rng: np.random.Generator, span: int = 3, den: int = 4) -> GaussQ:
    return GaussQ(Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, den + 1))),
                  Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, den + 1))))


def random_polynomial(rng: np.random.Generator, n: int, max_deg: int = 2, terms: int = 3) -> Polynomial:
    out = {}
    for _ in range(terms):
        out[tuple(int(e) for e in rng.integers(0, max_deg + 1, n))] = random_gauss(rng)
    return Polynomial(n, out)


def random_element(rng: np.random.Generator, p: int, degree: int, n: int | None = None,
                   density: float = 0.7) -> KoszulElement:
    """Polynomial entries when ``n`` is given, complex scalars otherwise."""
    coeffs = {}
    for key in multi_indices(p, degree):
        if rng.random() > density:
            continue
        if n is None:
            coeffs[key] = complex(*rng.standard_normal(2))
        else:
            coeffs[key] = random_polynomial(rng, n)
    return KoszulElement(p, degree, coeffs)


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _check(name, ok, **details) -> dict:
    return {"name": name, "status": "PASS" if ok else "FAIL", "lhs": None, "rhs": None,
            "stderr": None, "details": details}


def koszul_checks(seed: int, exact: int = 100, numeric: int = 1000) -> list[dict]:
    rng = np.random.default_rng([seed, 1])
    bad_nil = 0
    for _ in range(exact):
        p = int(rng.integers(2, 5))
        d = int(rng.integers(2, p + 1))
        n = int(rng.integers(1, 4))
        g = [random_polynomial(rng, n) for _ in range(p)]
        v = random_element(rng, p, d, n)
        if not contract(g, contract(g, v)).is_zero():
            bad_nil += 1
    worst = {"adjoint": 0.0, "leibniz": 0.0, "norm": 0.0}
    for _ in range(numeric):
        p = int(rng.integers(1, 6))
        d = int(rng.integers(1, p + 1))
        gv = list(rng.standard_normal(p) + 1j * rng.standard_normal(p))
        S = gnorm_sq(gv)
        v = random_element(rng, p, d, density=1.0)
        w = random_element(rng, p, d - 1, density=1.0)
        lhs, rhs = pairing(contract(gv, v), w), pairing(v, wedge_conj(gv, w))
        worst["adjoint"] = max(worst["adjoint"], _rel(lhs, rhs))
        if d < p:
            lhs = contract(gv, wedge_conj(gv, v)) + wedge_conj(gv, contract(gv, v))
            err = math.sqrt(norm_sq(lhs - v * S)) / max(math.sqrt(norm_sq(v)) * S, 1e-300)
            worst["leibniz"] = max(worst["leibniz"], err)
            h = contract(gv, random_element(rng, p, d + 1, density=1.0)) if d + 1 <= p else None
            if h is not None and not h.is_zero():
                worst["norm"] = max(worst["norm"], _rel(norm_sq(wedge_conj(gv, h)), S * norm_sq(h)))
    return [
        _check("koszul.nilpotence", bad_nil == 0, instances=exact, failures=bad_nil),
        _check("koszul.adjoint", worst["adjoint"] <= REL, worst=worst["adjoint"]),
        _check("koszul.leibniz", worst["leibniz"] <= REL, worst=worst["leibniz"]),
        _check("koszul.norm_identity", worst["norm"] <= REL, worst=worst["norm"]),
    ]


def triple_checks(points: int = 10_000) -> list[dict]:
    out = []
    x = validation_grid(points=points)
    for t in (log_triple(1.0), exp_triple(1.0), combined_triple(1.0, 0.5, 1.0)):
        out.append(_check(f"triple.valid[{t.kind}]", validate(t, grid_points=points).valid))
    bad = []
    for eps in (0.1, 1.0, 10.0):
        for q in (1, 2, 3):
            for ell in (1, 2, 3):
                w = derived(log_triple(eps, q), ell, x)
                exact = (1 + eps) * x / eps
                if np.max(np.abs(w.a_plus_lambda - exact) / exact) > 1e-12:
                    bad.append(("cor2.a+lam", eps, q, ell))
                if np.any(w.efficiency > cor2_efficiency_bound(eps, q, ell) * (1 + 1e-12)):
                    bad.append(("cor2.eff", eps, q, ell))
                w = derived(exp_triple(eps, q), ell, x)
                if np.any(w.efficiency > (2 + q * ell) * (1 + 1e-12)):
                    bad.append(("cor3.eff", eps, q, ell))
                if np.any(w.a_plus_lambda > cor3_envelope(eps, x) * (1 + 1e-12)):
                    bad.append(("cor3.env", eps, q, ell))
    out.append(_check("triple.corollary_constants", not bad, failures=bad[:10]))
    return out


def condition15_checks(seed: int, points: int = 200) -> list[dict]:
    rng = np.random.default_rng([seed, 15])
    z1, z2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    g = [z1 * Fraction(1, 2), z2 * Fraction(1, 2)]
    pts = Domain.unit_polydisc(2)
    zs = sample_many(pts, rng, points)
    out = []
    for t in (log_triple(1.0), exp_triple(1.0), combined_triple(1.0, 0.5, 1.0)):
        w = WeightSystem.theorem2(t, 1)
        worst = min(c.margin / max(c.scale, 1e-300) for c in (condition15(w, g, z) for z in zs))
        out.append(_check(f"condition15.theorem2[{t.kind}]", worst >= -1e-9, min_relative=worst))
    w1 = WeightSystem.theorem1(2.0, 1, 1)
    err = 0.0
    for z in zs:
        c = condition15(w1, g, z)
        mineig = float(np.min(np.linalg.eigvalsh(hessian_log_g(g, z))))
        simple = w1.q * w1.ell * w1.tau * w1.lam * (1 - w1.lam) * mineig
        err = max(err, abs(c.margin - simple) / max(abs(simple), c.scale, 1e-300))
    out.append(_check("condition15.theorem1_simplification", err <= 1e-8, worst=err))
    return out


def division_checks() -> list[dict]:
    P = parse_polynomial
    out = []
    g3 = [P(f"z{i}", 3) for i in (1, 2, 3)]
    f = KoszulElement(3, 1, {(1,): P("z2", 3), (2,): P("-z1", 3)})
    w = solve(DivisionProblem(g3, f, 2), 0)
    out.append(_check("division.example_cap0", w.ok and w.u == KoszulElement(3, 2, {(1, 2): P("-1", 3)})))
    g2 = [P("z1", 2), P("z2", 2)]
    w = solve(DivisionProblem(g2, KoszulElement.scalar(2, P("z1^2*z2^2", 2)), 1), 2)
    out.append(_check("division.example_monomial", w.ok))
    missing = []
    for cap in range(0, 11):
        try:
            solve(DivisionProblem(g2, KoszulElement.scalar(2, P("1", 2)), 1), cap)
            missing.append(cap)
        except NoSolutionAtCap:
            pass
    out.append(_check("division.constant_not_in_ideal", not missing, solved_at=missing))
    u = pointwise_solution(g2, KoszulElement(2, 1, {(1,): P("z2", 2), (2,): P("-z1", 2)}), [1, 1])
    out.append(_check("division.pointwise_example", abs(u[(1, 2)] + 1) < 1e-15))
    return out


def quadrature_checks(seed: int, samples: int) -> list[dict]:
    d = Domain.unit_polydisc(2)

    def inside_ball(z):
        return (np.sum(np.abs(z) ** 2, axis=1) < 1).astype(float)

    e1 = integrate(inside_ball, d, samples, seed)
    e4 = integrate(inside_ball, d, samples, seed, workers=4)
    exact = math.pi ** 2 / 2
    return [
        _check("quadrature.ball_volume", abs(e1.mean - exact) <= 4 * e1.stderr, estimate=e1.mean,
               stderr=e1.stderr, exact=exact),
        _check("quadrature.worker_invariance", e1 == e4),
    ]


def run_selftest(seed: int = 0, quick: bool = False) -> list[dict]:
    checks = []
    s = verify_lemma1(seed, 2_000 if quick else 20_000)
    checks.append(_check("lemma1.random_suite", s.ok, instances=s.instances, max_ratio=s.max_ratio))
    checks += koszul_checks(seed, 30 if quick else 200, 300 if quick else 2000)
    checks += triple_checks(1_000 if quick else 10_000)
    checks += condition15_checks(seed, 50 if quick else 300)
    checks += division_checks()
    checks += quadrature_checks(seed, 20_000 if quick else 200_000)
    return checks
