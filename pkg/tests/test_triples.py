import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from koszul.triples import (
    SkodaTriple,
    combined_triple,
    cor2_constant,
    cor2_efficiency_bound,
    cor3_D,
    cor3_constant,
    cor3_envelope,
    custom_triple,
    derived,
    exp_triple,
    log_triple,
    make_triple,
    validate,
    validation_grid,
)

X = validation_grid(points=2000)


def test_standard_triples_validate():
    for t in (log_triple(1.0), exp_triple(1.0), combined_triple(1.0, 0.5, 1.0)):
        r = validate(t)
        assert r.valid and r.first_violation is None
        assert r.derivatives_ok, r.derivative_errors


def test_growing_exponent_is_rejected():
    t = custom_triple("0", "-exp(eps*(x-1))/2", eps=1)
    r = validate(t)
    assert not r.valid
    v = r.first_violation
    # 1 + F' = 1 - exp(x-1)/2 turns negative first, at x = 1 + log 2
    assert v["conditions"] == ["(x+F)phi'+F'+1>0"]
    assert v["x"] == pytest.approx(1 + math.log(2), abs=1e-2)
    assert v["x"] >= 1 + math.log(2)
    c1, _, _ = t.conditions(np.array([4.0]))
    assert c1[0] < 0


def test_log_triple_example():
    w = derived(log_triple(1.0), 1, 2.0)
    assert float(w.a) == 2.0
    assert float(w.lam) == pytest.approx(2.0, rel=1e-15)
    assert float(w.a_plus_lambda) == pytest.approx(4.0, rel=1e-15)


def test_cor3_constants():
    assert cor3_D(1.0) == pytest.approx(5.5, rel=1e-15)
    assert float(cor3_envelope(1.0, 1 + 1e-12)) == pytest.approx(5.5, rel=1e-10)
    w = derived(exp_triple(1.0), 1, 2.0)
    assert float(w.a_plus_lambda) <= 5.5 * math.e
    assert cor3_constant(1.0, 1, 1) == pytest.approx(16.5, rel=1e-15)
    assert cor2_constant(1.0, 1, 1) == 3.0
    with pytest.raises(ValueError):
        cor3_D(0.0)


def test_derived_matches_symbolic_oracle():
    x, e = sp.symbols("x eps", positive=True)
    phi, F = e * sp.log(x), -sp.Rational(1, 3) * sp.exp(-2 * (x - 1))
    qq, ell = 2, 3
    a = x + F
    b = (a * sp.diff(phi, x) + sp.diff(F, x) + 1) / (qq * a * ell) + 1
    lam = -(1 + sp.diff(F, x)) ** 2 / (sp.diff(F, x, 2) + a * sp.diff(phi, x, 2))
    t = combined_triple(0.7, 1 / 3, 2.0, q=qq)
    pts = np.array([1.001, 1.3, 2.0, 7.5, 40.0])
    w = derived(t, ell, pts)
    for k, xv in enumerate(pts):
        sub = {x: xv, e: 0.7}
        assert w.a[k] == pytest.approx(float(a.subs(sub)), rel=1e-13)
        assert w.b[k] == pytest.approx(float(b.subs(sub)), rel=1e-13)
        assert w.lam[k] == pytest.approx(float(lam.subs(sub)), rel=1e-13)


eps_s = st.floats(0.05, 20.0)
q_s = st.integers(1, 4)
ell_s = st.integers(1, 4)


@settings(max_examples=60, deadline=None)
@given(eps_s, q_s, ell_s)
def test_log_triple_closed_forms(eps, q, ell):
    w = derived(log_triple(eps, q), ell, X)
    exact = (1 + eps) * X / eps
    assert np.max(np.abs(w.a_plus_lambda - exact) / exact) < 1e-12
    simplified = q * ell / (eps + 1) + 1 / X
    np.testing.assert_allclose(w.efficiency, simplified, rtol=1e-10)
    assert np.all(w.efficiency <= cor2_efficiency_bound(eps, q, ell) * (1 + 1e-12))


@settings(max_examples=60, deadline=None)
@given(eps_s, q_s, ell_s)
def test_exp_triple_bounds(eps, q, ell):
    # keep exp(-eps (x-1)) well above underflow
    x = X[eps * (X - 1) < 600]
    w = derived(exp_triple(eps, q), ell, x)
    assert np.all(w.efficiency <= (2 + q * ell) * (1 + 1e-12))
    with np.errstate(over="ignore"):
        assert np.all(w.a_plus_lambda <= cor3_envelope(eps, x) * (1 + 1e-12))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 0.99), st.floats(0.05, 10.0), q_s, ell_s)
def test_combined_triples_are_valid(e1, e2, e3, q, ell):
    if e1 + e2 <= 0.01:
        return
    t = combined_triple(e1, e2, e3, q)
    assert validate(t, grid_points=1000).valid
    w = derived(t, ell, X)
    assert np.all(w.a > 0) and np.all(w.lam > 0) and np.all(w.b > 1)


def test_custom_triple_agrees_with_builtin():
    c = custom_triple("eps*log(x)", "0", q=2, eps=1.5)
    b = log_triple(1.5, 2)
    for f in ("phi", "dphi", "d2phi", "F", "dF", "d2F"):
        np.testing.assert_allclose(getattr(c, f)(X), getattr(b, f)(X), rtol=1e-14, atol=0)
    wc, wb = derived(c, 2, X), derived(b, 2, X)
    np.testing.assert_allclose(wc.efficiency, wb.efficiency, rtol=1e-13)


def test_custom_triple_errors():
    with pytest.raises(ValueError):
        custom_triple("eps*log(x", "0", eps=1)
    with pytest.raises(ValueError):
        custom_triple("k*log(x)", "0")


def test_derived_errors():
    zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
    flat = SkodaTriple(zero, zero, zero, zero, zero, zero, q=1)
    with pytest.raises(ZeroDivisionError):
        derived(flat, 1, 2.0)
    with pytest.raises(ValueError):
        derived(log_triple(1.0), 1, 1.0)
    with pytest.raises(ValueError):
        derived(log_triple(1.0), 0, 2.0)


def test_constructor_guards():
    with pytest.raises(ValueError):
        log_triple(0)
    with pytest.raises(ValueError):
        exp_triple(1.0, eta=1.0)
    with pytest.raises(ValueError):
        combined_triple(0, 0, 1)
    with pytest.raises(ValueError):
        make_triple("poly")
    with pytest.raises(ValueError):
        log_triple(1.0, q=0)


def test_grid_shape():
    g = validation_grid(1.5, 3.0, 5)
    assert g[0] == pytest.approx(1.5) and g[-1] == pytest.approx(3.0)
    assert np.all(np.diff(np.log(g - 1)) == pytest.approx(np.log(4) / 4))
    with pytest.raises(ValueError):
        validation_grid(1.0, 3.0)


def test_rows_layout():
    rows = derived(log_triple(1.0), 1, np.array([2.0, 3.0])).rows()
    assert len(rows) == 2 and len(rows[0]) == 6
    assert rows[0][0] == 2.0 and rows[0][4] == pytest.approx(4.0)
