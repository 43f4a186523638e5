from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koszul.polyalg import GaussQ, HermitianPolynomial, Polynomial, parse_polynomial

N = 3
small = st.fractions(min_value=-3, max_value=3, max_denominator=5)
gauss = st.builds(GaussQ, small, small)
exps = st.tuples(*[st.integers(0, 3)] * N)
polys = st.dictionaries(exps, gauss, max_size=5).map(lambda d: Polynomial(N, d))
points = st.lists(gauss, min_size=N, max_size=N)


def test_eval_examples():
    assert parse_polynomial("z1^2", 2)([3, 5]) == 9
    assert parse_polynomial("z1*z2 + 1")([GaussQ(0, 1), GaussQ(0, 1)]) == 0
    assert parse_polynomial("z2", 2)([0, GaussQ(1, 1)]) == GaussQ(1, 1)


def test_wirtinger_examples():
    z = [Polynomial.variable(2, k) for k in range(2)]
    assert (z[0] ** 2).wirtinger(0) == z[0] * 2
    assert z[0].wirtinger(1).is_zero()
    assert (z[0] * z[1] ** 2).wirtinger(0) == z[1] ** 2


def test_no_zero_terms_stored():
    p = Polynomial(2, {(1, 0): 1, (0, 1): 0})
    q = p - p
    assert list(p.items()) == [((1, 0), GaussQ(1))]
    assert q.is_zero() and not q.terms


@given(polys, polys)
def test_product_rule(q, r):
    for a in range(N):
        assert (q * r).wirtinger(a) == q.wirtinger(a) * r + q * r.wirtinger(a)


@given(polys, polys, points)
def test_eval_is_a_ring_homomorphism(q, r, z):
    assert (q * r)(z) == q(z) * r(z)
    assert (q + r)(z) == q(z) + r(z)


@given(polys, polys)
def test_degree_additive(q, r):
    if q and r:
        assert (q * r).degree() == q.degree() + r.degree()


@given(polys)
def test_text_and_json_round_trip(q):
    assert parse_polynomial(str(q), N) == q
    assert Polynomial.from_json(q.to_json()) == q


@settings(max_examples=30)
@given(polys, st.integers(0, N - 1))
def test_float_eval_matches_exact(q, alpha):
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((4, N)) + 1j * rng.standard_normal((4, N))
    exact = [complex(q([GaussQ(Fraction(x.real), Fraction(x.imag)) for x in z])) for z in pts]
    np.testing.assert_allclose(q.eval_many(pts), exact, rtol=1e-12, atol=1e-12)


def test_finite_difference_first_order():
    q = parse_polynomial("(1/2+1i) * z1^3 * z2 - 2 * z1 * z2^2 + 3i * z1^2", 2)
    z = np.array([0.3 + 0.2j, -0.5 + 0.1j])
    exact = complex(q.wirtinger(0)(z))
    errs = []
    for d in (1e-3, 1e-4, 1e-5):
        fd = (complex(q(z + np.array([d, 0]))) - complex(q(z))) / d
        errs.append(abs(fd - exact))
    # error shrinks by roughly the step ratio each time
    assert 5 < errs[0] / errs[1] < 20
    assert 5 < errs[1] / errs[2] < 20


@pytest.mark.parametrize("text", ["", "z1 +", "* z1", "z0", "2 z1", "(1+2i"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_polynomial(text)


def test_parse_gaussian_coefficients():
    q = parse_polynomial("(1/2+3/4i) * z1^2 - i*z2 + 5")
    assert q.coeff((2, 0)) == GaussQ(Fraction(1, 2), Fraction(3, 4))
    assert q.coeff((0, 1)) == GaussQ(0, -1)
    assert q.coeff((0, 0)) == 5


def test_polynomial_json_schema():
    js = parse_polynomial("1/3 * z1 - 2i", 2).to_json()
    assert js == {"n": 2, "terms": [{"coeff": ["0", "-2"], "exp": [0, 0]},
                                    {"coeff": ["1/3", "0"], "exp": [1, 0]}]}


def test_hermitian_norm_sq_and_hessian():
    psi = HermitianPolynomial.norm_sq(2, Fraction(1, 2))
    z = np.array([1 + 1j, 2.0])
    assert psi(z) == pytest.approx(0.5 * (2 + 4))
    np.testing.assert_allclose(psi.complex_hessian(z), 0.5 * np.eye(2))


def test_hermitian_symmetry_enforced():
    with pytest.raises(ValueError):
        HermitianPolynomial(1, {((1,), (0,)): 1})


def test_abs_sq_hessian_is_rank_one():
    q = parse_polynomial("z1 + 2*z2", 2)
    h = HermitianPolynomial.abs_sq(q)
    z = np.array([0.1, 0.2j])
    assert h(z) == pytest.approx(abs(complex(q(z))) ** 2)
    grad = np.array([1, 2])
    np.testing.assert_allclose(h.complex_hessian(z), np.outer(grad, grad.conj()), atol=1e-14)
    assert HermitianPolynomial.from_json(h.to_json()) == h
