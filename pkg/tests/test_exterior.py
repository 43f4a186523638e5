import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koszul.exterior import (
    KoszulElement,
    contract,
    factorial_norm_full,
    multi_indices,
    norm_sq,
    pairing,
    sort_with_sign,
    wedge_conj,
)
from koszul.polyalg import Polynomial, parse_polynomial as P
from koszul.selftest import random_element, random_polynomial


def dense_contract(g, arr):
    """Full-tensor oracle: contract the first slot of a dense skew array."""
    return np.tensordot(np.asarray(g), arr, axes=(0, 0))


def dense_wedge_conj(g, arr, p):
    """Full-tensor oracle: antisymmetrize conj(g) (x) h over all slots, weights 1/d!."""
    d = arr.ndim
    gb = np.conj(np.asarray(g))
    out = np.zeros((p,) * (d + 1), dtype=complex)
    for idx in itertools.product(range(p), repeat=d + 1):
        if len(set(idx)) < d + 1:
            continue
        acc = 0j
        for s in range(d + 1):
            rest = idx[:s] + idx[s + 1:]
            acc += (-1) ** s * gb[idx[s]] * (arr[rest] if d else arr)
        out[idx] = acc
    return out


def test_contract_examples():
    v = KoszulElement.from_vector([3, 5])
    assert contract([1, 0], v) == KoszulElement.scalar(2, 3)
    z = [Polynomial.variable(3, k) for k in range(3)]
    u = KoszulElement(3, 2, {(1, 2): P("-1", 3)})
    assert contract(z, u) == KoszulElement(3, 1, {(1,): z[1], (2,): -z[0]})


def test_wedge_conj_examples():
    h = KoszulElement.scalar(2, 1 + 2j)
    assert wedge_conj([1, 1], h) == KoszulElement.from_vector([1 + 2j, 1 + 2j])
    h = KoszulElement.from_vector([1, -1])
    w = wedge_conj([1, 1], h)
    assert w[(1, 2)] == -2
    assert w[(2, 1)] == 2
    assert norm_sq(w) == 4


def test_norm_examples():
    assert norm_sq(KoszulElement(3, 2)) == 0
    assert norm_sq(KoszulElement.from_vector([1, -1])) == 2
    w = KoszulElement(2, 2, {(1, 2): -2})
    assert norm_sq(w) == 4
    assert factorial_norm_full(w) == pytest.approx(4)


def test_skew_access_and_storage():
    w = KoszulElement(4, 3, {(1, 2, 4): 5})
    assert w[(2, 1, 4)] == -5
    assert w[(4, 1, 2)] == 5
    assert w[(1, 1, 4)] == 0
    with pytest.raises(ValueError):
        KoszulElement(4, 2, {(2, 1): 1})
    assert sort_with_sign((3, 1, 2)) == ((1, 2, 3), 1)
    assert sort_with_sign((2, 1)) == ((1, 2), -1)


def test_json_round_trip():
    z = [Polynomial.variable(2, k) for k in range(2)]
    w = KoszulElement(3, 2, {(1, 3): z[0] * 2 - 1, (2, 3): P("(1/2+1i) * z2", 2)})
    js = w.to_json()
    assert js["entries"][0]["index"] == [1, 3]
    assert KoszulElement.from_json(js) == w
    # float entries come back as exact rationals with the same value
    s = KoszulElement.from_vector([1 + 0j, 2.5j])
    np.testing.assert_array_equal(KoszulElement.from_json(s.to_json()).to_array(), s.to_array())


def test_json_sign_normalization():
    js = {"p": 2, "degree": 2, "entries": [{"index": [2, 1], "coeff": ["3", "0"]}]}
    assert KoszulElement.from_json(js)[(1, 2)] == -3
    with pytest.raises(ValueError):
        KoszulElement.from_json({"p": 2, "degree": 2, "entries": [{"index": [1, 1], "coeff": ["1", "0"]}]})


def _case(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 6))
    d = int(rng.integers(0, p + 1))
    g = list(rng.standard_normal(p) + 1j * rng.standard_normal(p))
    return rng, p, d, g


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contract_and_wedge_match_dense_oracle(seed):
    rng, p, d, g = _case(seed)
    if d >= 1:
        v = random_element(rng, p, d)
        got = contract(g, v)
        want = dense_contract(g, v.to_array())
        if got.degree:
            np.testing.assert_allclose(got.to_array(), want, atol=1e-12)
        else:
            assert complex(got.get((), 0)) == pytest.approx(complex(want))
    if d < p:
        h = random_element(rng, p, d)
        arr = h.to_array() if d else complex(h.get((), 0))
        np.testing.assert_allclose(wedge_conj(g, h).to_array(), dense_wedge_conj(g, np.asarray(arr), p),
                                   atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_norm_matches_full_tensor(seed):
    rng, p, d, g = _case(seed)
    if d == 0:
        return
    w = random_element(rng, p, d)
    assert norm_sq(w) == pytest.approx(factorial_norm_full(w), rel=1e-12, abs=1e-300)
    full = w.to_array()
    assert norm_sq(w) == pytest.approx(float(np.sum(np.abs(full) ** 2)) / math.factorial(d), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_exact_nilpotence(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(2, 5))
    d = int(rng.integers(2, p + 1))
    n = int(rng.integers(1, 3))
    g = [random_polynomial(rng, n) for _ in range(p)]
    assert contract(g, contract(g, random_element(rng, p, d, n))).is_zero()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjoint_leibniz_and_norm_identity(seed):
    rng, p, d, g = _case(seed)
    S = sum(abs(x) ** 2 for x in g)
    if d >= 1:
        u = random_element(rng, p, d, density=1.0)
        h = random_element(rng, p, d - 1, density=1.0)
        a, b = pairing(contract(g, u), h), pairing(u, wedge_conj(g, h))
        assert abs(a - b) <= 1e-10 * max(abs(a), abs(b), 1e-300)
    if 1 <= d < p:
        h = random_element(rng, p, d, density=1.0)
        lhs = contract(g, wedge_conj(g, h)) + wedge_conj(g, contract(g, h))
        assert math.sqrt(norm_sq(lhs - h * S)) <= 1e-10 * S * math.sqrt(norm_sq(h)) + 1e-300
        k = contract(g, random_element(rng, p, d + 1, density=1.0))
        if not k.is_zero():
            assert norm_sq(wedge_conj(g, k)) == pytest.approx(S * norm_sq(k), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_wedge_conj_twice_is_zero(seed):
    rng, p, d, g = _case(seed)
    if d + 2 > p:
        return
    h = wedge_conj(g, random_element(rng, p, d, density=1.0))
    w = wedge_conj(g, h)
    assert all(abs(c) < 1e-12 for _, c in w.items())


def test_wedge_rejects_polynomials():
    z = Polynomial.variable(1, 0)
    with pytest.raises(TypeError):
        wedge_conj([z, z], KoszulElement.scalar(2, 1))


def test_multi_indices_count():
    for p in range(1, 6):
        for d in range(p + 1):
            assert len(multi_indices(p, d)) == math.comb(p, d)
