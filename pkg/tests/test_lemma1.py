import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koszul.exterior import multi_indices, sort_with_sign
from koszul.lemma1 import (
    Lemma1Instance,
    grid_configs,
    inequality_sides,
    q_constant,
    random_instance,
    rank_operators,
    rank_oracle,
    verify_lemma1,
)


def brute_sides(inst, base):
    """Loop-by-loop evaluation of both sides, independent of the batched kernels."""
    p, n = inst.p, inst.n
    a, b = inst.a, inst.b

    def c(i, alpha):
        key, sign = sort_with_sign((i,) + tuple(base))
        if not sign or key not in inst.c:
            return 0j
        return sign * inst.c[key][alpha]

    s = 0j
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            for al in range(n):
                s += np.conj(a[j - 1]) * (a[j - 1] * b[i - 1, al] - a[i - 1] * b[j - 1, al]) * c(i, al)
    lhs = abs(s) ** 2
    wedge = 0.0
    for i in range(1, p + 1):
        for j in range(1, p + 1):
            for k in range(j + 1, p + 1):
                t = sum((a[j - 1] * b[k - 1, al] - a[k - 1] * b[j - 1, al]) * c(i, al) for al in range(n))
                wedge += abs(t) ** 2
    rhs = q_constant(p, n, inst.ell) * float(np.sum(np.abs(a) ** 2)) * wedge
    return lhs, rhs


def test_q_constant_examples():
    assert q_constant(4, 2, 1) == 2
    assert q_constant(4, 9, 2) == 3
    assert q_constant(5, 1, 3) == 1
    assert q_constant(1, 3, 1) == 0
    for bad in [(2, 1, 3), (2, 0, 1), (0, 1, 1), (3, 2, 0)]:
        with pytest.raises(ValueError):
            q_constant(*bad)


def _two_by_one(c):
    return Lemma1Instance(2, 1, 1, a=[1, 0], b=[[0], [1]], c={(1,): [c[0]], (2,): [c[1]]})


def test_inequality_examples():
    assert inequality_sides(_two_by_one((0, 1))) == pytest.approx((1.0, 1.0))
    assert inequality_sides(_two_by_one((1, 0))) == pytest.approx((0.0, 1.0))
    rng = np.random.default_rng(3)
    inst = random_instance(rng, 4, 3, 2)
    zero = Lemma1Instance(4, 3, 2, a=np.zeros(4), b=inst.b, c=inst.c)
    for base in zero.bases():
        assert inequality_sides(zero, base) == (0.0, 0.0)


def test_equality_pin():
    # q = 1 is attained here, so the constant cannot be lowered for this shape
    lhs, rhs = inequality_sides(_two_by_one((0, 1)))
    assert lhs == rhs == 1.0


def test_base_length_checked():
    inst = random_instance(np.random.default_rng(0), 3, 2, 2)
    with pytest.raises(ValueError):
        inequality_sides(inst, ())
    with pytest.raises(ValueError):
        rank_oracle(inst, (1, 2))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(grid_configs(5, 4)))
def test_sides_match_brute_force(seed, cfg):
    p, n, ell = cfg
    inst = random_instance(np.random.default_rng(seed), p, n, ell)
    for base in inst.bases():
        got = inequality_sides(inst, base)
        want = brute_sides(inst, base)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-12)
        assert got[0] <= got[1] * (1 + 1e-9)


def test_rank_examples():
    rng = np.random.default_rng(11)
    for _ in range(20):
        inst = random_instance(rng, 3, 2, 2)
        for base in inst.bases():
            rank, bound = rank_oracle(inst, base)
            assert bound == 2 and rank <= 2
        inst = random_instance(rng, 2, 5, 1)
        rank, bound = rank_oracle(inst)
        assert bound == 1 and rank <= 1
    inst = random_instance(rng, 4, 3, 2)
    empty = Lemma1Instance(4, 3, 2, a=inst.a, b=inst.b, c={})
    assert all(rank_oracle(empty, base)[0] == 0 for base in empty.bases())


def test_rank_requires_nonzero_a():
    inst = random_instance(np.random.default_rng(1), 3, 2, 1)
    with pytest.raises(ValueError):
        rank_oracle(Lemma1Instance(3, 2, 1, a=np.zeros(3), b=inst.b, c=inst.c))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([c for c in grid_configs(5, 4) if c[0] > 1]))
def test_rank_matches_numpy_and_operator_identities(seed, cfg):
    p, n, ell = cfg
    inst = random_instance(np.random.default_rng(seed), p, n, ell)
    for base in inst.bases():
        ops = rank_operators(inst, base)
        AB = ops["AB"]
        assert ops["rank"] == np.linalg.matrix_rank(AB, tol=1e-9 * max(np.linalg.norm(AB, 2), 1e-300))
        assert ops["rank"] <= q_constant(p, n, ell)
        X = np.conj(inst.a)
        assert np.linalg.norm(AB @ X) <= 1e-10 * np.linalg.norm(AB) * np.linalg.norm(X) + 1e-300
        for i in base:
            assert np.linalg.norm(AB[i - 1]) <= 1e-10 * np.linalg.norm(AB) + 1e-300
        tr = abs(np.trace(AB)) ** 2
        fro = float(np.sum(np.abs(AB) ** 2))
        assert tr <= ops["rank"] * fro * (1 + 1e-9) + 1e-300
        assert fro <= ops["x_norm_sq"] * ops["wedge_norm_sq"] * (1 + 1e-9) + 1e-300
        # the trace of AB is the quantity inside the left-hand side
        lhs, _ = inequality_sides(inst, base)
        assert tr == pytest.approx(lhs, rel=1e-9, abs=1e-12)


def test_instance_validation_and_json():
    inst = random_instance(np.random.default_rng(5), 4, 2, 3)
    assert set(inst.c) <= set(multi_indices(4, 3))
    back = Lemma1Instance.from_json(inst.to_json())
    for base in inst.bases():
        assert inequality_sides(back, base) == inequality_sides(inst, base)
    with pytest.raises(ValueError):
        Lemma1Instance(2, 1, 2, a=[1, 1], b=[[0], [1]], c={(2, 1): [1]})
    with pytest.raises(ValueError):
        Lemma1Instance(2, 1, 1, a=[1, 1, 1], b=[[0], [1]])
    with pytest.raises(ValueError):
        Lemma1Instance.from_json({"p": 2})


def test_full_c_is_skew():
    inst = random_instance(np.random.default_rng(9), 4, 2, 3)
    full = inst.full_c()
    for perm in itertools.permutations(range(3)):
        _, sign = sort_with_sign(perm)
        np.testing.assert_array_equal(np.transpose(full, perm + (3,)), sign * full)


def test_verify_is_worker_independent():
    one = verify_lemma1(7, 3000, chunk=1000)
    many = verify_lemma1(7, 3000, chunk=1000, workers=3)
    assert one.ok and many.ok
    assert one.to_json() == many.to_json()
    assert one.checks == many.checks > 3000
