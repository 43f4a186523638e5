import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from koszul.quadrature import (
    AllSamplesRejected,
    Domain,
    IntegralEstimate,
    integrate,
    sample,
    sample_many,
)

DISC = Domain.unit_polydisc(1)
BALL2 = Domain.unit_ball(2)


def abs_sq(z):
    return np.abs(z[:, 0]) ** 2


def inv_abs(z):
    return 1.0 / np.abs(z[:, 0])


def ones(z):
    return np.ones(len(z))


def test_mean_abs_sq_on_disc():
    e = integrate(abs_sq, DISC, 10**6, seed=1)
    # volume-weighted, so the mean of |z|^2 is e / pi
    assert abs(e.mean / math.pi - 0.5) <= 3 * e.stderr / math.pi


def test_constant_integrands():
    e = integrate(ones, DISC, 10**4, seed=2)
    assert e.mean == pytest.approx(math.pi, rel=1e-14) and e.stderr == 0
    e = integrate(ones, BALL2, 10**4, seed=2)
    assert e.mean == pytest.approx(math.pi ** 2 / 2, rel=1e-14)


def test_inverse_abs_is_integrable():
    e = integrate(inv_abs, DISC, 10**6, seed=3)
    assert math.isfinite(e.mean) and e.rejected == 0
    assert abs(e.mean - 2 * math.pi) <= 4 * e.stderr


@pytest.mark.parametrize("f,d,exact", [
    (abs_sq, DISC, math.pi / 2),
    (inv_abs, DISC, 2 * math.pi),
    (lambda z: (np.sum(np.abs(z) ** 2, axis=1) < 0.5).astype(float), BALL2, math.pi ** 2 / 8),
])
def test_error_shrinks_like_inverse_sqrt(f, d, exact):
    Ns = [10**4, 10**5, 10**6]
    rms, se = [], []
    for N in Ns:
        errs = [integrate(f, d, N, seed=100 + s).mean - exact for s in range(12)]
        rms.append(math.sqrt(np.mean(np.square(errs))))
        se.append(integrate(f, d, N, seed=99).stderr)
    for k in range(2):
        assert 2.6 < se[k] / se[k + 1] < 3.8
        assert 1.6 < rms[k] / rms[k + 1] < 6.5


def test_ball_membership_and_volume():
    pts = sample_many(BALL2, np.random.default_rng(0), 10**5)
    assert np.all(np.sum(np.abs(pts) ** 2, axis=1) < 1)
    assert BALL2.volume == pytest.approx(math.pi ** 2 / 2)
    d = Domain.polydisc([1 + 1j, -2], [0.5, 2])
    assert d.volume == pytest.approx(math.pi ** 2 * 0.25 * 4)
    assert np.all(d.contains_many(sample_many(d, np.random.default_rng(1), 10**4)))
    assert not d.contains([1 + 1j, 0.1 + 2j])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.floats(0.1, 5), st.floats(-3, 3), st.integers(0, 2**32 - 1))
def test_samples_are_members(n, r, c, seed):
    rng = np.random.default_rng(seed)
    for d in (Domain.ball([c] * n, r), Domain.polydisc([1j * c] * n, [r * (k + 1) for k in range(n)])):
        assert np.all(d.contains_many(sample_many(d, rng, 500)))
        assert d.contains(sample(d, rng))


def test_ball_radial_law():
    # P(|z| < s) = s^(2n) for the uniform measure on the unit 2n-ball
    pts = sample_many(BALL2, np.random.default_rng(4), 2 * 10**5)
    frac = np.mean(np.linalg.norm(pts, axis=1) < 0.8)
    assert frac == pytest.approx(0.8 ** 4, abs=4 * math.sqrt(0.41 * 0.59 / 2e5))


def test_determinism_and_worker_invariance():
    f = inv_abs
    a = integrate(f, DISC, 50_000, seed=9)
    assert integrate(f, DISC, 50_000, seed=9) == a
    assert integrate(f, DISC, 50_000, seed=9, workers=3) == a
    assert integrate(f, DISC, 50_000, seed=10) != a


def test_scalar_path_matches_vectorized():
    a = integrate(abs_sq, DISC, 1000, seed=5)
    b = integrate(lambda z: abs(z[0]) ** 2, DISC, 1000, seed=5, vectorized=False)
    assert a.mean == pytest.approx(b.mean, rel=1e-13)


def test_multi_column_shares_samples():
    both = integrate(lambda z: np.stack([abs_sq(z), 2 * abs_sq(z)], axis=1), DISC, 5000, seed=6)
    single = integrate(abs_sq, DISC, 5000, seed=6)
    assert len(both) == 2
    # numpy sums columns in a different order, so allow an ulp or two
    assert both[0].mean == pytest.approx(single.mean, rel=1e-14)
    assert (both[0].count, both[0].max) == (single.count, single.max)
    assert both[1].mean == pytest.approx(2 * single.mean, rel=1e-14)


def test_rejection_accounting():
    cut = 0.01
    e = integrate(ones, DISC, 100_000, seed=7, cutoff=cut, norm_g_sq=abs_sq)
    assert e.count + e.rejected == 100_000
    assert e.rejected_fraction == pytest.approx(cut, abs=4 * math.sqrt(cut / 1e5))
    e = integrate(lambda z: np.where(abs_sq(z) < 0.25, np.inf, 1.0), DISC, 10_000, seed=7)
    assert e.rejected_fraction == pytest.approx(0.25, abs=0.02)
    with pytest.raises(AllSamplesRejected):
        integrate(ones, DISC, 1000, seed=7, cutoff=2.0, norm_g_sq=abs_sq)


def test_guards():
    with pytest.raises(ValueError):
        integrate(ones, DISC, 99, seed=0)
    with pytest.raises(ValueError):
        Domain.polydisc([0, 0], [1])
    with pytest.raises(ValueError):
        Domain.ball([0], -1)
    with pytest.raises(ValueError):
        Domain.from_json({"kind": "cube", "center": [[0, 0]]})
    with pytest.raises(ValueError):
        Domain.from_json({"kind": "ball", "center": [[0, 0]]})


def test_json_round_trip():
    for d in (Domain.polydisc([0.5 - 1j, 2], [1, 3]), Domain.ball([0, 1j, 0], 2.5)):
        assert Domain.from_json(d.to_json()) == d
    js = Domain.unit_ball(2).to_json()
    assert js == {"kind": "ball", "center": [[0.0, 0.0], [0.0, 0.0]], "radius": 1.0}
    e = IntegralEstimate(1.0, 0.1, 90, 10, 3.0)
    assert e.to_json()["rejected_fraction"] == 0.1
