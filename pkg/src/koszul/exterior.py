"""Skew-symmetric coefficient arrays for the Koszul complex.

An element of degree ``d`` over ``p`` generators is stored sparsely on
strictly increasing multi-indices (1-based, ``1 <= i1 < ... < id <= p``).
Lookups at arbitrary index tuples sort the tuple and apply the permutation
sign, so the full skew tensor is always implicit.

Coefficients may be :class:`~koszul.polyalg.Polynomial`, exact
:class:`~koszul.polyalg.GaussQ` scalars or Python/numpy complex numbers.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .polyalg import GaussQ, Polynomial

__all__ = [
    "KoszulElement",
    "multi_indices",
    "sort_with_sign",
    "contract",
    "wedge_conj",
    "norm_sq",
    "pairing",
    "gnorm_sq",
]


def multi_indices(p: int, d: int) -> list[tuple[int, ...]]:
    """All strictly increasing index tuples of length d drawn from 1..p."""
    if d < 0 or d > p:
        return []
    return list(combinations(range(1, p + 1), d))


def sort_with_sign(idx) -> tuple[tuple[int, ...], int]:
    """Sort an index tuple; return (sorted, parity sign), sign 0 on repeats."""
    idx = list(idx)
    sign = 1
    # insertion sort counting transpositions; tuples are short
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


def _is_zero(c) -> bool:
    if isinstance(c, (Polynomial, GaussQ)):
        return not c
    return c == 0


class KoszulElement:
    """Immutable degree-``d`` skew array over ``p`` generators."""

    __slots__ = ("p", "degree", "_coeffs")

    def __init__(self, p: int, degree: int, coeffs=None):
        if p < 0 or degree < 0:
            raise ValueError("p and degree must be nonnegative")
        self.p = p
        self.degree = degree
        clean = {}
        for key, c in (coeffs or {}).items():
            key = tuple(int(i) for i in key)
            if len(key) != degree:
                raise ValueError(f"index {key} has length {len(key)}, expected degree {degree}")
            if any(i < 1 or i > p for i in key):
                raise ValueError(f"index {key} out of range 1..{p}")
            skey, sign = sort_with_sign(key)
            if skey != key:
                raise ValueError(f"index {key} is not strictly increasing")
            if not _is_zero(c):
                clean[key] = c
        self._coeffs = clean

    @classmethod
    def scalar(cls, p: int, value) -> "KoszulElement":
        return cls(p, 0, {(): value})

    @classmethod
    def from_vector(cls, values) -> "KoszulElement":
        """Degree-1 element with components ``values[0..p-1]``."""
        values = list(values)
        return cls(len(values), 1, {(i + 1,): v for i, v in enumerate(values)})

    @classmethod
    def from_full(cls, p: int, degree: int, lookup) -> "KoszulElement":
        """Build from a callable on increasing index tuples."""
        return cls(p, degree, {k: lookup(k) for k in multi_indices(p, degree)})

    @property
    def coeffs(self) -> dict:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def keys(self):
        return self._coeffs.keys()

    def get(self, key, default=0):
        return self._coeffs.get(tuple(key), default)

    def __getitem__(self, idx):
        """Coefficient at any index tuple, with skew-symmetric sign.

        Returns integer 0 for absent entries and repeated indices.
        """
        idx = (idx,) if isinstance(idx, int) else tuple(idx)
        if len(idx) != self.degree:
            raise IndexError(f"expected {self.degree} indices, got {len(idx)}")
        key, sign = sort_with_sign(idx)
        if sign == 0 or key not in self._coeffs:
            return 0
        c = self._coeffs[key]
        return c if sign > 0 else -c

    def is_zero(self) -> bool:
        return not self._coeffs

    def __bool__(self):
        return bool(self._coeffs)

    def _check_compatible(self, other: "KoszulElement"):
        if not isinstance(other, KoszulElement):
            raise TypeError("expected a KoszulElement")
        if (self.p, self.degree) != (other.p, other.degree):
            raise ValueError(
                f"shape mismatch: (p={self.p}, degree={self.degree}) vs "
                f"(p={other.p}, degree={other.degree})"
            )

    def __add__(self, other):
        self._check_compatible(other)
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out[k] + c if k in out else c
        return KoszulElement(self.p, self.degree, out)

    def __neg__(self):
        return KoszulElement(self.p, self.degree, {k: -c for k, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "KoszulElement":
        return KoszulElement(self.p, self.degree, {k: c * s for k, c in self._coeffs.items()})

    def __mul__(self, s):
        if isinstance(s, KoszulElement):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return KoszulElement(self.p, self.degree, {k: c / s for k, c in self._coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, KoszulElement):
            return NotImplemented
        return (self.p, self.degree) == (other.p, other.degree) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.p, self.degree, frozenset(self._coeffs.items())))

    def __repr__(self):
        body = ", ".join(f"{k}: {c}" for k, c in sorted(self._coeffs.items()))
        return f"KoszulElement(p={self.p}, degree={self.degree}, {{{body}}})"

    def map(self, fn) -> "KoszulElement":
        return KoszulElement(self.p, self.degree, {k: fn(c) for k, c in self._coeffs.items()})

    def evaluate(self, z) -> "KoszulElement":
        """Pointwise value: polynomial coefficients are evaluated at z."""
        return self.map(lambda c: c(z) if isinstance(c, Polynomial) else c)

    def eval_many(self, points: np.ndarray) -> dict:
        """Map key -> complex array of coefficient values at each point row."""
        pts = np.asarray(points, dtype=complex)
        out = {}
        for k, c in self._coeffs.items():
            if isinstance(c, Polynomial):
                out[k] = c.eval_many(pts)
            else:
                out[k] = np.full(pts.shape[0], complex(c))
        return out

    def to_array(self) -> np.ndarray:
        """Dense full skew tensor of shape ``(p,)*degree`` (complex scalars only)."""
        arr = np.zeros((self.p,) * self.degree, dtype=complex)
        for key, c in self._coeffs.items():
            val = complex(c)
            for perm in _signed_permutations(len(key)):
                order, sign = perm
                arr[tuple(key[i] - 1 for i in order)] = sign * val
        return arr

    @classmethod
    def from_array(cls, arr) -> "KoszulElement":
        """Read increasing entries of a dense skew tensor (no skew check)."""
        arr = np.asarray(arr)
        d = arr.ndim
        p = arr.shape[0] if d else 0
        if d == 0:
            raise ValueError("use KoszulElement.scalar for degree 0")
        return cls(p, d, {k: complex(arr[tuple(i - 1 for i in k)]) for k in multi_indices(p, d)})

    def max_poly_degree(self) -> int:
        return max(
            (c.degree() for c in self._coeffs.values() if isinstance(c, Polynomial)),
            default=0,
        )

    # JSON: {"p", "degree", "entries": [{"index": [...], "coeff": Polynomial | [re, im]}]}
    def to_json(self) -> dict:
        entries = []
        for k, c in sorted(self._coeffs.items()):
            if isinstance(c, Polynomial):
                cj = c.to_json()
            elif isinstance(c, GaussQ):
                cj = c.to_json()
            else:
                cj = [repr(complex(c).real), repr(complex(c).imag)]
            entries.append({"index": list(k), "coeff": cj})
        return {"p": self.p, "degree": self.degree, "entries": entries}

    @classmethod
    def from_json(cls, obj, n: int | None = None) -> "KoszulElement":
        try:
            p, degree = int(obj["p"]), int(obj["degree"])
            coeffs = {}
            for k, ent in enumerate(obj["entries"]):
                idx = tuple(ent["index"])
                cj = ent["coeff"]
                try:
                    if isinstance(cj, (dict, str)):
                        c = Polynomial.from_json(cj)
                        if n is not None and c.n != n:
                            raise ValueError(f"polynomial has n={c.n}, expected {n}")
                    else:
                        c = GaussQ.from_json(cj)
                except ValueError as exc:
                    raise ValueError(f"entries[{k}].coeff: {exc}") from exc
                skey, sign = sort_with_sign(idx)
                if sign == 0:
                    raise ValueError(f"entries[{k}].index {list(idx)} has a repeated index")
                coeffs[skey] = coeffs[skey] + sign * c if skey in coeffs else sign * c
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed KoszulElement JSON: {exc}") from exc
        return cls(p, degree, coeffs)


def _signed_permutations(d: int):
    from itertools import permutations

    for perm in permutations(range(d)):
        _, sign = sort_with_sign(perm)
        yield perm, sign


def _insert_sorted(key: tuple, i: int) -> tuple[tuple, int]:
    """Insert i into increasing key; return (new key, position) or (None, -1)."""
    pos = 0
    for k in key:
        if k == i:
            return None, -1
        if k < i:
            pos += 1
    return key[:pos] + (i,) + key[pos:], pos


def contract(g, v: KoszulElement) -> KoszulElement:
    """``(ι_g v)_{i1..i(l-1)} = sum_i g_i v_{i i1..i(l-1)}``.

    ``g`` is a sequence of p scalars or polynomials (g[0] is g_1).
    """
    g = list(g)
    if v.degree < 1:
        raise ValueError("contraction needs degree >= 1")
    if len(g) != v.p:
        raise ValueError(f"g has length {len(g)}, element has p={v.p}")
    out: dict = {}
    for key, c in v.items():
        for s, i in enumerate(key):
            rest = key[:s] + key[s + 1:]
            term = g[i - 1] * c
            if s % 2:
                term = -term
            out[rest] = out[rest] + term if rest in out else term
    return KoszulElement(v.p, v.degree - 1, out)


def _conj(x):
    if isinstance(x, Polynomial):
        raise TypeError("wedge_conj takes point values, not polynomials")
    return x.conjugate()


def wedge_conj(g_values, h: KoszulElement) -> KoszulElement:
    """``(ḡ∧h)_{i1..il} = -sum_s (-1)^s conj(g_{i_s}) h_{i1..^i_s..il}`` (s 1-based).

    ``g_values`` are scalars at a point; conjugation happens here.
    """
    g_values = list(g_values)
    if len(g_values) != h.p:
        raise ValueError(f"g has length {len(g_values)}, element has p={h.p}")
    if h.degree + 1 > h.p:
        raise ValueError(f"degree overflow: result degree {h.degree + 1} > p={h.p}")
    gbar = [_conj(x) for x in g_values]
    out: dict = {}
    for key, c in h.items():
        for i in range(1, h.p + 1):
            new, pos = _insert_sorted(key, i)
            if new is None:
                continue
            term = gbar[i - 1] * c
            if pos % 2:
                term = -term
            out[new] = out[new] + term if new in out else term
    return KoszulElement(h.p, h.degree + 1, out)


def _abs2(c) -> float:
    if isinstance(c, GaussQ):
        return c.abs2()
    c = complex(c)
    return c.real * c.real + c.imag * c.imag


def norm_sq(w: KoszulElement):
    """``(1/d!) sum_{full indices} |w|^2``, i.e. the sum over increasing keys.

    Exact (Fraction) for GaussQ coefficients, float otherwise.
    """
    total = 0
    for c in w._coeffs.values():
        if isinstance(c, Polynomial):
            raise TypeError("norm_sq needs point values; evaluate the element first")
        total = total + _abs2(c)
    return total


def pairing(u: KoszulElement, w: KoszulElement):
    """Factorial-normalized Hermitian pairing ``<u, w>`` (linear in u)."""
    u._check_compatible(w)
    total = 0
    for k, c in u.items():
        d = w.get(k, 0)
        if d:
            total = total + c * d.conjugate()
    return total


def gnorm_sq(g_values):
    return sum(_abs2(x) for x in g_values)


def factorial_norm_full(w: KoszulElement) -> float:
    """Norm computed literally over the full tensor; oracle for :func:`norm_sq`."""
    arr = w.to_array()
    return float(np.sum(np.abs(arr) ** 2) / math.factorial(w.degree))
