"""Exact multivariate polynomials over the Gaussian rationals.

Coefficients are :class:`GaussQ` values (pairs of :class:`fractions.Fraction`).
Floats only appear when a polynomial is evaluated at a floating point.

Variables are addressed by 0-based position, so ``z1`` in text form is
variable index 0.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "GaussQ",
    "Polynomial",
    "HermitianPolynomial",
    "as_gauss",
    "is_exact",
    "evaluate",
    "wirtinger",
    "parse_polynomial",
]


class GaussQ:
    """Gaussian rational ``re + im*i`` with exact :class:`Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def parse(cls, text: str) -> "GaussQ":
        """Parse ``p/q``, ``r/s i``, ``p/q+r/s i`` (spaces optional)."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty Gaussian rational")
        m = _GAUSS_RE.fullmatch(s)
        if m is None:
            raise ValueError(f"malformed Gaussian rational {text!r}")
        real, imag = m.group("re"), m.group("im")
        if real is None and imag is None:
            raise ValueError(f"malformed Gaussian rational {text!r}")
        re_part = Fraction(real) if real else Fraction(0)
        im_part = Fraction(0)
        if imag is not None:
            body = imag[:-1]
            if body in ("", "+"):
                im_part = Fraction(1)
            elif body == "-":
                im_part = Fraction(-1)
            else:
                im_part = Fraction(body)
        return cls(re_part, im_part)

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return complex(self) + other
        return GaussQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return complex(self) - other
        return GaussQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            if isinstance(other, (Polynomial, HermitianPolynomial)):
                return NotImplemented
            return complex(self) * other
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return complex(self) / other
        d = o.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussQ(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return other / complex(self)
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        out, base = GaussQ(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __repr__(self):
        return f"GaussQ({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{_imag_str(self.im)}"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{_imag_str(abs(self.im))}"

    def to_json(self) -> list[str]:
        return [str(self.re), str(self.im)]

    @classmethod
    def from_json(cls, pair) -> "GaussQ":
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"coefficient must be a [re, im] pair, got {pair!r}")
        return cls(Fraction(str(pair[0])), Fraction(str(pair[1])))


def _imag_str(x: Fraction) -> str:
    if x == 1:
        return "i"
    if x == -1:
        return "-i"
    return f"{x}i"


_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(
    rf"(?P<re>{_RAT}(?![\d/]*i))?(?P<im>(?:[+-]?(?:\d+(?:/\d+)?)?)i)?"
)


def _coerce(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (int, Rational)) and not isinstance(x, bool):
        return GaussQ(x)
    if isinstance(x, bool):
        return GaussQ(int(x))
    return NotImplemented


def as_gauss(x) -> GaussQ:
    """Convert an exact scalar, or a float/complex exactly (binary value), to GaussQ."""
    c = _coerce(x)
    if c is not NotImplemented:
        return c
    if isinstance(x, (float, np.floating)):
        return GaussQ(Fraction(float(x)))
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        return GaussQ(Fraction(x.real), Fraction(x.imag))
    if isinstance(x, np.integer):
        return GaussQ(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} to GaussQ")


def is_exact(x) -> bool:
    return isinstance(x, (GaussQ, int, Rational, np.integer)) and not isinstance(x, (float, complex))


Exponent = tuple  # tuple[int, ...]


class Polynomial:
    """Sparse polynomial in ``n`` complex variables with GaussQ coefficients.

    Immutable after construction; zero coefficients are never stored.
    """

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms=None):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent {exp} for n={n}")
            c = as_gauss(c)
            if c:
                clean[exp] = clean.get(exp, GaussQ()) + c
                if not clean[exp]:
                    del clean[exp]
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def constant(cls, n: int, c) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, k: int) -> "Polynomial":
        exp = [0] * n
        exp[k] = 1
        return cls(n, {tuple(exp): 1})

    @classmethod
    def monomial(cls, exp, c=1) -> "Polynomial":
        exp = tuple(exp)
        return cls(len(exp), {exp: c})

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coeff(self, exp) -> GaussQ:
        return self._terms.get(tuple(exp), GaussQ())

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def max_degree(self) -> int:
        """Largest exponent of any single variable; -1 for zero."""
        return max((max(e, default=0) for e in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    # arithmetic
    def _lift(self, other):
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")
            return other
        c = _coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return Polynomial.constant(self.n, c)

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, GaussQ()) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = _coerce(other)
            if c is NotImplemented:
                return NotImplemented
            if not c:
                return Polynomial(self.n)
            return Polynomial(self.n, {e: v * c for e, v in self._terms.items()})
        if other.n != self.n:
            raise ValueError(f"variable count mismatch: {self.n} vs {other.n}")
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, GaussQ()) + c1 * c2
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial.constant(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.n == other.n and self._terms == other._terms
        c = _coerce(other)
        if c is NotImplemented:
            return NotImplemented
        return self == Polynomial.constant(self.n, c)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def conjugate_coeffs(self) -> "Polynomial":
        """Polynomial whose coefficients are conjugated (``conj(q(conj z))``)."""
        return Polynomial(self.n, {e: c.conjugate() for e, c in self._terms.items()})

    # calculus and evaluation
    def wirtinger(self, alpha: int) -> "Polynomial":
        return wirtinger(self, alpha)

    def __call__(self, z):
        return evaluate(self, z)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation at rows of a complex ``(N, n)`` array."""
        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != self.n:
            raise ValueError(f"expected points of shape (N, {self.n}), got {pts.shape}")
        out = np.zeros(pts.shape[0], dtype=complex)
        if not self._terms:
            return out
        maxdeg = max(max(e, default=0) for e in self._terms)
        powers = [np.ones_like(pts)]
        for _ in range(maxdeg):
            powers.append(powers[-1] * pts)
        for e, c in self._terms.items():
            term = np.full(pts.shape[0], complex(c))
            for k, ek in enumerate(e):
                if ek:
                    term = term * powers[ek][:, k]
            out += term
        return out

    # text and JSON
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e in sorted(self._terms, key=lambda x: (-sum(x), tuple(-a for a in x))):
            c = self._terms[e]
            factors = [f"z{k + 1}" + (f"^{ek}" if ek > 1 else "") for k, ek in enumerate(e) if ek]
            cs = str(c)
            if c.re and c.im:
                cs = f"({cs})"
            if factors:
                if c == 1:
                    body = " * ".join(factors)
                elif c == -1:
                    body = "-" + " * ".join(factors)
                else:
                    body = " * ".join([cs] + factors)
            else:
                body = cs
            parts.append(body)
        text = parts[0]
        for part in parts[1:]:
            text += " - " + part[1:] if part.startswith("-") else " + " + part
        return text

    def __repr__(self):
        return f"Polynomial({self.n}, {str(self)!r})"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"coeff": c.to_json(), "exp": list(e)}
                for e, c in sorted(self._terms.items())
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "Polynomial":
        if isinstance(obj, str):
            return parse_polynomial(obj)
        try:
            n = int(obj["n"])
            terms = {}
            for k, t in enumerate(obj["terms"]):
                exp = tuple(t["exp"])
                if len(exp) != n:
                    raise ValueError(f"terms[{k}].exp has length {len(exp)}, expected n={n}")
                terms[exp] = terms.get(exp, GaussQ()) + GaussQ.from_json(t["coeff"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial JSON: {exc}") from exc
        return cls(n, terms)


class HermitianPolynomial:
    """Real-valued polynomial in ``z`` and ``conj(z)``.

    Terms map ``(A, B)`` (holomorphic and antiholomorphic exponents) to
    coefficients with ``c[A, B] == conj(c[B, A])``.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms=None, check: bool = True):
        self.n = n
        clean = {}
        for (a, b), c in (terms or {}).items():
            a, b = tuple(a), tuple(b)
            if len(a) != n or len(b) != n:
                raise ValueError("exponent length mismatch")
            c = as_gauss(c)
            if c:
                clean[(a, b)] = clean.get((a, b), GaussQ()) + c
        self._terms = {k: v for k, v in clean.items() if v}
        if check:
            for (a, b), c in self._terms.items():
                if self._terms.get((b, a), GaussQ()) != c.conjugate():
                    raise ValueError(f"not Hermitian: coefficient of {(a, b)} vs {(b, a)}")

    @classmethod
    def zero(cls, n: int) -> "HermitianPolynomial":
        return cls(n)

    @classmethod
    def norm_sq(cls, n: int, scale=1) -> "HermitianPolynomial":
        """``scale * ||z||^2``."""
        terms = {}
        for k in range(n):
            e = tuple(1 if j == k else 0 for j in range(n))
            terms[(e, e)] = scale
        return cls(n, terms)

    @classmethod
    def abs_sq(cls, q: Polynomial) -> "HermitianPolynomial":
        """``|q|^2`` for a holomorphic polynomial q."""
        terms: dict = {}
        for a, ca in q.items():
            for b, cb in q.items():
                terms[(a, b)] = terms.get((a, b), GaussQ()) + ca * cb.conjugate()
        return cls(q.n, terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other):
        if not isinstance(other, HermitianPolynomial):
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, GaussQ()) + c
        return HermitianPolynomial(self.n, out)

    def __mul__(self, other):
        c = _coerce(other)
        if c is NotImplemented or c.im:
            return NotImplemented
        return HermitianPolynomial(self.n, {k: v * c for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HermitianPolynomial):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def d_holo(self, alpha: int) -> dict:
        """``∂_alpha`` as a raw term map (no longer Hermitian in general)."""
        return _diff_terms(self._terms, alpha, slot=0)

    def d_anti(self, alpha: int) -> dict:
        """``∂_{bar alpha}`` as a raw term map."""
        return _diff_terms(self._terms, alpha, slot=1)

    def __call__(self, z) -> float:
        zs = [complex(v) for v in z]
        return float(_eval_mixed(self._terms, zs).real)

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        out = np.zeros(pts.shape[0], dtype=complex)
        conj = pts.conj()
        for (a, b), c in self._terms.items():
            t = np.full(pts.shape[0], complex(c))
            for k in range(self.n):
                if a[k]:
                    t = t * pts[:, k] ** a[k]
                if b[k]:
                    t = t * conj[:, k] ** b[k]
            out += t
        return out.real

    def complex_hessian(self, z) -> np.ndarray:
        """Matrix ``H[alpha, beta] = ∂_alpha ∂_{bar beta} psi`` at z (floats)."""
        zs = [complex(v) for v in z]
        H = np.zeros((self.n, self.n), dtype=complex)
        for al in range(self.n):
            d1 = _diff_terms(self._terms, al, slot=0)
            for be in range(self.n):
                H[al, be] = _eval_mixed(_diff_terms(d1, be, slot=1), zs)
        return H

    def complex_hessian_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        N = pts.shape[0]
        H = np.zeros((N, self.n, self.n), dtype=complex)
        conj = pts.conj()
        for al in range(self.n):
            d1 = _diff_terms(self._terms, al, slot=0)
            for be in range(self.n):
                for (a, b), c in _diff_terms(d1, be, slot=1).items():
                    t = np.full(N, complex(c))
                    for k in range(self.n):
                        if a[k]:
                            t = t * pts[:, k] ** a[k]
                        if b[k]:
                            t = t * conj[:, k] ** b[k]
                    H[:, al, be] += t
        return H

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [
                {"coeff": c.to_json(), "exp": list(a), "conj_exp": list(b)}
                for (a, b), c in sorted(self._terms.items())
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "HermitianPolynomial":
        n = int(obj["n"])
        terms = {}
        for t in obj["terms"]:
            terms[(tuple(t["exp"]), tuple(t["conj_exp"]))] = GaussQ.from_json(t["coeff"])
        return cls(n, terms)


def _diff_terms(terms: dict, alpha: int, slot: int) -> dict:
    out = {}
    for key, c in terms.items():
        e = key[slot]
        k = e[alpha]
        if k == 0:
            continue
        e2 = e[:alpha] + (k - 1,) + e[alpha + 1:]
        nk = (e2, key[1]) if slot == 0 else (key[0], e2)
        out[nk] = out.get(nk, GaussQ()) + c * k
    return out


def _eval_mixed(terms: dict, zs: list) -> complex:
    total = 0j
    for (a, b), c in terms.items():
        t = complex(c)
        for k, zk in enumerate(zs):
            if a[k]:
                t *= zk ** a[k]
            if b[k]:
                t *= zk.conjugate() ** b[k]
        total += t
    return total


def evaluate(q: Polynomial, z):
    """Evaluate q at z: exact GaussQ for exact points, complex otherwise."""
    z = list(z)
    if len(z) != q.n:
        raise ValueError(f"point has dimension {len(z)}, polynomial has n={q.n}")
    exact = all(is_exact(v) for v in z)
    if exact:
        pts = [as_gauss(v) for v in z]
        total = GaussQ()
    else:
        pts = [complex(v) for v in z]
        total = 0j
    cache: dict = {}
    for e, c in q.items():
        t = c if exact else complex(c)
        for k, ek in enumerate(e):
            if ek:
                key = (k, ek)
                if key not in cache:
                    cache[key] = pts[k] ** ek
                t = t * cache[key]
        total = total + t
    return total


def wirtinger(q: Polynomial, alpha: int) -> Polynomial:
    """Holomorphic Wirtinger derivative ``∂/∂z_alpha`` (0-based alpha)."""
    if not 0 <= alpha < q.n:
        raise ValueError(f"variable index {alpha} out of range for n={q.n}")
    out = {}
    for e, c in q.items():
        k = e[alpha]
        if k:
            out[e[:alpha] + (k - 1,) + e[alpha + 1:]] = c * k
    return Polynomial(q.n, out)


# ---------------------------------------------------------------------------
# text form:  term (('+'|'-') term)*
#   term   := [coef '*'] factor ('*' factor)*  |  coef
#   coef   := rational | rational? 'i' | '(' gauss ')'
#   factor := 'z' k ['^' e]

_TOKEN = re.compile(r"\s*(?:(?P<paren>\([^)]*\))|(?P<var>z(?P<vidx>\d+)(?:\^(?P<vexp>\d+))?)|"
                    r"(?P<num>\d+(?:/\d+)?i?|i)|(?P<op>[+\-*]))")


def parse_polynomial(text: str, n: int | None = None) -> Polynomial:
    """Parse the text form, e.g. ``"(1/2+3i) * z1^2 - z2 + 4"``.

    A coefficient with both real and imaginary parts must be parenthesized.
    ``n`` defaults to the largest variable index that appears.
    """
    pos, s = 0, text.strip()
    terms: list[tuple[GaussQ, dict]] = []
    sign = 1
    cur_c: GaussQ | None = None
    cur_v: dict = {}
    expect_operand = True
    maxvar = 0

    def flush():
        nonlocal cur_c, cur_v
        if cur_c is None and not cur_v:
            raise ValueError(f"empty term near column {pos} in {text!r}")
        terms.append(((cur_c if cur_c is not None else GaussQ(1)) * sign, cur_v))
        cur_c, cur_v = None, {}

    if not s:
        raise ValueError("empty polynomial text")
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"unexpected character at column {pos + 1} in {text!r}")
        pos = m.end()
        if m.group("op"):
            op = m.group("op")
            if op == "*":
                if expect_operand:
                    raise ValueError(f"dangling '*' at column {pos} in {text!r}")
                expect_operand = True
                continue
            if expect_operand and cur_c is None and not cur_v:
                sign = -sign if op == "-" else sign
                continue
            if expect_operand:
                raise ValueError(f"operator {op!r} after '*' at column {pos} in {text!r}")
            flush()
            sign = -1 if op == "-" else 1
            expect_operand = True
            continue
        if not expect_operand:
            raise ValueError(f"missing operator before column {m.start() + 1} in {text!r}")
        expect_operand = False
        if m.group("var"):
            k = int(m.group("vidx"))
            if k < 1:
                raise ValueError(f"variables are numbered from z1 (column {m.start() + 1})")
            e = int(m.group("vexp") or 1)
            cur_v[k] = cur_v.get(k, 0) + e
            maxvar = max(maxvar, k)
        else:
            tok = m.group("paren")[1:-1] if m.group("paren") else m.group("num")
            c = GaussQ.parse(tok)
            cur_c = c if cur_c is None else cur_c * c
    if expect_operand:
        raise ValueError(f"polynomial text ends with an operator: {text!r}")
    flush()
    if n is None:
        n = maxvar
    elif maxvar > n:
        raise ValueError(f"variable z{maxvar} exceeds n={n}")
    out: dict = {}
    for c, vs in terms:
        e = tuple(vs.get(k + 1, 0) for k in range(n))
        out[e] = out.get(e, GaussQ()) + c
    return Polynomial(n, out)
