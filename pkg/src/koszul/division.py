"""Division witnesses for ``ι_g u = f``.

Three routes:

* :func:`pointwise_solution` evaluates the smooth minimal solution
  ``ḡ∧f / ||g||^2`` at a point;
* :func:`solve` finds a polynomial ``u`` with ``ι_g u = f`` exactly, by
  fraction-free elimination over the Gaussian integers;
* :func:`minimal_weighted_witness` moves inside the affine solution space
  at a fixed cap to minimise a sampled weighted norm.

:func:`verify_estimate` then compares both sides of an L² bound by Monte
Carlo with shared samples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .curvature import WeightSystem, ZeroOfG, psi_from_json
from .exterior import KoszulElement, contract, multi_indices, wedge_conj
from .lemma1 import q_constant
from .polyalg import GaussQ, HermitianPolynomial, Polynomial
from .quadrature import DEFAULT_CUTOFF, Domain, IntegralEstimate, integrate, sample_many
from .triples import cor2_constant, cor3_constant, make_triple

__all__ = [
    "DivisionProblem",
    "DivisionWitness",
    "NoSolutionAtCap",
    "PreconditionError",
    "DivergenceEvidence",
    "EstimateReport",
    "pointwise_solution",
    "solve",
    "minimal_weighted_witness",
    "solution_weight",
    "sampled_weighted_norm",
    "verify_estimate",
    "weight_from_json",
    "MAX_UNKNOWNS",
]

MAX_UNKNOWNS = 10**6
SATISFIED, VIOLATED, INCONCLUSIVE = "SATISFIED", "VIOLATED", "INCONCLUSIVE"
MAX_REJECTED_FRACTION = 0.01
PRECHECK_SAMPLES = 10_000
ANSATZ_SIGMAS = 5.0
SATISFIED_SIGMAS = 3.0


class NoSolutionAtCap(Exception):
    def __init__(self, cap: int, detail: str = ""):
        self.cap = cap
        super().__init__(f"no solution with exponents <= {cap}" + (f": {detail}" if detail else ""))


class PreconditionError(ValueError):
    pass


class DivergenceEvidence(RuntimeError):
    def __init__(self, message: str, estimate: IntegralEstimate):
        self.estimate = estimate
        super().__init__(message)


def weight_from_json(obj: dict | None, q: int, ell: int, n: int) -> WeightSystem | None:
    """``{"mode": "t1", "tau": 2, ["lam"], ["psi"]}`` or ``{"mode": "triple", "kind": ..., ...}``."""
    if obj is None:
        return None
    psi = psi_from_json(obj.get("psi"), n)
    mode = obj.get("mode")
    if mode == "t1":
        if "tau" not in obj:
            raise ValueError("weight.tau is required for mode t1")
        return WeightSystem.theorem1(float(obj["tau"]), q, ell, obj.get("lam"), psi)
    if mode == "triple":
        if q < 1:
            raise ValueError("triple weights need q >= 1")
        kw = {k: float(obj[k]) for k in ("eps", "eps1", "eps2", "eps3", "eta") if k in obj}
        return WeightSystem.theorem2(make_triple(obj.get("kind", "log"), q=q, **kw), ell, psi)
    raise ValueError(f"weight.mode must be 't1' or 'triple', got {mode!r}")


@dataclass
class DivisionProblem:
    """Data ``(g, f, ell)`` with ``ι_g f = 0``, plus optional weight and domain."""

    g: list
    f: KoszulElement
    ell: int
    weight: WeightSystem | None = None
    domain: Domain | None = None
    weight_spec: dict | None = None

    def __post_init__(self):
        self.g = [gi if isinstance(gi, Polynomial) else Polynomial.constant(self.n_hint(), gi)
                  for gi in self.g]
        p = len(self.g)
        if p < 1:
            raise ValueError("g must have at least one component")
        ns = {gi.n for gi in self.g}
        if len(ns) != 1:
            raise ValueError(f"components of g live in different dimensions {sorted(ns)}")
        if not 1 <= self.ell <= p:
            raise ValueError(f"need 1 <= ell <= p = {p}")
        if self.f.p != p or self.f.degree != self.ell - 1:
            raise ValueError(f"f must have p={p} and degree {self.ell - 1}")
        self.f = self.f.map(lambda c: c if isinstance(c, Polynomial) else Polynomial.constant(self.n, c))
        for c in self.f.coeffs.values():
            if c.n != self.n:
                raise ValueError("f and g live in different dimensions")
        if self.ell >= 2 and not contract(self.g, self.f).is_zero():
            raise ValueError("f is not in the kernel of the contraction by g")
        if self.domain is not None and self.domain.n != self.n:
            raise ValueError("domain dimension differs from g")

    def n_hint(self) -> int:
        for gi in self.g:
            if isinstance(gi, Polynomial):
                return gi.n
        for c in self.f.coeffs.values():
            if isinstance(c, Polynomial):
                return c.n
        if self.domain is not None:
            return self.domain.n
        raise ValueError("cannot infer n: give at least one polynomial")

    @property
    def p(self) -> int:
        return len(self.g)

    @property
    def n(self) -> int:
        return self.g[0].n

    @property
    def q(self) -> int:
        return q_constant(self.p, self.n, self.ell)

    def to_json(self) -> dict:
        out = {"g": [gi.to_json() for gi in self.g], "f": self.f.to_json(), "ell": self.ell}
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        if self.weight_spec is not None:
            out["weight"] = self.weight_spec
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DivisionProblem":
        for k in ("g", "f", "ell"):
            if k not in obj:
                raise ValueError(f"problem JSON missing field {k!r}")
        g = []
        for i, gj in enumerate(obj["g"]):
            try:
                g.append(Polynomial.from_json(gj))
            except ValueError as exc:
                raise ValueError(f"g[{i}]: {exc}") from exc
        if not g:
            raise ValueError("g is empty")
        try:
            f = KoszulElement.from_json(obj["f"], n=g[0].n)
        except ValueError as exc:
            raise ValueError(f"f: {exc}") from exc
        ell = int(obj["ell"])
        domain = Domain.from_json(obj["domain"]) if obj.get("domain") is not None else None
        spec = obj.get("weight")
        weight = None
        if spec is not None:
            try:
                weight = weight_from_json(spec, q_constant(len(g), g[0].n, ell), ell, g[0].n)
            except ValueError as exc:
                raise ValueError(f"weight: {exc}") from exc
        return cls(g, f, ell, weight, domain, spec)


@dataclass
class DivisionWitness:
    u: KoszulElement
    residual: KoszulElement
    cap: int
    minimal: bool = False
    free_dim: int | None = None
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()

    def to_json(self) -> dict:
        out = {"u": self.u.to_json(), "residual": self.residual.to_json(), "cap": self.cap,
               "minimal": self.minimal}
        if self.free_dim is not None:
            out["free_dim"] = self.free_dim
        if self.info:
            out["info"] = self.info
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DivisionWitness":
        if "u" not in obj:
            raise ValueError("witness JSON missing field 'u'")
        u = KoszulElement.from_json(obj["u"])
        if "residual" in obj:
            res = KoszulElement.from_json(obj["residual"])
        else:
            res = KoszulElement(u.p, max(u.degree - 1, 0))
        return cls(u, res, int(obj.get("cap", -1)), bool(obj.get("minimal", False)),
                   obj.get("free_dim"), obj.get("info", {}))


def residual_of(g, u: KoszulElement, f: KoszulElement) -> KoszulElement:
    return contract(g, u) - f


# ---------------------------------------------------------------------------
# pointwise minimal solution

def pointwise_solution(g, f: KoszulElement, z) -> KoszulElement:
    """``(ḡ∧f)(z) / ||g(z)||^2`` as complex scalars."""
    if f.degree >= 1 and not contract(g, f).is_zero():
        raise ValueError("f is not in the kernel of the contraction by g")
    gv = [complex(gi(z)) if isinstance(gi, Polynomial) else complex(gi) for gi in g]
    S = sum(abs(x) ** 2 for x in gv)
    if S == 0:
        raise ZeroOfG(f"g vanishes at {list(z)}")
    fz = f.map(lambda c: complex(c(z)) if isinstance(c, Polynomial) else complex(c))
    return wedge_conj(gv, fz) / S


# ---------------------------------------------------------------------------
# exact elimination over Gaussian integers

def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _content(row: dict) -> int:
    g = 0
    for a, b in row.values():
        g = math.gcd(g, math.gcd(a, b))
        if g == 1:
            break
    return g


def _normalize(row: dict) -> dict:
    g = _content(row)
    if g > 1:
        return {c: (a // g, b // g) for c, (a, b) in row.items()}
    return row


def _integerize(row: dict) -> dict:
    # scale a GaussQ row to Gaussian integers
    den = 1
    for v in row.values():
        den = math.lcm(den, v.re.denominator, v.im.denominator)
    out = {}
    for c, v in row.items():
        out[c] = (int(v.re * den), int(v.im * den))
    return _normalize(out)


class _Echelon:
    """Row-echelon form built row by row; pivots are leading columns.

    The pivot column set equals the greedy left-to-right set of independent
    columns, i.e. the lexicographically smallest one, whatever the row order.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols          # column ncols is the right-hand side
        self.pivots: dict[int, dict] = {}
        self.inconsistent = False

    def add(self, row: dict):
        row = {c: v for c, v in row.items() if v != (0, 0)}
        while row:
            lead = min(row)
            if lead == self.ncols:
                self.inconsistent = True
                return
            prow = self.pivots.get(lead)
            if prow is None:
                self.pivots[lead] = _normalize(row)
                return
            pv, rv = prow[lead], row[lead]
            new = {c: _gmul(pv, v) for c, v in row.items()}
            for c, v in prow.items():
                w = _gmul(rv, v)
                a, b = new.get(c, (0, 0))
                a, b = a - w[0], b - w[1]
                if a or b:
                    new[c] = (a, b)
                else:
                    new.pop(c, None)
            row = _normalize(new)

    def back_substitute(self, free: dict[int, GaussQ] | None = None,
                        homogeneous: bool = False) -> dict[int, GaussQ]:
        """Solution with free columns at the given values (default 0)."""
        x: dict[int, GaussQ] = dict(free or {})
        for c in sorted(self.pivots, reverse=True):
            row = self.pivots[c]
            acc = GaussQ()
            if not homogeneous and self.ncols in row:
                acc = GaussQ(*row[self.ncols])
            for j, v in row.items():
                if j == c or j == self.ncols:
                    continue
                xj = x.get(j)
                if xj:
                    acc = acc - GaussQ(*v) * xj
            if acc:
                x[c] = acc / GaussQ(*row[c])
        return {c: v for c, v in x.items() if v}


@dataclass
class _System:
    problem: DivisionProblem
    cap: int
    keys: list
    monos: list
    echelon: _Echelon

    @property
    def nunknowns(self) -> int:
        return len(self.keys) * len(self.monos)

    def free_columns(self) -> list[int]:
        return [c for c in range(self.nunknowns) if c not in self.echelon.pivots]

    def to_element(self, x: dict[int, GaussQ]) -> KoszulElement:
        M = len(self.monos)
        comps: dict = {}
        for c, v in x.items():
            k, m = divmod(c, M)
            comps.setdefault(self.keys[k], {})[self.monos[m]] = v
        n = self.problem.n
        return KoszulElement(self.problem.p, self.problem.ell,
                             {k: Polynomial(n, t) for k, t in comps.items()})

    def particular(self) -> KoszulElement:
        return self.to_element(self.echelon.back_substitute())

    def nullspace(self) -> list[KoszulElement]:
        return [self.to_element(self.echelon.back_substitute({c: GaussQ(1)}, homogeneous=True))
                for c in self.free_columns()]


def _build_system(problem: DivisionProblem, cap: int) -> _System:
    if cap < 0:
        raise ValueError("degree cap must be nonnegative")
    p, n, ell = problem.p, problem.n, problem.ell
    keys = multi_indices(p, ell)
    nmono = (cap + 1) ** n
    if len(keys) * nmono > MAX_UNKNOWNS:
        raise ValueError(f"{len(keys) * nmono} unknowns exceed the limit of {MAX_UNKNOWNS}")
    monos = list(itertools.product(range(cap + 1), repeat=n))
    N = len(keys) * nmono
    rows: dict[tuple, dict] = {}
    gterms = [list(gi.items()) for gi in problem.g]
    for ki, K in enumerate(keys):
        for s, i in enumerate(K):
            J = K[:s] + K[s + 1:]
            sign = -1 if s % 2 else 1
            for mi, m in enumerate(monos):
                col = ki * nmono + mi
                for e, c in gterms[i - 1]:
                    r = rows.setdefault((J, tuple(a + b for a, b in zip(e, m))), {})
                    v = c if sign > 0 else -c
                    r[col] = r[col] + v if col in r else v
    for J, fj in problem.f.items():
        for e, c in fj.items():
            rows.setdefault((J, e), {})[N] = c
    ech = _Echelon(N)
    for rk in sorted(rows):
        ech.add(_integerize({c: v for c, v in rows[rk].items() if v}))
        if ech.inconsistent:
            break
    return _System(problem, cap, keys, monos, ech)


def solve(problem: DivisionProblem, degree_cap: int) -> DivisionWitness:
    """Polynomial ``u`` with every exponent at most ``degree_cap`` and ``ι_g u = f``.

    Free unknowns are set to zero (pivot-basic solution).  Raises
    :class:`NoSolutionAtCap` when the system is inconsistent.
    """
    sysm = _build_system(problem, degree_cap)
    if sysm.echelon.inconsistent:
        raise NoSolutionAtCap(degree_cap)
    u = sysm.particular()
    res = residual_of(problem.g, u, problem.f)
    if not res.is_zero():  # pragma: no cover - would mean an elimination bug
        raise ArithmeticError("exact solve produced a nonzero residual")
    return DivisionWitness(u, res, degree_cap, free_dim=len(sysm.free_columns()),
                           info={"unknowns": sysm.nunknowns, "rank": len(sysm.echelon.pivots)})


# ---------------------------------------------------------------------------
# weights and the sampled minimiser

def _g_values(g, points: np.ndarray) -> np.ndarray:
    return np.array([gi.eval_many(points) for gi in g])


def _element_norm_sq(el: KoszulElement, points: np.ndarray) -> np.ndarray:
    out = np.zeros(points.shape[0])
    for v in el.eval_many(points).values():
        out += np.abs(v) ** 2
    return out


def _psi_values(psi: HermitianPolynomial | None, points: np.ndarray) -> np.ndarray:
    if psi is None:
        return np.zeros(points.shape[0])
    return np.asarray(psi.eval_many(points), dtype=float)


def solution_weight(problem: DivisionProblem, points: np.ndarray,
                    weight: WeightSystem | None = None) -> np.ndarray:
    """Solution-side weight of the theorem attached to ``weight`` (default: problem's).

    theorem1: ``||g||^{-2 q ell tau} e^{-psi}``;
    theorem2: ``e^{phi(xi) - psi} / ((a + lambda) ||g||^{2 q ell})``.
    No weight means 1.
    """
    w = problem.weight if weight is None else weight
    pts = np.asarray(points, dtype=complex)
    if w is None:
        return np.ones(pts.shape[0])
    S = np.sum(np.abs(_g_values(problem.g, pts)) ** 2, axis=0)
    psi = _psi_values(w.psi, pts)
    ql = w.q * w.ell
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if w.mode == "theorem1":
            return S ** (-ql * w.tau) * np.exp(-psi)
        xi = 1.0 - np.log(S)
        t = w.triple
        a, _, second = t.conditions(xi)
        lam = -(1.0 + t.dF(xi)) ** 2 / second
        return np.exp(t.phi(xi) - psi) / ((a + lam) * S ** ql)


def sampled_weighted_norm(u: KoszulElement, points: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(weights * _element_norm_sq(u, points)))


def _symmetrized(points: np.ndarray, symmetries) -> np.ndarray:
    if not symmetries:
        return points
    blocks = [points] + [points[:, list(perm)] for perm in symmetries]
    return np.concatenate(blocks, axis=0)


def _exact(x: complex) -> GaussQ:
    return GaussQ(Fraction(float(x.real)), Fraction(float(x.imag)))


def minimal_weighted_witness(problem: DivisionProblem, degree_cap: int, samples: int, seed: int,
                             weight: Callable | None = None,
                             symmetries: Sequence[Sequence[int]] | None = None) -> DivisionWitness:
    """Witness minimising ``sum_s w(z_s) ||u(z_s)||^2`` over the affine solution space.

    Samples come from ``problem.domain``.  ``weight`` maps points to weights
    and defaults to :func:`solution_weight`.  ``symmetries`` lists coordinate
    permutations; every sample is joined by its images so the sample set is
    invariant under them.  The optimal parameters are converted to exact
    binary fractions, so the returned witness still has zero residual.
    """
    sysm = _build_system(problem, degree_cap)
    if sysm.echelon.inconsistent:
        raise NoSolutionAtCap(degree_cap)
    u0 = sysm.particular()
    basis = sysm.nullspace()
    if not basis:
        res = residual_of(problem.g, u0, problem.f)
        return DivisionWitness(u0, res, degree_cap, minimal=True, free_dim=0)
    if problem.domain is None:
        raise ValueError("minimal_weighted_witness needs a domain to sample")
    rng = np.random.default_rng(seed)
    pts = _symmetrized(sample_many(problem.domain, rng, samples), symmetries)
    w = weight(pts) if weight is not None else solution_weight(problem, pts)
    w = np.asarray(w, dtype=float)
    keep = np.isfinite(w) & (w >= 0)
    pts, w = pts[keep], w[keep]
    if pts.shape[0] == 0:
        raise ValueError("weight is non-finite at every sample")
    sw = np.sqrt(w)
    keys = multi_indices(problem.p, problem.ell)
    v0 = u0.eval_many(pts)
    vb = [b.eval_many(pts) for b in basis]
    zero = np.zeros(pts.shape[0], dtype=complex)
    A = np.concatenate([np.stack([sw * vk.get(k, zero) for vk in vb], axis=1) for k in keys])
    rhs = np.concatenate([-sw * v0.get(k, zero) for k in keys])
    t, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    u = u0
    for tk, b in zip(t, basis):
        c = _exact(complex(tk))
        if c:
            u = u + b.map(lambda poly, c=c: poly * c)
    res = residual_of(problem.g, u, problem.f)
    before = sampled_weighted_norm(u0, pts, w)
    after = sampled_weighted_norm(u, pts, w)
    return DivisionWitness(u, res, degree_cap, minimal=True, free_dim=len(basis),
                           info={"samples": int(pts.shape[0]), "seed": seed,
                                 "weighted_norm_basic": before, "weighted_norm": after})


# ---------------------------------------------------------------------------
# L² estimate verification

@dataclass
class EstimateReport:
    theorem: str
    parameter: float
    q: int
    constant: float
    lhs: IntegralEstimate
    rhs: IntegralEstimate
    diff: IntegralEstimate
    verdict: str
    flags: list = field(default_factory=list)
    precondition: dict = field(default_factory=dict)

    @property
    def rhs_scaled(self) -> float:
        return self.constant * self.rhs.mean

    @property
    def ratio(self) -> float:
        if self.rhs_scaled == 0:
            return 0.0 if self.lhs.mean == 0 else math.inf
        return self.lhs.mean / self.rhs_scaled

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.lhs.stderr, self.constant * self.rhs.stderr)

    def to_json(self) -> dict:
        return {"theorem": self.theorem, "parameter": self.parameter, "q": self.q,
                "constant": self.constant, "lhs": self.lhs.to_json(), "rhs": self.rhs.to_json(),
                "rhs_scaled": self.rhs_scaled, "ratio": self.ratio,
                "diff": self.diff.to_json(), "combined_stderr": self.combined_stderr,
                "verdict": self.verdict, "flags": list(self.flags),
                "precondition": self.precondition}


def _theorem_setup(theorem: str, param: float, q: int, ell: int):
    ql = q * ell
    if theorem == "t1":
        tau = param
        if tau <= 1:
            raise ValueError("tau must exceed 1")

        def lw(S, psi):
            return S ** (-ql * tau) * np.exp(-psi)

        def rw(S, psi):
            return S ** (-(ql * tau + 1)) * np.exp(-psi)

        return lw, rw, tau / (tau - 1)
    if param <= 0:
        raise ValueError("eps must be positive")
    eps = param
    if theorem == "cor2":
        def lw(S, psi):
            return (1 - np.log(S)) ** (eps - 1) * S ** (-ql) * np.exp(-psi)

        def rw(S, psi):
            return (1 - np.log(S)) ** eps * S ** (-(ql + 1)) * np.exp(-psi)

        return lw, rw, cor2_constant(eps, q, ell)
    if theorem == "cor3":
        def lw(S, psi):
            return S ** (eps - ql) * np.exp(-psi)

        def rw(S, psi):
            return S ** (-(ql + 1)) * np.exp(-psi)

        return lw, rw, cor3_constant(eps, q, ell)
    raise ValueError(f"theorem must be t1, cor2 or cor3, got {theorem!r}")


def _check_unit_bound(problem: DivisionProblem, seed: int) -> dict:
    d = problem.domain
    rng = np.random.default_rng([seed, 2**32 - 1])
    pts = np.concatenate([np.asarray(d.center)[None, :], sample_many(d, rng, PRECHECK_SAMPLES)])
    S = np.sum(np.abs(_g_values(problem.g, pts)) ** 2, axis=0)
    k = int(np.argmax(S))
    info = {"max_norm_g_sq": float(S[k]), "points_checked": int(pts.shape[0]),
            "argmax": [[float(c.real), float(c.imag)] for c in pts[k]]}
    if S[k] >= 1.0:
        raise PreconditionError(
            f"||g|| < 1 fails on the domain: ||g||^2 = {S[k]:.6g} at {info['argmax']}")
    return info


def verify_estimate(problem: DivisionProblem, witness: DivisionWitness, theorem: str,
                    samples: int, seed: int, tau: float | None = None, eps: float | None = None,
                    workers: int = 1, cutoff: float = DEFAULT_CUTOFF) -> EstimateReport:
    """Monte Carlo comparison of the solution side against constant times the data side.

    Both integrals and their paired difference use the same samples.
    ``SATISFIED`` needs the difference below zero by 3 standard errors;
    ``VIOLATED`` only when the witness does not solve ``ι_g u = f``;
    anything else is ``INCONCLUSIVE``.
    """
    if problem.domain is None:
        raise ValueError("problem has no domain")
    psi = problem.weight.psi if problem.weight is not None else None
    if theorem == "t1":
        if tau is None:
            if problem.weight is None or problem.weight.mode != "theorem1":
                raise ValueError("theorem t1 needs tau")
            tau = problem.weight.tau
        param = float(tau)
    else:
        if eps is None:
            spec = problem.weight_spec or {}
            if "eps" not in spec:
                raise ValueError(f"theorem {theorem} needs eps")
            eps = spec["eps"]
        param = float(eps)
    q = problem.q
    lw, rw, const = _theorem_setup(theorem, param, q, problem.ell)
    pre = {}
    if theorem in ("cor2", "cor3"):
        pre = _check_unit_bound(problem, seed)
    residual = residual_of(problem.g, witness.u, problem.f)
    g, f, u = problem.g, problem.f, witness.u

    def integrand(pts):
        S = np.sum(np.abs(_g_values(g, pts)) ** 2, axis=0)
        ps = _psi_values(psi, pts)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            left = _element_norm_sq(u, pts) * lw(S, ps)
            right = _element_norm_sq(f, pts) * rw(S, ps)
        return np.stack([left, right, left - const * right], axis=1)

    def norm_g_sq(pts):
        return np.sum(np.abs(_g_values(g, pts)) ** 2, axis=0)

    lhs, rhs, diff = integrate(integrand, problem.domain, samples, seed, cutoff=cutoff,
                               norm_g_sq=norm_g_sq, workers=workers)
    if rhs.rejected_fraction > MAX_REJECTED_FRACTION:
        raise DivergenceEvidence(
            f"{rhs.rejected_fraction:.2%} of samples rejected near zeros of g "
            f"(max integrand {rhs.max:.3g}); the data-side integral may diverge", rhs)
    flags = []
    if not residual.is_zero():
        verdict = VIOLATED
        flags.append("witness does not solve the division problem")
    elif diff.mean + SATISFIED_SIGMAS * diff.stderr <= 0:
        verdict = SATISFIED
    else:
        verdict = INCONCLUSIVE
        report_sigma = math.hypot(lhs.stderr, const * rhs.stderr)
        if witness.minimal and diff.mean > ANSATZ_SIGMAS * report_sigma:
            flags.append("bound not achieved within ansatz")
    return EstimateReport(theorem, param, q, const, lhs, rhs, diff, verdict, flags, pre)
