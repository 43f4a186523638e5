"""Skoda triples ``(phi, F, q)`` and the weight data they generate.

A triple is valid when, for every x > 1::

    x + F(x) > 0
    (x + F(x)) phi'(x) + F'(x) + 1 > 0
    (x + F(x)) phi''(x) + F''(x) < 0

Given a triple and the complex degree ``ell`` the twisting data at
``x = 1 - log||g||^2`` are::

    a      = x + F(x)
    b      = (a phi'(x) + F'(x) + 1) / (q a ell) + 1
    lambda = -(1 + F'(x))^2 / (F''(x) + (x + F(x)) phi''(x))
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SkodaTriple",
    "DerivedWeights",
    "ValidationReport",
    "log_triple",
    "exp_triple",
    "combined_triple",
    "custom_triple",
    "validate",
    "derived",
    "validation_grid",
    "cor2_efficiency_bound",
    "cor3_D",
    "cor3_envelope",
    "cor3_constant",
]

Fn = Callable[[np.ndarray], np.ndarray]

DEFAULT_X_MIN = 1 + 1e-6
DEFAULT_X_MAX = 50.0
DEFAULT_POINTS = 10_000
FD_STEP = 1e-5
FD_RTOL = 1e-6


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SkodaTriple:
    """Closed-form ``phi``, ``F`` and their first two derivatives, plus ``q``.

    Functions accept numpy arrays.  ``kind`` is one of log, exp, combined,
    custom; ``params`` records the constants used to build it.
    """

    phi: Fn
    dphi: Fn
    d2phi: Fn
    F: Fn
    dF: Fn
    d2F: Fn
    q: int
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q}")

    def with_q(self, q: int) -> "SkodaTriple":
        return SkodaTriple(self.phi, self.dphi, self.d2phi, self.F, self.dF, self.d2F,
                           q, self.kind, dict(self.params))

    def describe(self) -> dict:
        return {"kind": self.kind, "q": self.q, **self.params}

    def conditions(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values of ``x+F``, ``(x+F)phi'+F'+1`` and ``(x+F)phi''+F''``."""
        x = np.asarray(x, dtype=float)
        a = x + self.F(x)
        return a, a * self.dphi(x) + self.dF(x) + 1.0, a * self.d2phi(x) + self.d2F(x)


def log_triple(eps: float, q: int = 1) -> SkodaTriple:
    """``(eps log x, 0, q)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return SkodaTriple(
        phi=lambda x: eps * np.log(x),
        dphi=lambda x: eps / np.asarray(x, dtype=float),
        d2phi=lambda x: -eps / np.asarray(x, dtype=float) ** 2,
        F=_zero, dF=_zero, d2F=_zero,
        q=q, kind="log", params={"eps": eps},
    )


def exp_triple(eps: float, q: int = 1, eta: float = 0.5) -> SkodaTriple:
    """``(0, -eta exp(-eps (x-1)), q)``; eta = 1/2 is the standard choice."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    e = lambda x: np.exp(-eps * (np.asarray(x, dtype=float) - 1.0))  # noqa: E731
    return SkodaTriple(
        phi=_zero, dphi=_zero, d2phi=_zero,
        F=lambda x: -eta * e(x),
        dF=lambda x: eta * eps * e(x),
        d2F=lambda x: -eta * eps * eps * e(x),
        q=q, kind="exp", params={"eps": eps, "eta": eta},
    )


def combined_triple(eps1: float, eps2: float, eps3: float, q: int = 1) -> SkodaTriple:
    """``(eps1 log x, -eps2 exp(-eps3 (x-1)), q)``."""
    if eps1 < 0 or not 0 <= eps2 < 1 or eps3 <= 0 or eps1 + eps2 <= 0:
        raise ValueError("need eps1 >= 0, 0 <= eps2 < 1, eps3 > 0, eps1 + eps2 > 0")
    e = lambda x: np.exp(-eps3 * (np.asarray(x, dtype=float) - 1.0))  # noqa: E731
    return SkodaTriple(
        phi=lambda x: eps1 * np.log(x),
        dphi=lambda x: eps1 / np.asarray(x, dtype=float),
        d2phi=lambda x: -eps1 / np.asarray(x, dtype=float) ** 2,
        F=lambda x: -eps2 * e(x),
        dF=lambda x: eps2 * eps3 * e(x),
        d2F=lambda x: -eps2 * eps3 * eps3 * e(x),
        q=q, kind="combined", params={"eps1": eps1, "eps2": eps2, "eps3": eps3},
    )


def custom_triple(phi: str, F: str, q: int = 1, **constants) -> SkodaTriple:
    """Triple from expression strings in ``x`` (sympy syntax).

    Derivatives are taken symbolically, e.g.
    ``custom_triple("0", "-exp(eps*(x-1))/2", eps=1)``.
    """
    import sympy as sp

    x = sp.Symbol("x", positive=True)
    syms = {"x": x, **{k: sp.Symbol(k) for k in constants}}
    try:
        exprs = [sp.sympify(t, locals=syms) for t in (phi, F)]
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse triple expression: {exc}") from exc
    subs = {syms[k]: v for k, v in constants.items()}
    fns = []
    for ex in exprs:
        ex = ex.subs(subs)
        free = ex.free_symbols - {x}
        if free:
            raise ValueError(f"unbound symbols {sorted(map(str, free))} in {ex}")
        for k in range(3):
            f = sp.lambdify(x, sp.diff(ex, x, k), "numpy")
            fns.append(lambda t, f=f: np.broadcast_to(np.asarray(f(np.asarray(t, dtype=float)), dtype=float),
                                                       np.shape(t)).astype(float))
    return SkodaTriple(*fns, q=q, kind="custom", params={"phi": phi, "F": F, **constants})


@dataclass(frozen=True)
class DerivedWeights:
    x: np.ndarray
    ell: int
    a: np.ndarray
    b: np.ndarray
    lam: np.ndarray

    @property
    def xi(self):
        return self.x

    @property
    def a_plus_lambda(self):
        return self.a + self.lam

    @property
    def efficiency(self):
        """``b / (a (b - 1))``."""
        return self.b / (self.a * (self.b - 1.0))

    def rows(self):
        cols = [np.atleast_1d(v) for v in (self.x, self.a, self.b, self.lam, self.a_plus_lambda, self.efficiency)]
        return list(zip(*cols))


def derived(t: SkodaTriple, ell: int, x) -> DerivedWeights:
    """Twisting data a, b, lambda at x (scalar or array, x > 1)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 1):
        raise ValueError("derived weights need x > 1")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    a, first, second = t.conditions(x)
    if np.any(second == 0):
        raise ZeroDivisionError("(x+F)phi'' + F'' vanishes: triple invalid there")
    lam = -(1.0 + t.dF(x)) ** 2 / second
    b = first / (t.q * a * ell) + 1.0
    return DerivedWeights(x=x, ell=ell, a=a, b=b, lam=lam)


def validation_grid(x_min: float = DEFAULT_X_MIN, x_max: float = DEFAULT_X_MAX,
                    points: int = DEFAULT_POINTS) -> np.ndarray:
    """Points with ``x - 1`` log-spaced, so the grid is dense near x = 1."""
    if not 1 < x_min < x_max:
        raise ValueError("need 1 < x_min < x_max")
    if points < 2:
        raise ValueError("need at least 2 grid points")
    return 1.0 + np.geomspace(x_min - 1.0, x_max - 1.0, points)


@dataclass
class ValidationReport:
    valid: bool
    points: int
    x_min: float
    x_max: float
    first_violation: dict | None = None
    derivative_errors: dict = field(default_factory=dict)
    derivatives_ok: bool = True

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "points": self.points,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "first_violation": self.first_violation,
            "derivative_errors": self.derivative_errors,
            "derivatives_ok": self.derivatives_ok,
        }


def _fd_error(f: Fn, df: Fn, x: np.ndarray, h: float) -> float:
    fd = (f(x + h) - f(x - h)) / (2 * h)
    exact = df(x)
    # relative error, with the scale floored so vanishing derivatives compare absolutely
    err = np.abs(fd - exact) / np.maximum(np.abs(exact), 1e-6)
    return float(np.max(err))


def validate(t: SkodaTriple, x_min: float = DEFAULT_X_MIN, x_max: float = DEFAULT_X_MAX,
             grid_points: int = DEFAULT_POINTS) -> ValidationReport:
    """Check the three defining inequalities on a grid and cross-check derivatives.

    Second derivatives are compared with central differences of the supplied
    first derivatives; differencing the function twice at step 1e-5 loses
    too many digits to meet the tolerance.
    """
    x = validation_grid(x_min, x_max, grid_points)
    with np.errstate(all="ignore"):
        c1, c2, c3 = t.conditions(x)
    ok = np.isfinite(c1) & np.isfinite(c2) & np.isfinite(c3) & (c1 > 0) & (c2 > 0) & (c3 < 0)
    report = ValidationReport(valid=bool(ok.all()), points=grid_points, x_min=x_min, x_max=x_max)
    if not ok.all():
        k = int(np.flatnonzero(~ok)[0])
        failed = [name for name, good in (("x+F>0", c1[k] > 0), ("(x+F)phi'+F'+1>0", c2[k] > 0),
                                          ("(x+F)phi''+F''<0", c3[k] < 0)) if not good]
        report.first_violation = {
            "x": float(x[k]),
            "conditions": failed,
            "values": [float(c1[k]), float(c2[k]), float(c3[k])],
        }
    h = FD_STEP
    xs = x[x - h > 1.0]
    with np.errstate(all="ignore"):
        errs = {
            "dphi": _fd_error(t.phi, t.dphi, xs, h),
            "d2phi": _fd_error(t.dphi, t.d2phi, xs, h),
            "dF": _fd_error(t.F, t.dF, xs, h),
            "d2F": _fd_error(t.dF, t.d2F, xs, h),
        }
    report.derivative_errors = errs
    report.derivatives_ok = all(np.isfinite(v) and v < FD_RTOL for v in errs.values())
    return report


# closed forms attached to the two standard triples

def cor2_efficiency_bound(eps: float, q: int, ell: int) -> float:
    """Upper bound ``(q ell + eps + 1) / (eps + 1)`` of b/(a(b-1)) for the log triple."""
    return (q * ell + eps + 1.0) / (eps + 1.0)


def cor2_constant(eps: float, q: int, ell: int) -> float:
    """``(q ell + eps + 1) / eps``: solution-side constant for the log triple."""
    return (q * ell + eps + 1.0) / eps


def cor3_D(eps: float) -> float:
    """``D_eps = exp(eps - 1)/eps + 2 (1/eps + 1/2)^2``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return math.exp(eps - 1.0) / eps + 2.0 * (1.0 / eps + 0.5) ** 2


def cor3_envelope(eps: float, x):
    """``D_eps exp(eps (x - 1))``, an upper bound for a + lambda of the exp triple."""
    return cor3_D(eps) * np.exp(eps * (np.asarray(x, dtype=float) - 1.0))


def cor3_constant(eps: float, q: int, ell: int) -> float:
    """``C_eps = (2 + q ell) D_eps``."""
    return (2.0 + q * ell) * cor3_D(eps)


def make_triple(kind: str, q: int = 1, eps: float | None = None, eps1: float | None = None,
                eps2: float | None = None, eps3: float | None = None, eta: float = 0.5) -> SkodaTriple:
    if kind == "log":
        return log_triple(1.0 if eps is None else eps, q)
    if kind == "exp":
        return exp_triple(1.0 if eps is None else eps, q, eta)
    if kind == "combined":
        return combined_triple(
            1.0 if eps1 is None else eps1, 0.5 if eps2 is None else eps2, 1.0 if eps3 is None else eps3, q
        )
    raise ValueError(f"unknown triple kind {kind!r}")
