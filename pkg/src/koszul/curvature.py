"""Pointwise complex Hessians and the twist condition.

All Hessians of composite weights are assembled with the scalar chain rule
from exact Wirtinger derivatives of ``g``; nothing here differentiates a
composite numerically.  The twist condition at a point reads::

    M = a ∂∂̄phi1 - ∂∂̄a - (1/lambda) ∂a ⊗ ∂̄a - q ell a b ∂∂̄log||g||^2  >= 0

as a Hermitian form, and its margin is the smallest eigenvalue of M.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exterior import sort_with_sign
from .polyalg import HermitianPolynomial
from .triples import SkodaTriple

__all__ = [
    "MIN_NORM_SQ",
    "GMap",
    "WeightSystem",
    "jacobi_eigvalsh",
    "is_hermitian",
    "hessian_log_g",
    "condition15",
    "condition15_margin",
    "lagrange_identity_check",
    "hessian_form",
]

MIN_NORM_SQ = 1e-14
JACOBI_TOL = 1e-12


class ZeroOfG(ValueError):
    """Evaluation requested at (or numerically at) a common zero of g."""


def jacobi_eigvalsh(H: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius mass is below
    ``tol * ||H||_F``.  Returned in ascending order.
    """
    A = np.array(H, dtype=complex, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    A = 0.5 * (A + A.conj().T)
    total = np.linalg.norm(A)
    if n == 1 or total == 0:
        return np.sort(np.real(np.diag(A)))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(A) ** 2 - np.sum(np.abs(np.diag(A)) ** 2), 0.0))
        if off <= tol * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # theta^2 would overflow; same limit
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(phase)) composed with the real rotation
                gp = A[:, p].copy()
                gq = A[:, q].copy()
                A[:, p] = c * gp - s * np.conj(phase) * gq
                A[:, q] = s * gp + c * np.conj(phase) * gq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * phase * rq
                A[q, :] = s * rp + c * phase * rq
                A[p, q] = 0.0
                A[q, p] = 0.0
    return np.sort(np.real(np.diag(A)))


def is_hermitian(H: np.ndarray, rtol: float = 1e-12) -> bool:
    H = np.asarray(H)
    scale = max(np.linalg.norm(H), 1e-300)
    return bool(np.linalg.norm(H - H.conj().T) <= rtol * scale)


class GMap:
    """A tuple of p polynomials in n variables with cached Wirtinger derivatives."""

    def __init__(self, g):
        g = list(g)
        if not g:
            raise ValueError("g must be nonempty")
        n = g[0].n
        if any(gi.n != n for gi in g):
            raise ValueError("all components of g must share n")
        self.g = g
        self.p = len(g)
        self.n = n
        self.dg = [[gi.wirtinger(al) for al in range(n)] for gi in g]

    def values(self, z) -> tuple[np.ndarray, np.ndarray]:
        """``g(z)`` shape (p,) and ``dg[k, alpha] = ∂_alpha g_k (z)`` shape (p, n)."""
        z = [complex(v) for v in z]
        if len(z) != self.n:
            raise ValueError(f"point has dimension {len(z)}, expected {self.n}")
        gv = np.array([complex(gi(z)) for gi in self.g])
        dgv = np.array([[complex(d(z)) for d in row] for row in self.dg])
        return gv, dgv

    def values_many(self, points) -> tuple[np.ndarray, np.ndarray]:
        pts = np.asarray(points, dtype=complex)
        gv = np.stack([gi.eval_many(pts) for gi in self.g], axis=1)
        dgv = np.stack([np.stack([d.eval_many(pts) for d in row], axis=1) for row in self.dg], axis=1)
        return gv, dgv

    def norm_sq_many(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=complex)
        return sum(np.abs(gi.eval_many(pts)) ** 2 for gi in self.g)


def _log_g_pieces(gv, dgv):
    """``||g||^2``, ``∂_alpha log||g||^2`` and the complex Hessian of log||g||^2."""
    S = float(np.sum(np.abs(gv) ** 2))
    if S < MIN_NORM_SQ:
        raise ZeroOfG(f"||g||^2 = {S:.3e} below {MIN_NORM_SQ:g}")
    s = gv.conj() @ dgv  # s_alpha = sum_k conj(g_k) ∂_alpha g_k
    grad = s / S
    H = (dgv.T @ dgv.conj()) / S - np.outer(s, s.conj()) / S ** 2
    return S, grad, H


def hessian_log_g(g, z) -> np.ndarray:
    """``H[alpha, beta] = ∂_alpha ∂_{bar beta} log||g||^2`` at z."""
    gm = g if isinstance(g, GMap) else GMap(g)
    gv, dgv = gm.values(z)
    return _log_g_pieces(gv, dgv)[2]


@dataclass(frozen=True)
class WeightSystem:
    """Weights phi1, phi2, a, b, lambda for either division theorem.

    ``theorem1``: constant twist ``a = 1 - lam``, ``b = tau (1 - lam)``,
    ``phi1 = q ell tau log||g||^2 + psi``.
    ``theorem2``: twist from a Skoda triple at ``xi = 1 - log||g||^2``,
    ``phi1 = -phi(xi) + psi + q ell log||g||^2``.
    In both, ``phi2 = phi1 + log||g||^2``.
    """

    mode: str
    ell: int
    q: int
    psi: HermitianPolynomial | None = None
    tau: float | None = None
    lam: float | None = None
    triple: SkodaTriple | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def theorem1(cls, tau: float, q: int, ell: int, lam: float | None = None,
                 psi: HermitianPolynomial | None = None, strict: bool = True) -> "WeightSystem":
        """``strict=False`` admits the boundary b = 1 (the margin formula still applies)."""
        if tau <= 1:
            raise ValueError("tau must exceed 1")
        if lam is None:
            lam = 0.5 * (1.0 - 1.0 / tau)
        b = tau * (1 - lam)
        if not 0 < lam < 1 or b < 1 or (strict and b == 1):
            raise ValueError("need 0 < lam < 1 < b = tau (1 - lam)")
        return cls(mode="theorem1", ell=ell, q=q, psi=psi, tau=tau, lam=lam)

    @classmethod
    def theorem2(cls, triple: SkodaTriple, ell: int, psi: HermitianPolynomial | None = None) -> "WeightSystem":
        return cls(mode="theorem2", ell=ell, q=triple.q, psi=psi, triple=triple)

    @property
    def b_const(self) -> float:
        return self.tau * (1.0 - self.lam)

    def describe(self) -> dict:
        out = {"mode": self.mode, "ell": self.ell, "q": self.q}
        if self.mode == "theorem1":
            out.update(tau=self.tau, lam=self.lam, b=self.b_const, a=1.0 - self.lam)
        else:
            out["triple"] = self.triple.describe()
        out["psi"] = None if self.psi is None else self.psi.to_json()
        return out

    def _psi(self, z) -> float:
        return 0.0 if self.psi is None else self.psi(z)

    def _psi_hess(self, z, n) -> np.ndarray:
        if self.psi is None:
            return np.zeros((n, n), dtype=complex)
        return self.psi.complex_hessian(z)

    def evaluate(self, gmap: GMap, z) -> dict:
        """Scalar weight data at z: phi1, phi2, a, b, lam (and xi in theorem2)."""
        gv, _ = gmap.values(z)
        S = float(np.sum(np.abs(gv) ** 2))
        if S < MIN_NORM_SQ:
            raise ZeroOfG(f"||g||^2 = {S:.3e} below {MIN_NORM_SQ:g}")
        L = np.log(S)
        psi = self._psi(z)
        ql = self.q * self.ell
        if self.mode == "theorem1":
            phi1 = ql * self.tau * L + psi
            return {"phi1": phi1, "phi2": phi1 + L, "a": 1.0 - self.lam, "b": self.b_const,
                    "lam": self.lam, "log_g": L}
        xi = 1.0 - L
        if xi <= 1.0:
            raise ValueError(f"theorem2 weights need ||g|| < 1 (xi = {xi:.6g})")
        t = self.triple
        a, first, second = (float(v) for v in t.conditions(xi))
        lam = float(-(1.0 + t.dF(xi)) ** 2 / second)
        b = first / (t.q * a * self.ell) + 1.0
        phi1 = -float(t.phi(xi)) + psi + ql * L
        return {"phi1": phi1, "phi2": phi1 + L, "a": a, "b": b, "lam": lam, "xi": xi, "log_g": L}


@dataclass
class Condition15:
    margin: float
    matrix: np.ndarray
    scale: float
    weights: dict


def condition15(w: WeightSystem, g, z) -> Condition15:
    """Assemble the twist-condition matrix at z and its smallest eigenvalue."""
    gm = g if isinstance(g, GMap) else GMap(g)
    gv, dgv = gm.values(z)
    S, grad, H = _log_g_pieces(gv, dgv)
    n = gm.n
    Psi = w._psi_hess(z, n)
    data = w.evaluate(gm, z)
    ql = w.q * w.ell
    a, b, lam = data["a"], data["b"], data["lam"]
    P = np.outer(grad, grad.conj())  # ∂L ⊗ ∂̄L
    if w.mode == "theorem1":
        hess_phi1 = ql * w.tau * H + Psi
        da = np.zeros(n, dtype=complex)
        hess_a = np.zeros((n, n), dtype=complex)
    else:
        t = w.triple
        xi = data["xi"]
        d_xi, hess_xi = -grad, -H
        P_xi = np.outer(d_xi, d_xi.conj())
        dphi, d2phi = float(t.dphi(xi)), float(t.d2phi(xi))
        dF, d2F = float(t.dF(xi)), float(t.d2F(xi))
        # phi1 = -phi(xi) + psi + q ell L
        hess_phi1 = -(d2phi * P_xi + dphi * hess_xi) + Psi + ql * H
        # a = xi + F(xi)
        da = (1.0 + dF) * d_xi
        hess_a = d2F * P_xi + (1.0 + dF) * hess_xi
    outer_a = np.outer(da, da.conj())
    terms = [a * hess_phi1, hess_a, outer_a / lam, ql * a * b * H]
    M = terms[0] - terms[1] - terms[2] - terms[3]
    M = 0.5 * (M + M.conj().T)
    scale = max(float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (T + T.conj().T))))) for T in terms)
    data = dict(data, norm_g_sq=S, P_trace=float(np.real(np.trace(P))))
    return Condition15(margin=float(jacobi_eigvalsh(M)[0]), matrix=M, scale=scale, weights=data)


def condition15_margin(w: WeightSystem, g, z) -> float:
    return condition15(w, g, z).margin


def _v_slice(v: dict, p: int, n: int, base) -> np.ndarray:
    base = tuple(base)
    V = np.zeros((p, n), dtype=complex)
    for j in range(1, p + 1):
        key, sign = sort_with_sign((j,) + base)
        if sign and key in v:
            V[j - 1] = sign * np.asarray(v[key], dtype=complex)
    return V


def lagrange_identity_check(g_values, dg, v: dict, base=()) -> tuple[float, float]:
    """Both sides of the Lagrange-identity step, by direct summation.

    lhs = ||g||^-4 sum_{i, j<k} |sum_alpha (g_j ∂_alpha g_k - g_k ∂_alpha g_j) v_{i base alpha}|^2
    rhs = ||g||^-2 sum_{j,k} |sum_alpha ∂_alpha g_k v_{j base alpha}|^2
          - ||g||^-4 sum_j |sum_{k,alpha} conj(g_k) ∂_alpha g_k v_{j base alpha}|^2
    """
    gv = np.asarray(g_values, dtype=complex)
    dgv = np.asarray(dg, dtype=complex)
    p, n = dgv.shape
    if gv.shape != (p,):
        raise ValueError("g_values and dg disagree on p")
    S = float(np.sum(np.abs(gv) ** 2))
    if S == 0:
        raise ZeroOfG("g vanishes")
    V = _v_slice(v, p, n, base)
    lhs = 0.0
    for i in range(p):
        for j in range(p):
            for k in range(j + 1, p):
                acc = 0j
                for al in range(n):
                    acc += (gv[j] * dgv[k, al] - gv[k] * dgv[j, al]) * V[i, al]
                lhs += abs(acc) ** 2
    lhs /= S * S
    first = 0.0
    for j in range(p):
        for k in range(p):
            acc = sum(dgv[k, al] * V[j, al] for al in range(n))
            first += abs(acc) ** 2
    second = 0.0
    for j in range(p):
        acc = sum(gv[k].conjugate() * dgv[k, al] * V[j, al] for k in range(p) for al in range(n))
        second += abs(acc) ** 2
    rhs = first / S - second / (S * S)
    return float(lhs), float(rhs)


def hessian_form(g_values, dg, v: dict, base=()) -> float:
    """``sum_j sum_{alpha,beta} H_{alpha beta} v_{j base alpha} conj(v_{j base beta})``."""
    gv = np.asarray(g_values, dtype=complex)
    dgv = np.asarray(dg, dtype=complex)
    p, n = dgv.shape
    _, _, H = _log_g_pieces(gv, dgv)
    V = _v_slice(v, p, n, base)
    return float(np.real(np.einsum("ab,ja,jb->", H, V, V.conj())))


def psi_from_json(obj, n: int) -> HermitianPolynomial | None:
    if obj is None:
        return None
    if isinstance(obj, dict) and obj.get("kind") == "norm_sq":
        return HermitianPolynomial.norm_sq(n, obj.get("scale", 1))
    return HermitianPolynomial.from_json(obj)

