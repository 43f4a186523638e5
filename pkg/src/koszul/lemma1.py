"""Generalized Skoda inequality and the rank argument behind it.

For constants ``a_i``, ``b_{i alpha}`` and ``c_{i1..il alpha}`` (skew in the
``i`` indices) and a fixed increasing base ``I`` of length ``l-1``::

    |sum_{i,j,alpha} conj(a_j) (a_j b_{i alpha} - a_i b_{j alpha}) c_{i I alpha}|^2
        <= q * ||a||^2 * sum_{i, j<k} |sum_alpha (a_j b_{k alpha} - a_k b_{j alpha}) c_{i I alpha}|^2

with ``q = min(p-1, n)`` for ``l == 1`` and ``min(p-l+1, n)`` otherwise.

The operator form writes the left side as ``|Tr AB|^2`` where
``A in Hom(W, V)`` is the slice ``c_{. I .}`` and ``B = iota_X(theta ^ B1)``
with ``X = sum conj(a_i) v_i``, ``theta = sum a_i v_i^*``.  The bound follows
from ``|Tr AB|^2 <= rank(AB) ||AB||^2`` and ``||AB||^2 <= ||X||^2 ||theta ^ AB1||^2``.
Everything here is evaluated batched over a leading instance axis.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations

import numpy as np

from .exterior import multi_indices, sort_with_sign

__all__ = [
    "RANK_RTOL",
    "Lemma1Instance",
    "RankBoundViolation",
    "q_constant",
    "inequality_sides",
    "rank_oracle",
    "rank_operators",
    "random_instance",
    "pivoted_rank",
    "verify_lemma1",
    "Lemma1Summary",
    "grid_configs",
    "instance_for",
    "skew_entries",
]

RANK_RTOL = 1e-9
INEQ_RTOL = 1e-9
CS_RTOL = 1e-9
KERNEL_RTOL = 1e-10


class RankBoundViolation(AssertionError):
    pass


def q_constant(p: int, n: int, ell: int) -> int:
    """Rank bound ``min(p-1, n)`` for ell == 1, ``min(p-ell+1, n)`` for ell >= 2.

    p == 1 gives 0 (both sides of the inequality then vanish identically).
    """
    if n < 1 or p < 1 or not 1 <= ell <= p:
        raise ValueError(f"need 1 <= ell <= p and n >= 1, got p={p}, n={n}, ell={ell}")
    if ell == 1:
        return min(p - 1, n)
    return min(p - ell + 1, n)


@dataclass(frozen=True)
class Lemma1Instance:
    """Constants of one inequality instance.

    ``c`` maps increasing ``ell``-tuples (1-based) to length-n complex vectors.
    """

    p: int
    n: int
    ell: int
    a: np.ndarray
    b: np.ndarray
    c: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        if a.shape != (self.p,):
            raise ValueError(f"a must have shape ({self.p},), got {a.shape}")
        if b.shape != (self.p, self.n):
            raise ValueError(f"b must have shape ({self.p}, {self.n}), got {b.shape}")
        if not 1 <= self.ell <= self.p:
            raise ValueError(f"ell={self.ell} outside 1..p={self.p}")
        c = {}
        for key, vec in self.c.items():
            key = tuple(key)
            skey, sign = sort_with_sign(key)
            if len(key) != self.ell or skey != key or sign == 0:
                raise ValueError(f"c key {key} is not an increasing {self.ell}-tuple")
            if key[-1] > self.p or key[0] < 1:
                raise ValueError(f"c key {key} out of range 1..{self.p}")
            vec = np.asarray(vec, dtype=complex)
            if vec.shape != (self.n,):
                raise ValueError(f"c[{key}] must have length {self.n}")
            c[key] = vec
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def bases(self) -> list[tuple[int, ...]]:
        return multi_indices(self.p, self.ell - 1)

    def c_slice(self, base) -> np.ndarray:
        """Matrix ``C[i-1, alpha] = c_{i base alpha}`` (zero rows for i in base)."""
        base = tuple(base)
        if len(base) != self.ell - 1:
            raise ValueError(f"base must have length {self.ell - 1}, got {len(base)}")
        C = np.zeros((self.p, self.n), dtype=complex)
        for i in range(1, self.p + 1):
            key, sign = sort_with_sign((i,) + base)
            if sign and key in self.c:
                C[i - 1] = sign * self.c[key]
        return C

    def full_c(self) -> np.ndarray:
        """Dense ``c`` of shape ``(p,)*ell + (n,)``."""
        out = np.zeros((self.p,) * self.ell + (self.n,), dtype=complex)
        for key, vec in self.c.items():
            for perm, sign in _signed_perms(self.ell):
                idx = tuple(key[j] - 1 for j in perm)
                out[idx] = sign * vec
        return out

    def to_json(self) -> dict:
        cpx = lambda x: [float(x.real), float(x.imag)]  # noqa: E731
        return {
            "p": self.p,
            "n": self.n,
            "ell": self.ell,
            "a": [cpx(x) for x in self.a],
            "b": [[cpx(x) for x in row] for row in self.b],
            "c": [{"index": list(k), "value": [cpx(x) for x in v]} for k, v in sorted(self.c.items())],
        }

    @classmethod
    def from_json(cls, obj) -> "Lemma1Instance":
        cpx = lambda pr: complex(pr[0], pr[1])  # noqa: E731
        try:
            return cls(
                p=int(obj["p"]),
                n=int(obj["n"]),
                ell=int(obj["ell"]),
                a=np.array([cpx(x) for x in obj["a"]], dtype=complex).reshape(-1),
                b=np.array([[cpx(x) for x in row] for row in obj["b"]], dtype=complex),
                c={tuple(e["index"]): np.array([cpx(x) for x in e["value"]]) for e in obj["c"]},
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"malformed Lemma1Instance JSON: {exc}") from exc


@lru_cache(maxsize=None)
def _signed_perms(d: int) -> tuple:
    out = []
    for perm in permutations(range(d)):
        _, sign = sort_with_sign(perm)
        out.append((perm, sign))
    return tuple(out)


# --------------------------------------------------------------------------
# batched kernels; leading axis is the instance axis


def _sides_batch(a, b, C, q):
    """lhs, rhs of the inequality for stacked (N,p), (N,p,n), (N,p,n)."""
    abar = a.conj()
    # T[i, j, alpha] = conj(a_j) (a_j b_{i alpha} - a_i b_{j alpha})
    T = (abar * a)[:, None, :, None] * b[:, :, None, :] - (
        abar[:, None, :, None] * a[:, :, None, None] * b[:, None, :, :]
    )
    lhs = np.abs(np.einsum("mija,mia->m", T, C)) ** 2
    # D[j, k, alpha] = a_j b_{k alpha} - a_k b_{j alpha}
    D = a[:, :, None, None] * b[:, None, :, :] - a[:, None, :, None] * b[:, :, None, :]
    S = np.einsum("mjka,mia->mijk", D, C)
    p = a.shape[1]
    iu = np.triu_indices(p, k=1)
    wedge = np.sum(np.abs(S[:, :, iu[0], iu[1]]) ** 2, axis=(1, 2))
    rhs = q * np.sum(np.abs(a) ** 2, axis=1) * wedge
    return lhs, rhs


def _operators_batch(a, b, C):
    """AB, theta^AB1 and X, constructed as in the rank argument."""
    X = a.conj()
    B1 = np.swapaxes(b, 1, 2)  # Hom(V, W): v_i -> sum_alpha b_{i alpha} w_alpha
    # theta ^ B1 in W (x) Lambda^2 V^*: [alpha, j, k] = a_j B1[alpha, k] - a_k B1[alpha, j]
    thB1 = a[:, None, :, None] * B1[:, :, None, :] - a[:, None, None, :] * B1[:, :, :, None]
    B = np.einsum("mj,majk->mak", X, thB1)  # iota_X on the first wedge slot
    AB = C @ B
    AB1 = C @ B1
    thAB1 = a[:, None, :, None] * AB1[:, :, None, :] - a[:, None, None, :] * AB1[:, :, :, None]
    return AB, thAB1, X


def pivoted_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Rank of each matrix in a stack by Gaussian elimination with complete pivoting.

    A pivot counts as nonzero when ``|pivot| >= rtol * max|M|``.
    """
    A = np.array(M, dtype=complex, copy=True)
    if A.ndim == 2:
        return int(pivoted_rank(A[None], rtol)[0])
    N, m, k = A.shape
    scale = np.abs(A).reshape(N, -1).max(axis=1) if m * k else np.zeros(N)
    rank = np.zeros(N, dtype=int)
    rows = np.arange(N)
    for s in range(min(m, k)):
        sub = np.abs(A[:, s:, s:]).reshape(N, -1)
        flat = sub.argmax(axis=1)
        r = flat // (k - s) + s
        c = flat % (k - s) + s
        piv_abs = sub[rows, flat]
        live = (piv_abs >= rtol * scale) & (scale > 0)
        if not live.any():
            break
        rank += live
        # row and column swaps bring the pivot to (s, s)
        tmp = A[rows, s, :].copy()
        A[rows, s, :] = A[rows, r, :]
        A[rows, r, :] = tmp
        tmp = A[rows, :, s].copy()
        A[rows, :, s] = A[rows, :, c]
        A[rows, :, c] = tmp
        piv = np.where(live, A[:, s, s], 1.0)
        fac = np.where(live[:, None], A[:, s + 1:, s] / piv[:, None], 0.0)
        A[:, s + 1:, s:] -= fac[:, :, None] * A[:, None, s, s:]
    return rank


@dataclass
class _BatchResult:
    lhs: np.ndarray
    rhs: np.ndarray
    rank: np.ndarray
    trace_sq: np.ndarray
    ab_norm_sq: np.ndarray
    x_norm_sq: np.ndarray
    wedge_norm_sq: np.ndarray
    kernel_residual: np.ndarray
    kernel_scale: np.ndarray
    base_rows_max: np.ndarray
    ab_scale: np.ndarray


def _evaluate_batch(a, b, C, base, q) -> _BatchResult:
    lhs, rhs = _sides_batch(a, b, C, q)
    AB, thAB1, X = _operators_batch(a, b, C)
    p = a.shape[1]
    iu = np.triu_indices(p, k=1)
    wedge = np.sum(np.abs(thAB1[:, :, iu[0], iu[1]]) ** 2, axis=(1, 2))
    ab_norm = np.sum(np.abs(AB) ** 2, axis=(1, 2))
    xn = np.sum(np.abs(X) ** 2, axis=1)
    kres = np.linalg.norm(np.einsum("mij,mj->mi", AB, X), axis=1)
    kscale = np.sqrt(ab_norm) * np.sqrt(xn)
    if base:
        rows = [i - 1 for i in base]
        brow = np.abs(AB[:, rows, :]).reshape(AB.shape[0], -1).max(axis=1)
    else:
        brow = np.zeros(AB.shape[0])
    return _BatchResult(
        lhs=lhs,
        rhs=rhs,
        rank=pivoted_rank(AB),
        trace_sq=np.abs(np.trace(AB, axis1=1, axis2=2)) ** 2,
        ab_norm_sq=ab_norm,
        x_norm_sq=xn,
        wedge_norm_sq=wedge,
        kernel_residual=kres,
        kernel_scale=kscale,
        base_rows_max=brow,
        ab_scale=np.sqrt(ab_norm),
    )


# --------------------------------------------------------------------------
# single-instance API


def inequality_sides(inst: Lemma1Instance, base=()) -> tuple[float, float]:
    """Both sides of the inequality for one base, by direct summation."""
    base = tuple(base)
    if len(base) != inst.ell - 1:
        raise ValueError(f"base must have length {inst.ell - 1}, got {len(base)}")
    q = q_constant(inst.p, inst.n, inst.ell)
    lhs, rhs = _sides_batch(inst.a[None], inst.b[None], inst.c_slice(base)[None], q)
    return float(lhs[0]), float(rhs[0])


def rank_operators(inst: Lemma1Instance, base=()) -> dict:
    """Matrices and norms of the operator argument for one base."""
    base = tuple(base)
    C = inst.c_slice(base)
    AB, thAB1, X = _operators_batch(inst.a[None], inst.b[None], C[None])
    res = _evaluate_batch(inst.a[None], inst.b[None], C[None], base, q_constant(inst.p, inst.n, inst.ell))
    return {
        "A": C,
        "AB": AB[0],
        "theta_AB1": thAB1[0],
        "X": X[0],
        "rank": int(res.rank[0]),
        "trace_sq": float(res.trace_sq[0]),
        "ab_norm_sq": float(res.ab_norm_sq[0]),
        "x_norm_sq": float(res.x_norm_sq[0]),
        "wedge_norm_sq": float(res.wedge_norm_sq[0]),
        "kernel_residual": float(res.kernel_residual[0]),
        "base_rows_max": float(res.base_rows_max[0]),
    }


def rank_oracle(inst: Lemma1Instance, base=()) -> tuple[int, int]:
    """(rank of AB, q) for one base; raises RankBoundViolation if rank > q."""
    if not np.any(inst.a):
        raise ValueError("rank oracle needs a != 0")
    base = tuple(base)
    if len(base) != inst.ell - 1:
        raise ValueError(f"base must have length {inst.ell - 1}, got {len(base)}")
    AB, _, _ = _operators_batch(inst.a[None], inst.b[None], inst.c_slice(base)[None])
    rank = int(pivoted_rank(AB)[0])
    bound = q_constant(inst.p, inst.n, inst.ell)
    if rank > bound:
        raise RankBoundViolation(f"rank {rank} exceeds bound {bound} at base {base}")
    return rank, bound


def skew_entries(raw: np.ndarray, ell: int, lead: int = 0) -> np.ndarray:
    """Antisymmetrized values of ``raw`` at the increasing multi-indices.

    ``raw`` has ``lead`` batch axes, then ``ell`` axes of length p, then any
    trailing axes.  Returns shape ``lead_shape + (len(keys),) + trailing``
    with keys in :func:`multi_indices` order.
    """
    p = raw.shape[lead] if ell else 0
    keys = multi_indices(p, ell)
    pre = (slice(None),) * lead
    cols = []
    for key in keys:
        acc = 0
        for perm, sign in _signed_perms(ell):
            idx = pre + tuple(key[j] - 1 for j in perm)
            acc = acc + sign * raw[idx]
        cols.append(acc / math.factorial(ell))
    return np.stack(cols, axis=lead)


def _uniform_complex(rng, shape):
    return rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape)


def _raw_draws(rng, p, n, ell):
    a = _uniform_complex(rng, p)
    b = _uniform_complex(rng, (p, n))
    raw = _uniform_complex(rng, (p,) * ell + (n,))
    return a, b, raw


def _from_entries(p, n, ell, a, b, entries) -> Lemma1Instance:
    c = {k: entries[m].copy() for m, k in enumerate(multi_indices(p, ell))}
    return Lemma1Instance(p, n, ell, a, b, c)


def _slice_map(p: int, ell: int, base: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Key position and sign giving row i of ``c_{i base .}`` (sign 0: zero row)."""
    pos = {k: m for m, k in enumerate(multi_indices(p, ell))}
    where = np.zeros(p, dtype=int)
    signs = np.zeros(p)
    for i in range(1, p + 1):
        key, sign = sort_with_sign((i,) + base)
        if sign:
            where[i - 1] = pos[key]
            signs[i - 1] = sign
    return where, signs


def random_instance(rng: np.random.Generator, p: int, n: int, ell: int) -> Lemma1Instance:
    """Entries uniform on the square [-1,1]^2; c skew-symmetrized after sampling."""
    a, b, raw = _raw_draws(rng, p, n, ell)
    return _from_entries(p, n, ell, a, b, skew_entries(raw, ell))


# --------------------------------------------------------------------------
# randomized verification


def grid_configs(pmax: int, nmax: int) -> list[tuple[int, int, int]]:
    return [(p, n, ell) for p in range(1, pmax + 1) for n in range(1, nmax + 1) for ell in range(1, p + 1)]


def instance_for(seed: int, index: int, configs) -> Lemma1Instance:
    """Instance number ``index``; depends only on (seed, index)."""
    p, n, ell = configs[index % len(configs)]
    rng = np.random.default_rng([seed, index])
    return random_instance(rng, p, n, ell)


@dataclass
class Lemma1Summary:
    seed: int
    instances: int
    checks: int = 0
    max_ratio: float = 0.0
    equality_cases: int = 0
    violations: dict = field(default_factory=lambda: {
        "inequality": [], "rank": [], "trace_cs": [], "operator_cs": [], "kernel": [], "base_rows": [],
    })
    max_rank: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def merge(self, other: "Lemma1Summary"):
        self.checks += other.checks
        self.max_ratio = max(self.max_ratio, other.max_ratio)
        self.equality_cases += other.equality_cases
        for k, v in other.violations.items():
            self.violations[k].extend(v)
        for k, v in other.max_rank.items():
            self.max_rank[k] = max(self.max_rank.get(k, 0), v)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "instances": self.instances,
            "checks": self.checks,
            "max_ratio": self.max_ratio,
            "equality_cases": self.equality_cases,
            "violation_counts": {k: len(v) for k, v in self.violations.items()},
            "violations": {k: v[:20] for k, v in self.violations.items()},
            "max_rank": {f"p={p},n={n},ell={e}": r for (p, n, e), r in sorted(self.max_rank.items())},
        }


def _run_chunk(seed: int, start: int, stop: int, pmax: int, nmax: int) -> Lemma1Summary:
    configs = grid_configs(pmax, nmax)
    summary = Lemma1Summary(seed=seed, instances=stop - start)
    groups: dict = {}
    for idx in range(start, stop):
        groups.setdefault(idx % len(configs), []).append(idx)
    for ci, idxs in sorted(groups.items()):
        p, n, ell = configs[ci]
        draws = [_raw_draws(np.random.default_rng([seed, i]), p, n, ell) for i in idxs]
        a = np.stack([d[0] for d in draws])
        b = np.stack([d[1] for d in draws])
        entries = skew_entries(np.stack([d[2] for d in draws]), ell, lead=1)
        insts = _LazyInstances(p, n, ell, a, b, entries)
        q = q_constant(p, n, ell)
        for base in multi_indices(p, ell - 1):
            where, signs = _slice_map(p, ell, base)
            C = entries[:, where, :] * signs[None, :, None]
            r = _evaluate_batch(a, b, C, base, q)
            summary.checks += len(idxs)
            pos = r.rhs > 0
            if pos.any():
                summary.max_ratio = max(summary.max_ratio, float(np.max(r.lhs[pos] / r.rhs[pos])))
            summary.equality_cases += int(np.sum(pos & (np.abs(r.lhs - r.rhs) <= 1e-12 * r.rhs)))
            key = (p, n, ell)
            summary.max_rank[key] = max(summary.max_rank.get(key, 0), int(r.rank.max()))
            _flag(summary, "inequality", r.lhs > r.rhs * (1 + INEQ_RTOL), idxs, insts, base, r)
            _flag(summary, "rank", r.rank > q, idxs, insts, base, r)
            _flag(summary, "trace_cs",
                  r.trace_sq > r.rank * r.ab_norm_sq * (1 + CS_RTOL) + 1e-300, idxs, insts, base, r)
            _flag(summary, "operator_cs",
                  r.ab_norm_sq > r.x_norm_sq * r.wedge_norm_sq * (1 + CS_RTOL) + 1e-300, idxs, insts, base, r)
            _flag(summary, "kernel", r.kernel_residual > KERNEL_RTOL * r.kernel_scale + 1e-300,
                  idxs, insts, base, r)
            _flag(summary, "base_rows", r.base_rows_max > KERNEL_RTOL * r.ab_scale + 1e-300,
                  idxs, insts, base, r)
    return summary


class _LazyInstances:
    """Materializes Lemma1Instance objects only for flagged rows."""

    def __init__(self, p, n, ell, a, b, entries):
        self.args = (p, n, ell)
        self.a, self.b, self.entries = a, b, entries

    def __getitem__(self, m):
        return _from_entries(*self.args, self.a[m], self.b[m], self.entries[m])


def _flag(summary, kind, mask, idxs, insts, base, r):
    for m in np.flatnonzero(mask):
        summary.violations[kind].append({
            "instance_index": idxs[m],
            "base": list(base),
            "lhs": float(r.lhs[m]),
            "rhs": float(r.rhs[m]),
            "rank": int(r.rank[m]),
            "instance": insts[m].to_json(),
        })


def verify_lemma1(seed: int, instances: int, pmax: int = 5, nmax: int = 4,
                  workers: int = 1, chunk: int = 20000) -> Lemma1Summary:
    """Check inequality, rank bound and operator identities on random instances.

    Instance k is drawn from ``default_rng([seed, k])`` with configuration
    ``k mod len(grid)``, so the outcome does not depend on ``workers``.
    """
    bounds = [(s, min(s + chunk, instances)) for s in range(0, instances, chunk)]
    summary = Lemma1Summary(seed=seed, instances=instances)
    if workers > 1 and len(bounds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, *zip(*[(seed, s, e, pmax, nmax) for s, e in bounds])))
    else:
        parts = [_run_chunk(seed, s, e, pmax, nmax) for s, e in bounds]
    for part in parts:
        summary.merge(part)
    return summary


def dumps_instance(inst: Lemma1Instance) -> str:
    return json.dumps(inst.to_json())

