"""Bounded domains in C^n and seeded Monte Carlo integration over them.

Sampling is split into fixed-size blocks.  Block ``k`` draws from
``numpy.random.default_rng([seed, k])`` and its statistics are merged in
block order, so the estimate depends on the seed only, never on how many
workers evaluated the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Domain",
    "IntegralEstimate",
    "AllSamplesRejected",
    "sample",
    "sample_many",
    "integrate",
    "BLOCK",
    "DEFAULT_CUTOFF",
]

BLOCK = 8192
DEFAULT_CUTOFF = 1e-12
MIN_SAMPLES = 100


class AllSamplesRejected(RuntimeError):
    pass


@dataclass(frozen=True)
class Domain:
    """A polydisc (per-variable radii) or a Euclidean ball."""

    kind: str
    center: tuple[complex, ...]
    radii: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind == "polydisc":
            if self.radii is None or len(self.radii) != len(self.center):
                raise ValueError("polydisc needs one radius per coordinate")
            if any(r <= 0 for r in self.radii):
                raise ValueError("radii must be positive")
        elif self.kind == "ball":
            if self.radius is None or self.radius <= 0:
                raise ValueError("ball needs a positive radius")
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.center:
            raise ValueError("empty center")

    @classmethod
    def polydisc(cls, center: Sequence[complex], radii) -> "Domain":
        center = tuple(complex(c) for c in center)
        if np.isscalar(radii):
            radii = [radii] * len(center)
        return cls("polydisc", center, radii=tuple(float(r) for r in radii))

    @classmethod
    def ball(cls, center: Sequence[complex], radius: float) -> "Domain":
        return cls("ball", tuple(complex(c) for c in center), radius=float(radius))

    @classmethod
    def unit_polydisc(cls, n: int) -> "Domain":
        return cls.polydisc([0] * n, 1.0)

    @classmethod
    def unit_ball(cls, n: int) -> "Domain":
        return cls.ball([0] * n, 1.0)

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        n = self.n
        if self.kind == "polydisc":
            return math.pi ** n * math.prod(r * r for r in self.radii)
        return math.pi ** n * self.radius ** (2 * n) / math.factorial(n)

    def contains(self, z) -> bool:
        return bool(self.contains_many(np.asarray(z, dtype=complex)[None, :])[0])

    def contains_many(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(points, dtype=complex) - np.asarray(self.center)
        if self.kind == "polydisc":
            return np.all(np.abs(d) < np.asarray(self.radii), axis=1)
        return np.sum(np.abs(d) ** 2, axis=1) < self.radius ** 2

    def to_json(self) -> dict:
        out = {"kind": self.kind, "center": [[c.real, c.imag] for c in self.center]}
        if self.kind == "polydisc":
            out["radii"] = list(self.radii)
        else:
            out["radius"] = self.radius
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Domain":
        try:
            kind = obj["kind"]
            center = [complex(float(c[0]), float(c[1])) for c in obj["center"]]
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise ValueError(f"malformed domain: {exc!r}") from None
        if kind == "polydisc":
            if "radii" not in obj:
                raise ValueError("polydisc domain missing 'radii'")
            return cls.polydisc(center, obj["radii"])
        if kind == "ball":
            if "radius" not in obj:
                raise ValueError("ball domain missing 'radius'")
            return cls.ball(center, obj["radius"])
        raise ValueError(f"domain kind must be polydisc or ball, got {kind!r}")


def sample_many(d: Domain, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` points uniform in ``d`` as a ``(count, n)`` complex array."""
    n = d.n
    if d.kind == "polydisc":
        r = np.asarray(d.radii) * np.sqrt(rng.random((count, n)))
        theta = 2 * np.pi * rng.random((count, n))
        pts = r * np.exp(1j * theta)
    else:
        x = rng.standard_normal((count, 2 * n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        rad = d.radius * rng.random(count) ** (1.0 / (2 * n))
        x *= rad[:, None]
        pts = x[:, :n] + 1j * x[:, n:]
    return pts + np.asarray(d.center)


def sample(d: Domain, rng: np.random.Generator) -> np.ndarray:
    return sample_many(d, rng, 1)[0]


@dataclass(frozen=True)
class IntegralEstimate:
    mean: float
    stderr: float
    count: int
    rejected: int
    max: float

    @property
    def rejected_fraction(self) -> float:
        total = self.count + self.rejected
        return self.rejected / total if total else 0.0

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "count": self.count,
                "rejected": self.rejected, "rejected_fraction": self.rejected_fraction,
                "max": self.max}


@dataclass
class _Moments:
    # per-column running count / mean / M2, merged with Chan's formula
    count: int
    mean: np.ndarray
    m2: np.ndarray
    vmax: np.ndarray
    rejected: int

    @classmethod
    def of(cls, values: np.ndarray, rejected: int) -> "_Moments":
        k = values.shape[1]
        if values.shape[0] == 0:
            z = np.zeros(k)
            return cls(0, z, z.copy(), np.full(k, -np.inf), rejected)
        mean = values.mean(axis=0)
        m2 = ((values - mean) ** 2).sum(axis=0)
        return cls(values.shape[0], mean, m2, values.max(axis=0), rejected)

    def merge(self, other: "_Moments") -> "_Moments":
        n = self.count + other.count
        if n == 0:
            return _Moments(0, self.mean, self.m2, np.maximum(self.vmax, other.vmax),
                            self.rejected + other.rejected)
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta ** 2 * (self.count * other.count / n)
        return _Moments(n, mean, m2, np.maximum(self.vmax, other.vmax),
                        self.rejected + other.rejected)


def _block_sizes(samples: int, block: int) -> list[int]:
    full, rest = divmod(samples, block)
    return [block] * full + ([rest] if rest else [])


def integrate(f: Callable, d: Domain, samples: int, seed: int, cutoff: float = DEFAULT_CUTOFF,
              norm_g_sq: Callable | None = None, workers: int = 1, block: int = BLOCK,
              vectorized: bool = True):
    """Monte Carlo estimate of the integral of ``f`` over ``d``.

    ``f`` maps an ``(N, n)`` array of points to ``(N,)`` values, or to
    ``(N, k)`` for k integrands sharing the same samples; in that case a
    list of estimates is returned.  A sample is rejected when ``norm_g_sq``
    is below ``cutoff`` there, or when ``f`` returns a non-finite value.
    With ``vectorized=False``, ``f`` takes a single point.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    if block < 1:
        raise ValueError("block must be positive")
    sizes = _block_sizes(samples, block)
    shape = []

    def run(k: int) -> _Moments:
        rng = np.random.default_rng([seed, k])
        pts = sample_many(d, rng, sizes[k])
        if vectorized:
            vals = np.asarray(f(pts), dtype=float)
        else:
            vals = np.array([f(z) for z in pts], dtype=float)
        shape.append(vals.ndim)
        if vals.ndim == 1:
            vals = vals[:, None]
        ok = np.all(np.isfinite(vals), axis=1)
        if norm_g_sq is not None:
            ok &= np.asarray(norm_g_sq(pts), dtype=float) >= cutoff
        return _Moments.of(vals[ok], int(np.count_nonzero(~ok)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(k) for k in range(len(sizes))]
    acc = parts[0]
    for m in parts[1:]:
        acc = acc.merge(m)
    if acc.count == 0:
        raise AllSamplesRejected(f"all {acc.rejected} samples rejected")
    vol = d.volume
    if acc.count > 1:
        sd = np.sqrt(acc.m2 / (acc.count - 1))
    else:
        sd = np.zeros_like(acc.m2)
    out = [IntegralEstimate(float(vol * acc.mean[j]), float(vol * sd[j] / math.sqrt(acc.count)),
                            acc.count, acc.rejected, float(acc.vmax[j]))
           for j in range(acc.mean.shape[0])]
    return out[0] if shape[0] == 1 else out
