"""Coefficient distributions, LWE oracles and sample manipulation.

Errors are formed on the power basis: each of the n coefficients is an
independent draw from a single distribution over centered residues.  Pmf
tables are kept exact (Fractions) whenever the inputs are exact, so that
distribution transport and depth convolutions can be compared against
brute-force enumeration with no tolerance.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fqring import RingElement, RingParams, center_mod
from .tower import TowerParams, is_subring_supported, normalized_trace, subring_embed


@dataclass(frozen=True)
class CoefficientDistribution:
    """A pmf over centered residues mod q.

    kind is one of 'gaussian', 'uniform', 'point_mass', 'table'.  support
    lists residues with nonzero probability; probs align with support and
    are Fractions for exact kinds, floats for the Gaussian.
    """

    q: int
    support: tuple[int, ...]
    probs: tuple
    kind: str
    width: float | None = None

    def __post_init__(self):
        total = sum(self.probs)
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"pmf sums to {float(total)}, expected 1")
        if self.kind in ("gaussian", "uniform") and not self.is_symmetric():
            raise ValueError(f"{self.kind} pmf must be symmetric about 0")

    @classmethod
    def gaussian(cls, q: int, width: float, tail_sigmas: float = 6.0) -> "CoefficientDistribution":
        """Discretized Gaussian of the given width (variance width^2 / 2pi).

        Integer masses exp(-pi z^2 / width^2) are cut off at tail_sigmas
        standard deviations, folded mod q and renormalized.
        """
        sigma = width / math.sqrt(2 * math.pi)
        cut = max(1, math.ceil(tail_sigmas * sigma))
        zs = np.arange(-cut, cut + 1)
        ws = np.exp(-math.pi * zs.astype(float) ** 2 / width**2)
        acc: dict[int, float] = {}
        for z, w in zip(zs, ws):
            r = int(center_mod(np.array([z]), q)[0])
            acc[r] = acc.get(r, 0.0) + float(w)
        total = sum(acc.values())
        items = sorted(acc.items())
        return cls(q, tuple(v for v, _ in items), tuple(p / total for _, p in items),
                   "gaussian", width=width)

    @classmethod
    def uniform(cls, q: int, values) -> "CoefficientDistribution":
        vals = tuple(sorted(int(center_mod(np.array([v]), q)[0]) for v in values))
        if len(set(vals)) != len(vals):
            raise ValueError("duplicate support values")
        p = Fraction(1, len(vals))
        return cls(q, vals, tuple(p for _ in vals), "uniform")

    @classmethod
    def point_mass(cls, q: int, value: int) -> "CoefficientDistribution":
        v = int(center_mod(np.array([value]), q)[0])
        return cls(q, (v,), (Fraction(1),), "point_mass")

    @classmethod
    def from_pmf(cls, q: int, mapping: dict) -> "CoefficientDistribution":
        """Explicit pmf table; weights are normalized exactly via Fractions."""
        acc: dict[int, Fraction] = {}
        for v, p in mapping.items():
            r = int(center_mod(np.array([int(v)]), q)[0])
            acc[r] = acc.get(r, Fraction(0)) + Fraction(p)
        total = sum(acc.values())
        if total <= 0:
            raise ValueError("pmf weights must be positive")
        items = sorted((v, p / total) for v, p in acc.items() if p)
        return cls(q, tuple(v for v, _ in items), tuple(p for _, p in items), "table")

    def pmf(self, v: int) -> Fraction | float:
        try:
            return self.probs[self.support.index(v)]
        except ValueError:
            return Fraction(0)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def is_symmetric(self) -> bool:
        d = self.as_dict()
        return all(d.get(-v) == p for v, p in d.items())

    def variance(self) -> float:
        mean = sum(float(p) * v for v, p in zip(self.support, self.probs))
        return sum(float(p) * (v - mean) ** 2 for v, p in zip(self.support, self.probs))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF lookup on the pmf table: exact, seedable, branch-free."""
        if len(self.support) == 1:
            return np.full(size, self.support[0], dtype=np.int64)
        cum = np.cumsum(np.array([float(p) for p in self.probs]))
        cum[-1] = 1.0
        idx = np.searchsorted(cum, rng.random(size), side="right")
        return np.array(self.support, dtype=np.int64)[idx]

    def negated(self) -> "CoefficientDistribution":
        return self._from_acc({-v: p for v, p in self.as_dict().items()})

    def scaled(self, c: int) -> "CoefficientDistribution":
        """Pmf of c*X mod q."""
        acc: dict[int, object] = {}
        for v, p in self.as_dict().items():
            r = int(center_mod(np.array([c * v]), self.q)[0])
            acc[r] = acc.get(r, 0) + p
        return self._from_acc(acc)

    def convolve(self, other: "CoefficientDistribution") -> "CoefficientDistribution":
        """Pmf of X + Y mod q for independent X, Y."""
        if self.q != other.q:
            raise ValueError("mismatched moduli")
        acc: dict[int, object] = {}
        for v, p in self.as_dict().items():
            for w, r in other.as_dict().items():
                s = int(center_mod(np.array([v + w]), self.q)[0])
                acc[s] = acc.get(s, 0) + p * r
        return self._from_acc(acc)

    def difference(self, other: "CoefficientDistribution") -> "CoefficientDistribution":
        """Pmf of X - Y mod q for independent X, Y."""
        return self.convolve(other.negated())

    def _from_acc(self, acc: dict) -> "CoefficientDistribution":
        items = sorted((v, p) for v, p in acc.items() if p)
        return CoefficientDistribution(
            self.q, tuple(v for v, _ in items), tuple(p for _, p in items), "table")


@functools.lru_cache(maxsize=None)
def depth_distribution(chi0: CoefficientDistribution, depth: int) -> CoefficientDistribution:
    """Per-coefficient error pmf after `depth` levels of pairwise subtraction.

    Each level replaces the error by a difference of two independent copies,
    so depth L gives the 2^L-fold signed convolution of chi0 (reduced mod q).
    """
    if depth == 0:
        return chi0
    prev = depth_distribution(chi0, depth - 1)
    return prev.difference(prev)


@dataclass(frozen=True)
class ErrorDistribution:
    """Ring error: independent chi0 draws on each power-basis coefficient."""

    base: CoefficientDistribution
    ring: RingParams

    def __post_init__(self):
        if self.base.q != self.ring.q:
            raise ValueError("coefficient distribution modulus differs from ring")

    def draw(self, rng: np.random.Generator) -> RingElement:
        return RingElement(self.ring, self.base.sample(rng, self.ring.n))


@dataclass(frozen=True)
class Sample:
    """An observed pair (a, b); depth counts BKW subtraction levels applied."""

    a: RingElement
    b: RingElement
    depth: int = 0


@dataclass(frozen=True)
class CosetRestriction:
    """Restrict the a-part of drawn samples to the coset a0 * S_q."""

    a0: RingElement
    tower: TowerParams


class LweOracle:
    """Seeded sample source for a fixed secret: draws (a, b = a*s + e).

    a is uniform over R_q, or over a0*S_q when a coset restriction is set.
    The oracle owns its RNG; concurrent draws from one oracle are not safe,
    but independently seeded oracles are.
    """

    def __init__(self, secret: RingElement, error: ErrorDistribution,
                 restriction: CosetRestriction | None = None, seed: int = 0):
        if secret.params != error.ring:
            raise ValueError("secret and error live in different rings")
        if restriction is not None:
            nt = normalized_trace(restriction.a0, restriction.tower)
            restriction.a0.inverse()  # raises NotInvertible if violated
            nt.inverse()
        self.secret = secret
        self.error = error
        self.restriction = restriction
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @property
    def params(self) -> RingParams:
        return self.secret.params

    def draw(self) -> Sample:
        p = self.params
        if self.restriction is None:
            a = RingElement(p, self.rng.integers(0, p.q, p.n))
        else:
            t = self.restriction.tower
            u = subring_embed(t, self.rng.integers(0, p.q, t.B))
            a = self.restriction.a0 * u
        e = self.error.draw(self.rng)
        return Sample(a, a * self.secret + e, depth=0)

    def draw_many(self, count: int) -> list[Sample]:
        return [self.draw() for _ in range(count)]

    def stream(self):
        while True:
            yield self.draw()


def random_secret(params: RingParams, rng: np.random.Generator,
                  dist: CoefficientDistribution | None = None) -> RingElement:
    """Uniform secret by default; pass a distribution for small secrets."""
    if dist is None:
        return params.random_element(rng)
    return RingElement(params, dist.sample(rng, params.n))


def rotate_sample(x: Sample, j: int, which: str = "both") -> Sample:
    """Rotate by z^j: 'both' keeps the secret, 'b_only' turns it into z^j * s.

    Valid as a resampling only when the error is invariant under
    multiplication by z (symmetric coefficient support guarantees this).
    """
    if which == "both":
        return Sample(x.a.mul_zeta_pow(j), x.b.mul_zeta_pow(j), x.depth)
    if which == "b_only":
        return Sample(x.a, x.b.mul_zeta_pow(j), x.depth)
    raise ValueError(f"unknown rotation kind {which!r}")


def coset_rotate(x: Sample, j: int, a0: RingElement) -> tuple[Sample, RingElement]:
    """Rotate a coset-restricted sample; the coset representative rotates too."""
    return rotate_sample(x, j, "both"), a0.mul_zeta_pow(j)


def transport_pmf(chi0: CoefficientDistribution, ring: RingParams,
                  g: tuple[int, ...]) -> CoefficientDistribution:
    """Coefficient pmf of the error image under the CRT factor map for g.

    Requires q = 1 (mod 4).  With k' = deg(g), the image of z^(k') is a
    scalar c in F_q and each image coefficient is distributed as
    sum_i c^i X_i over n/k' independent X_i ~ chi0; computed by exact
    convolution of scaled pmfs.
    """
    q = ring.q
    if q % 4 != 1:
        raise ValueError(f"transport requires q = 1 (mod 4), got q={q}")
    kprime = len(g) - 1
    if kprime < 1 or ring.n % kprime:
        raise ValueError("factor degree must divide n")
    c_img = _constant_image_of_zeta_power(ring, g, kprime)
    out = CoefficientDistribution.point_mass(q, 0)
    for i in range(ring.n // kprime):
        out = out.convolve(chi0.scaled(pow(c_img, i, q)))
    return out


def _constant_image_of_zeta_power(ring: RingParams, g, kprime: int) -> int:
    from .fqring import _poly_divmod

    mono = [0] * kprime + [1]
    _, rem = _poly_divmod(mono, list(g), ring.q)
    if len(rem) > 1:
        raise ValueError("z^deg(g) does not map to a scalar under this factor")
    return rem[0] if rem else 0
