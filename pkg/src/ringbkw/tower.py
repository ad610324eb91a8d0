"""Cyclotomic subring structure, trace maps and the prioritized basis.

For k | 2n (both powers of two), the k-th cyclotomic subring S_q of R_q is
spanned by the powers z^(i*stride), stride = 2n/k, and has dimension
B = k/2 over F_q.  The trace down to S_q kills every basis monomial whose
exponent is not a multiple of the stride and scales the rest by 2n/k, so the
normalized trace is an exact coordinate projection; the Galois-sum form is
kept as a cross-checking oracle.

The prioritized basis orders the power basis so that, for every power of two
b <= n, the last b positions span the dimension-b subring.  BKW elimination
then walks the basis front to back and lands in a subring automatically.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .fqring import RingElement, RingParams, center_mod


class NonSubringElement(ValueError):
    """Element has support outside the subring's basis exponents."""


@dataclass(frozen=True)
class TowerParams:
    """Subring S_q of R_q for the k-th cyclotomic field, k | 2n a power of two."""

    ring: RingParams
    k: int

    def __post_init__(self):
        m = self.ring.m
        if self.k < 2 or self.k & (self.k - 1) or self.k > m:
            raise ValueError(f"k must be a power of two in [2, {m}], got {self.k}")

    @property
    def m(self) -> int:
        return self.ring.m

    @property
    def degree(self) -> int:
        """Degree m/k of R_q over S_q (also the number of Galois conjugates)."""
        return self.m // self.k

    @property
    def B(self) -> int:
        """Dimension of S_q over F_q."""
        return self.k // 2

    @property
    def stride(self) -> int:
        """Gap between consecutive subring exponents; equals m/k = n/B."""
        return self.ring.n // self.B

    @property
    def subring_exponents(self) -> np.ndarray:
        return np.arange(0, self.ring.n, self.stride)

    @property
    def subring_params(self) -> RingParams:
        """S_q viewed standalone: F_q[y]/(y^B + 1) with y = z^stride."""
        return RingParams(self.B, self.ring.q)


@functools.lru_cache(maxsize=None)
def prioritized_order(ring: RingParams) -> np.ndarray:
    """Exponent order "eliminate first -> keep last".

    The reverse of the bit-reversal permutation on 0..n-1.  For every power
    of two b <= n the last b entries are exactly the multiples of n/b, i.e.
    the exponents spanning the dimension-b subring.
    """
    n = ring.n
    bits = n.bit_length() - 1
    order = np.zeros(n, dtype=np.int64)
    for i in range(n):
        v, r = i, 0
        for _ in range(bits):
            r = (r << 1) | (v & 1)
            v >>= 1
        order[n - 1 - i] = r
    order.setflags(write=False)
    return order


@functools.lru_cache(maxsize=None)
def _inverse_order(ring: RingParams) -> np.ndarray:
    order = prioritized_order(ring)
    inv = np.zeros_like(order)
    inv[order] = np.arange(ring.n)
    inv.setflags(write=False)
    return inv


def to_prioritized(x: RingElement) -> np.ndarray:
    """Coefficients reordered by prioritized_order (a plain vector)."""
    return x.coeffs[prioritized_order(x.params)]


def from_prioritized(ring: RingParams, vec) -> RingElement:
    coeffs = np.zeros(ring.n, dtype=np.int64)
    coeffs[prioritized_order(ring)] = vec
    return RingElement(ring, coeffs)


def galois_apply(x: RingElement, a: int) -> RingElement:
    """Apply the field automorphism z -> z^a (a odd, taken mod 2n)."""
    n = x.params.n
    m = 2 * n
    a = a % m
    if a % 2 == 0:
        raise ValueError("automorphisms require an odd exponent")
    idx = (np.arange(n) * a) % m
    sign = np.where(idx >= n, -1, 1)
    out = np.zeros(n, dtype=np.int64)
    out[idx % n] = sign * x.coeffs
    return RingElement(x.params, out)


def trace_galois(x: RingElement, t: TowerParams) -> RingElement:
    """Trace to S_q as the literal sum over Galois conjugates (test oracle).

    The conjugates fixing S_q are z -> z^a for a = 1 (mod k), 0 <= a < m.
    Quadratic in n; the projection form below is the performance path.
    """
    acc = x.params.zero()
    for a in range(1, t.m, t.k):
        acc = acc + galois_apply(x, a)
    return acc


def trace(x: RingElement, t: TowerParams) -> RingElement:
    """Trace to S_q: zero non-subring exponents, scale the rest by m/k."""
    out = np.zeros(x.params.n, dtype=np.int64)
    s = t.stride
    out[::s] = x.coeffs[::s] * t.degree
    return RingElement(x.params, out)


def normalized_trace(x: RingElement, t: TowerParams) -> RingElement:
    """(k/m) * trace: the exact coordinate projection onto S_q."""
    out = np.zeros(x.params.n, dtype=np.int64)
    s = t.stride
    out[::s] = x.coeffs[::s]
    return RingElement(x.params, out)


def subring_embed(t: TowerParams, vec) -> RingElement:
    """Lift a length-B coefficient vector of S_q into R_q."""
    vec = center_mod(vec, t.ring.q)
    if vec.shape != (t.B,):
        raise ValueError(f"expected {t.B} coefficients, got {vec.shape}")
    coeffs = np.zeros(t.ring.n, dtype=np.int64)
    coeffs[:: t.stride] = vec
    return RingElement(t.ring, coeffs)


def subring_extract(t: TowerParams, x: RingElement) -> np.ndarray:
    """Inverse of subring_embed; raises on support outside the subring."""
    mask = np.ones(t.ring.n, dtype=bool)
    mask[:: t.stride] = False
    if x.coeffs[mask].any():
        raise NonSubringElement(f"support outside exponent multiples of {t.stride}")
    return x.coeffs[:: t.stride].copy()


def is_subring_supported(t: TowerParams, x: RingElement) -> bool:
    mask = np.ones(t.ring.n, dtype=bool)
    mask[:: t.stride] = False
    return not x.coeffs[mask].any()


def block_zero_prefix(x: RingElement, blocks: int, blocksize: int) -> bool:
    """True iff the first blocks*blocksize prioritized coefficients are zero."""
    count = blocks * blocksize
    if count > x.params.n:
        raise ValueError("prefix exceeds ring dimension")
    return not to_prioritized(x)[:count].any()


@functools.lru_cache(maxsize=None)
def rotation_step(ring: RingParams, B: int) -> tuple[np.ndarray, np.ndarray]:
    """Signed permutation of prioritized positions under multiplication by z^(n/B).

    Returns (perm, sign): position p maps to perm[p] with sign[p].  Because
    n/B has 2-adic valuation log2(n/B), the permutation stabilizes every
    consecutive length-B block of the prioritized order, which is what lets
    BKW rotate samples without disturbing already-zeroed blocks.
    """
    n = ring.n
    order = prioritized_order(ring)
    inv = _inverse_order(ring)
    step = n // B
    e2 = order + step
    sign = np.where(e2 >= n, -1, 1).astype(np.int64)
    perm = inv[e2 % n]
    perm.setflags(write=False)
    sign.setflags(write=False)
    return perm, sign
