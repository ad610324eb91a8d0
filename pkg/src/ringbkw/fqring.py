"""Exact arithmetic in F_q and R_q = F_q[x]/(x^n + 1) on the power basis.

Elements are coefficient vectors on the basis 1, z, ..., z^(n-1), where z is
a primitive 2n-th root of unity identified with x, so z^n = -1.  All residues
are kept in the centered range [-(q-1)/2, (q-1)/2]; that makes "small" error
coefficients and sign normalization directly testable.

Multiplication has two interchangeable paths: a schoolbook negacyclic
convolution (always available, the correctness baseline) and a negacyclic NTT
used automatically when q = 1 (mod 2n).  Both paths agree bit-exactly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np


class ParameterMismatch(ValueError):
    """Operands live in different rings."""


class NotInvertible(ArithmeticError):
    """The element is a zero divisor (its polynomial shares a factor with x^n + 1)."""


def is_prime(v: int) -> bool:
    if v < 2:
        return False
    if v % 2 == 0:
        return v == 2
    d = 3
    while d * d <= v:
        if v % d == 0:
            return False
        d += 2
    return True


def center_mod(values, q: int) -> np.ndarray:
    """Reduce integers mod q into the centered range [-(q-1)/2, (q-1)/2]."""
    half = (q - 1) // 2
    return (np.asarray(values, dtype=np.int64) + half) % q - half


@dataclass(frozen=True)
class RingParams:
    """Parameters of R_q = F_q[x]/(x^n + 1) with n a power of two, q an odd prime.

    Since q is an odd prime and 2n is a power of two, q never divides 2n,
    so q is automatically unramified.  n = 1 is permitted for internal
    subring views (the ring degenerates to F_q with x = -1).
    """

    n: int
    q: int

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got {self.n}")
        if self.q < 3 or self.q % 2 == 0 or not is_prime(self.q):
            raise ValueError(f"q must be an odd prime, got {self.q}")

    @property
    def m(self) -> int:
        return 2 * self.n

    @property
    def half(self) -> int:
        return (self.q - 1) // 2

    @property
    def ntt_available(self) -> bool:
        return (self.q - 1) % (2 * self.n) == 0 and self.n > 1

    def element(self, coeffs) -> "RingElement":
        return RingElement(self, coeffs)

    def zero(self) -> "RingElement":
        return RingElement(self, np.zeros(self.n, dtype=np.int64))

    def one(self) -> "RingElement":
        c = np.zeros(self.n, dtype=np.int64)
        c[0] = 1
        return RingElement(self, c)

    def zeta_pow(self, h: int) -> "RingElement":
        """The monomial z^h, for any integer h (taken mod 2n)."""
        h = h % self.m
        c = np.zeros(self.n, dtype=np.int64)
        if h < self.n:
            c[h] = 1
        else:
            c[h - self.n] = -1
        return RingElement(self, c)

    def random_element(self, rng: np.random.Generator) -> "RingElement":
        return RingElement(self, rng.integers(0, self.q, self.n))


class RingElement:
    """Immutable element of R_q, stored as centered coefficients of z^i."""

    __slots__ = ("params", "coeffs")

    def __init__(self, params: RingParams, coeffs):
        arr = center_mod(coeffs, params.q)
        if arr.shape != (params.n,):
            raise ValueError(f"expected {params.n} coefficients, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("RingElement is immutable")

    def _check(self, other: "RingElement"):
        if self.params != other.params:
            raise ParameterMismatch(f"{self.params} vs {other.params}")

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.params, self.coeffs + other.coeffs)

    def __sub__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.params, self.coeffs - other.coeffs)

    def __neg__(self) -> "RingElement":
        return RingElement(self.params, -self.coeffs)

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        if self.params.ntt_available:
            return mul_ntt(self, other)
        return mul_schoolbook(self, other)

    def scale(self, c: int) -> "RingElement":
        return RingElement(self.params, self.coeffs * (c % self.params.q))

    def mul_zeta_pow(self, h: int) -> "RingElement":
        """Multiply by z^h as a signed cyclic shift, in O(n).

        Equivalent to ``self * params.zeta_pow(h)``: coefficients move up by
        h positions and pick up a minus sign on each wrap past z^n = -1.
        """
        n = self.params.n
        h = h % (2 * n)
        sign = 1
        if h >= n:
            sign, h = -1, h - n
        out = np.roll(self.coeffs, h) * sign
        if h:
            out[:h] = -out[:h]
        return RingElement(self.params, out)

    def inverse(self) -> "RingElement":
        return inverse(self)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RingElement)
            and self.params == other.params
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.params, self.coeffs.tobytes()))

    def __repr__(self):
        return f"RingElement(n={self.params.n}, q={self.params.q}, {self.coeffs.tolist()})"


def mul_schoolbook(x: RingElement, y: RingElement) -> RingElement:
    """Negacyclic product via full convolution then reduction by x^n = -1."""
    n = x.params.n
    conv = np.convolve(x.coeffs, y.coeffs)
    out = conv[:n].copy()
    if n > 1:
        out[: n - 1] -= conv[n:]
    return RingElement(x.params, out)


@functools.lru_cache(maxsize=None)
def _ntt_context(n: int, q: int):
    """Precompute twiddle tables for the negacyclic NTT (requires 2n | q-1)."""
    # find a generator of F_q^* by trial against the prime factors of q-1
    factors, rem = [], q - 1
    d = 2
    while d * d <= rem:
        if rem % d == 0:
            factors.append(d)
            while rem % d == 0:
                rem //= d
        d += 1
    if rem > 1:
        factors.append(rem)
    g = 2
    while any(pow(g, (q - 1) // p, q) == 1 for p in factors):
        g += 1
    psi = pow(g, (q - 1) // (2 * n), q)  # primitive 2n-th root of unity
    psi_pows = np.array([pow(psi, i, q) for i in range(n)], dtype=np.int64)
    ipsi = pow(psi, q - 2, q)
    ipsi_pows = np.array([pow(ipsi, i, q) for i in range(n)], dtype=np.int64)
    omega = pow(psi, 2, q)
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.int64)
    for i in range(n):
        b, r = i, 0
        for _ in range(bits):
            r = (r << 1) | (b & 1)
            b >>= 1
        rev[i] = r
    stage_tw = []
    length = 2
    while length <= n:
        w = pow(omega, n // length, q)
        stage_tw.append(np.array([pow(w, j, q) for j in range(length // 2)], dtype=np.int64))
        length *= 2
    n_inv = pow(n, q - 2, q)
    return psi_pows, ipsi_pows, rev, stage_tw, n_inv


def _ntt(values: np.ndarray, q: int, rev, stage_tw) -> np.ndarray:
    a = values[rev].copy()
    n = a.size
    length = 2
    for tw in stage_tw:
        half = length // 2
        blocks = a.reshape(n // length, length)
        lo = blocks[:, :half].copy()
        hi = (blocks[:, half:] * tw) % q
        blocks[:, :half] = (lo + hi) % q
        blocks[:, half:] = (lo - hi) % q
        length *= 2
    return a


def mul_ntt(x: RingElement, y: RingElement) -> RingElement:
    """Negacyclic product via length-n NTT; requires q = 1 (mod 2n)."""
    p = x.params
    if not p.ntt_available:
        raise ValueError(f"no 2n-th root of unity mod {p.q} for n={p.n}")
    psi_pows, ipsi_pows, rev, stage_tw, n_inv = _ntt_context(p.n, p.q)
    q = p.q
    fx = _ntt((x.coeffs % q) * psi_pows % q, q, rev, stage_tw)
    fy = _ntt((y.coeffs % q) * psi_pows % q, q, rev, stage_tw)
    prod = fx * fy % q
    # inverse transform = conjugate transform with inverted twiddles
    inv = _ntt(prod, q, rev, [pow_table_inv(tw, q) for tw in stage_tw])
    out = inv * n_inv % q * ipsi_pows % q
    return RingElement(p, out)


@functools.lru_cache(maxsize=None)
def _inv_table_cache(key):
    tw, q = key
    arr = np.array([pow(int(v), q - 2, q) for v in tw], dtype=np.int64)
    return arr


def pow_table_inv(tw: np.ndarray, q: int) -> np.ndarray:
    return _inv_table_cache((tuple(int(v) for v in tw), q))


# ---------------------------------------------------------------------------
# Polynomial toolkit over F_q (dense lists, ascending degree, trimmed).
# Used for inversion, factoring x^n + 1 and quotient maps; kept separate from
# the vectorized ring arithmetic because it handles arbitrary degrees.
# ---------------------------------------------------------------------------


def _trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a: list[int], b: list[int], q: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % q
    return _trim(out)


def _poly_divmod(a: list[int], b: list[int], q: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    quot = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], q - 2, q)
    while len(a) >= len(b) and _trim(a):
        shift = len(a) - len(b)
        c = a[-1] * inv_lead % q
        quot[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % q
        _trim(a)
    return _trim(quot), a


def _poly_sub(a: list[int], b: list[int], q: int) -> list[int]:
    out = [0] * max(len(a), len(b))
    for i, v in enumerate(a):
        out[i] = v
    for i, v in enumerate(b):
        out[i] = (out[i] - v) % q
    return _trim(out)


def _poly_gcdex(a: list[int], b: list[int], q: int):
    """Extended gcd: returns (g, u, v) with u*a + v*b = g, g monic (or [])."""
    r0, r1 = _trim(list(a)), _trim(list(b))
    u0, u1 = [1], []
    v0, v1 = [], [1]
    while r1:
        quot, rem = _poly_divmod(r0, r1, q)
        r0, r1 = r1, rem
        u0, u1 = u1, _poly_sub(u0, _poly_mul(quot, u1, q), q)
        v0, v1 = v1, _poly_sub(v0, _poly_mul(quot, v1, q), q)
    if r0:
        lead_inv = pow(r0[-1], q - 2, q)
        r0 = [c * lead_inv % q for c in r0]
        u0 = [c * lead_inv % q for c in u0]
        v0 = [c * lead_inv % q for c in v0]
    return r0, u0, v0


def _poly_powmod(a: list[int], e: int, mod: list[int], q: int) -> list[int]:
    result = [1]
    base = _poly_divmod(a, mod, q)[1]
    while e:
        if e & 1:
            result = _poly_divmod(_poly_mul(result, base, q), mod, q)[1]
        base = _poly_divmod(_poly_mul(base, base, q), mod, q)[1]
        e >>= 1
    return result


def _modulus_poly(n: int) -> list[int]:
    f = [0] * (n + 1)
    f[0] = 1
    f[n] = 1
    return f


def _element_poly(x: RingElement) -> list[int]:
    return _trim([int(c) % x.params.q for c in x.coeffs])


def inverse(x: RingElement) -> RingElement:
    """Multiplicative inverse via extended Euclid on polynomial representatives.

    Raises NotInvertible when gcd(poly(x), x^n + 1) != 1, i.e. when x lies in
    the kernel of some CRT factor map.  Works for every splitting type of q.
    """
    p = x.params
    a = _element_poly(x)
    g, u, _ = _poly_gcdex(a, _modulus_poly(p.n), p.q)
    if len(g) != 1:
        raise NotInvertible(f"gcd with x^{p.n}+1 has degree {len(g) - 1}")
    u = u + [0] * (p.n - len(u))
    return RingElement(p, np.array(u[: p.n], dtype=np.int64))


@functools.lru_cache(maxsize=None)
def crt_factors(params: RingParams, seed: int = 0) -> tuple[tuple[int, ...], ...]:
    """Factor x^n + 1 into monic irreducibles over F_q.

    All factors share the same degree d = ord_{2n}(q) (the residue degree),
    so a seeded equal-degree split suffices.  Factors are returned as tuples
    of ascending coefficients, sorted for a canonical order; the product of
    the factors is x^n + 1.  Deterministic for a fixed seed.
    """
    n, q = params.n, params.q
    d = 1
    acc = q % (2 * n)
    while acc != 1:
        acc = acc * q % (2 * n)
        d += 1
    f = _modulus_poly(n)
    rng = np.random.default_rng(seed)
    factors: list[list[int]] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if len(g) - 1 == d:
            factors.append(g)
            continue
        while True:
            a = [int(v) for v in rng.integers(0, q, len(g) - 1)]
            if not _trim(list(a)):
                continue
            b = _poly_powmod(a, (q**d - 1) // 2, g, q)
            b = _trim([(c - (1 if i == 0 else 0)) % q for i, c in enumerate(b + [0])])
            h, _, _ = _poly_gcdex(b, g, q)
            if 0 < len(h) - 1 < len(g) - 1:
                stack.append(h)
                stack.append(_poly_divmod(g, h, q)[0])
                break
    return tuple(sorted(tuple(p) for p in factors))


def quotient_map(x: RingElement, g) -> np.ndarray:
    """Image of x in F_q[x]/(g): the polynomial remainder mod g, centered.

    g is one of the crt_factors; the map is a ring homomorphism.  Returns a
    vector of length deg(g).
    """
    q = x.params.q
    _, rem = _poly_divmod(_element_poly(x), list(g), q)
    deg = len(g) - 1
    rem = rem + [0] * (deg - len(rem))
    return center_mod(np.array(rem[:deg], dtype=np.int64), q)


# ---------------------------------------------------------------------------
# Canonical embedding diagnostics (floating point).
# ---------------------------------------------------------------------------


def canonical_embedding(x: RingElement, lift: str = "centered") -> np.ndarray:
    """Evaluate x at the n primitive 2n-th roots of unity e^(i*pi*t/n), t odd.

    Integer lifts of the coefficients follow the requested convention
    ('centered' or 'nonnegative').  Diagnostic only; uses complex floats.
    """
    n = x.params.n
    if lift == "centered":
        c = x.coeffs.astype(np.float64)
    elif lift == "nonnegative":
        c = (x.coeffs % x.params.q).astype(np.float64)
    else:
        raise ValueError(f"unknown lift convention {lift!r}")
    t = np.arange(1, 2 * n, 2)
    powers = np.exp(1j * math.pi * np.outer(t, np.arange(n)) / n)
    return powers @ c


def pairing(x: RingElement, y: RingElement) -> float:
    """Trace-form inner product under which the power basis is orthogonal.

    All embeddings of a 2n-th cyclotomic field (n >= 2) are complex, and both
    members of each conjugate pair are summed, hence the factor 1/2.  For
    basis monomials, pairing(z^i, z^i) = n/2 and cross terms vanish.
    """
    sx = canonical_embedding(x)
    sy = canonical_embedding(y)
    return 0.5 * float(np.sum(sx * np.conj(sy)).real)
