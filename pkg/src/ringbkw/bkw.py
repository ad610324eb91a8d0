"""BKW collision-table reduction with optional ring-symmetry keying.

Three variants share one pipeline of n/B tables over the prioritized basis:

- ``ring_blind``: each input sample is fed once; tables key on the current
  block after sign normalization (first nonzero entry made positive).
- ``traditional``: all n rotations (z^j a, z^j b) of each input are fed;
  keying as above.
- ``advanced``: n/B rotations are fed, and each table keys on a canonical
  representative of the 2B-element signed-rotation orbit of the block,
  shrinking tables by a factor of B.  Requires B a power of two so that
  rotation by z^(n/B) stabilizes every block.

Tables 1..n/B-1 match-and-emit; a collision emits the difference
(stored - incoming) one table down with depth bumped.  In one-difference
(od) mode a hit stores nothing; in all-differences (ad) mode every arrival
is stored and differenced against everything already under its key.  The
terminal table n/B only stores: arrivals are deduplicated exactly after
canonicalizing the (a, b) pair under sign and z^(n/B)-rotation, which makes
the od/ad outputs of the rotation-aware variants comparable.
"""

from __future__ import annotations

import struct
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .fqring import RingElement, RingParams, center_mod
from .sampling import Sample, rotate_sample
from .tower import TowerParams, prioritized_order, rotation_step

VARIANTS = ("ring_blind", "traditional", "advanced")
MODES = ("od", "ad")


@dataclass(frozen=True)
class ReductionConfig:
    tower: TowerParams
    variant: str = "advanced"
    mode: str = "od"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        n, B = self.tower.ring.n, self.tower.B
        if n % B or B >= n:
            raise ValueError(f"block size {B} must divide and be smaller than n={n}")

    @property
    def ring(self) -> RingParams:
        return self.tower.ring

    @property
    def B(self) -> int:
        return self.tower.B

    @property
    def num_tables(self) -> int:
        """Active tables 1..n/B-1 plus the terminal table n/B."""
        return self.ring.n // self.B

    @property
    def row_bound(self) -> int:
        """Hard cap on distinct keys per active table.

        Sign pairs halve the q^B - 1 nonzero blocks; the advanced variant
        additionally quotients by the B rotations (orbits are free because
        the block rotation has order exactly 2B with no nonzero fixed
        vectors), giving (q^B - 1) / 2B.
        """
        q, B = self.ring.q, self.B
        if self.variant == "advanced":
            return (q**B - 1) // (2 * B)
        return (q**B - 1) // 2

    @property
    def rotations_per_input(self) -> int:
        if self.variant == "ring_blind":
            return 1
        if self.variant == "traditional":
            return self.ring.n
        return self.ring.n // self.B


@dataclass(frozen=True)
class CanonicalKey:
    """Canonical block representative used as a table key.

    key: the normalized length-B block (centered residues).
    applied_rotation: exponent multiple of n/B realizing the representative.
    applied_sign: +-1 applied after rotating.
    self_match: two distinct signed rotations produced equal keys (always
    true for the zero block; impossible for nonzero blocks over odd q).
    """

    key: tuple[int, ...]
    applied_rotation: int
    applied_sign: int
    self_match: bool
    matches: tuple[tuple[int, int], ...] = ()


def _sign_normalize(block: np.ndarray) -> tuple[np.ndarray, int]:
    for v in block:
        if v > 0:
            return block, 1
        if v < 0:
            return -block, -1
    return block, 1


def canonicalize(block, variant: str, rotation: tuple[np.ndarray, np.ndarray] | None = None,
                 step: int = 0) -> CanonicalKey:
    """Choose the table key for a block whose earlier blocks are all zero.

    For ring_blind/traditional the key is the block with its first nonzero
    entry normalized into {1, ..., (q-1)/2}.  For advanced it is the minimum
    over all B rotations (acting through the block-local signed permutation
    `rotation`) and both signs, ordered lexicographically by absolute values
    then by the signed values; `step` is the rotation exponent n/B.
    `matches` lists every (rotation, sign) that realizes the canonical key;
    more than one entry means a self-match.
    """
    block = np.asarray(block, dtype=np.int64)
    if not block.any():
        return CanonicalKey(tuple(block), 0, 1, True, ((0, 1),))
    if variant != "advanced":
        norm, sgn = _sign_normalize(block)
        return CanonicalKey(tuple(norm), 0, sgn, False, ((0, sgn),))
    perm, sign = rotation
    candidates: list[tuple[tuple, int, int]] = []
    cur = block
    for t in range(len(block)):
        norm, sgn = _sign_normalize(cur)
        candidates.append(((tuple(np.abs(norm)), tuple(norm)), t * step, sgn))
        nxt = np.empty_like(cur)
        nxt[perm] = sign * cur
        cur = nxt
    best = min(c[0] for c in candidates)
    matches = tuple((rot, sgn) for cand, rot, sgn in candidates if cand == best)
    key = best[1]
    return CanonicalKey(key, matches[0][0], matches[0][1], len(matches) > 1, matches)


class BkwTable:
    """One keyed collision store; od keeps one sample per key, ad a list."""

    def __init__(self, index: int, bound: int, ad: bool):
        self.index = index
        self.bound = bound
        self.ad = ad
        self.entries: dict[int, list] = {}
        self.hits = 0
        self.stored = 0

    @property
    def rows(self) -> int:
        return len(self.entries)


@dataclass
class TableStats:
    rows_per_table: tuple[int, ...]
    stored_per_table: tuple[int, ...]
    hits_per_table: tuple[int, ...]
    table_size: int
    terminal_count: int
    fed_to_first: int

    @classmethod
    def empty(cls) -> "TableStats":
        return cls((), (), (), 0, 0, 0)


@dataclass
class ReductionResult:
    terminal_samples: list[Sample]
    stats: TableStats
    consumed: int
    exhausted: bool
    wall_seconds: float


class BkwTables:
    """The full table pipeline for one reduction run (single-threaded)."""

    def __init__(self, config: ReductionConfig):
        self.config = config
        ring = config.ring
        B = config.B
        self.order = prioritized_order(ring)
        self.step = ring.n // B
        perm, sign = rotation_step(ring, B)
        self._global_rot = (perm, sign)
        # block-local signed permutations, one per table index
        self._local_rot = []
        for i in range(config.num_tables):
            lo = i * B
            lperm = perm[lo:lo + B] - lo
            lsign = sign[lo:lo + B]
            self._local_rot.append((lperm, lsign))
        self.tables = [BkwTable(i + 1, config.row_bound, config.mode == "ad")
                       for i in range(config.num_tables - 1)]
        self.terminal: dict[tuple[bytes, bytes], Sample] = {}
        self.terminal_arrivals = 0
        self.fed_to_first = 0

    def _pack(self, block: tuple[int, ...]) -> int:
        q = self.config.ring.q
        acc = 0
        for v in reversed(block):
            acc = acc * q + (v % q)
        return acc

    def _rotate_full(self, s: Sample, prio: np.ndarray, times: int, sgn: int):
        """Apply (z^(n/B))^times then the sign to a sample and its prioritized view."""
        if times == 0 and sgn == 1:
            return s, prio
        h = (times * self.step) % (2 * self.config.ring.n)
        a = s.a.mul_zeta_pow(h)
        b = s.b.mul_zeta_pow(h)
        if sgn == -1:
            a, b = -a, -b
        perm, sign = self._global_rot
        cur = prio
        for _ in range(times):
            nxt = np.empty_like(cur)
            nxt[perm] = sign * cur
            cur = nxt
        if sgn == -1:
            cur = -cur
        return Sample(a, b, s.depth), cur

    def feed(self, sample: Sample) -> list[Sample]:
        """Cascade one sample through the tables; returns new terminal samples."""
        cfg = self.config
        B = cfg.B
        q = cfg.ring.q
        self.fed_to_first += 1
        out: list[Sample] = []
        tagged: deque = deque([(sample, sample.a.coeffs[self.order], 1)])
        while tagged:
            s, prio, i = tagged.popleft()
            if i == cfg.num_tables:
                added = self._store_terminal(s)
                if added is not None:
                    out.append(added)
                continue
            lo = (i - 1) * B
            block = prio[lo:lo + B]
            if not block.any():
                tagged.append((s, prio, i + 1))
                continue
            table = self.tables[i - 1]
            if cfg.variant == "advanced":
                ck = canonicalize(block, "advanced", self._local_rot[i - 1], self.step)
                times = ck.applied_rotation // self.step
                s_can, prio_can = self._rotate_full(s, prio, times, ck.applied_sign)
                if ck.self_match:
                    # two rotations agree on this block: their difference is
                    # already zero here, send it on like any collision
                    (r1, g1), (r2, g2) = ck.matches[0], ck.matches[1]
                    sa, pa = self._rotate_full(s, prio, r1 // self.step, g1)
                    sb, pb = self._rotate_full(s, prio, r2 // self.step, g2)
                    d = Sample(sa.a - sb.a, sa.b - sb.b, s.depth + 1)
                    tagged.append((d, center_mod(pa - pb, q), i + 1))
            else:
                ck = canonicalize(block, cfg.variant)
                if ck.applied_sign == -1:
                    s_can = Sample(-s.a, -s.b, s.depth)
                    prio_can = -prio
                else:
                    s_can, prio_can = s, prio
            key = self._pack(ck.key)
            row = table.entries.get(key)
            if row is None:
                table.entries[key] = [(s_can, prio_can)]
                table.stored += 1
                if table.rows > table.bound:
                    raise AssertionError(
                        f"table {table.index} exceeded row bound {table.bound}")
            elif table.ad:
                table.hits += 1
                for s0, p0 in row:
                    d = Sample(s0.a - s_can.a, s0.b - s_can.b,
                               max(s0.depth, s_can.depth) + 1)
                    tagged.append((d, center_mod(p0 - prio_can, q), i + 1))
                row.append((s_can, prio_can))
                table.stored += 1
            else:
                table.hits += 1
                s0, p0 = row[0]
                d = Sample(s0.a - s_can.a, s0.b - s_can.b,
                           max(s0.depth, s_can.depth) + 1)
                tagged.append((d, center_mod(p0 - prio_can, q), i + 1))
        return out

    def _store_terminal(self, s: Sample) -> Sample | None:
        self.terminal_arrivals += 1
        canon = self._canonical_pair(s)
        key = (canon.a.coeffs.tobytes(), canon.b.coeffs.tobytes())
        if key in self.terminal:
            return None
        self.terminal[key] = canon
        return canon

    def _canonical_pair(self, s: Sample) -> Sample:
        """Minimum of (a, b) over signs and z^(n/B)-rotations, lexicographic."""
        best = None
        for t in range(self.config.B):
            h = (t * self.step) % (2 * self.config.ring.n)
            a = s.a.mul_zeta_pow(h)
            b = s.b.mul_zeta_pow(h)
            for cand in (Sample(a, b, s.depth), Sample(-a, -b, s.depth)):
                rank = (tuple(cand.a.coeffs), tuple(cand.b.coeffs))
                if best is None or rank < best[0]:
                    best = (rank, cand)
        return best[1]

    def stats(self) -> TableStats:
        return TableStats(
            rows_per_table=tuple(t.rows for t in self.tables),
            stored_per_table=tuple(t.stored for t in self.tables),
            hits_per_table=tuple(t.hits for t in self.tables),
            table_size=sum(t.stored for t in self.tables),
            terminal_count=len(self.terminal),
            fed_to_first=self.fed_to_first,
        )

    def terminal_list(self) -> list[Sample]:
        return list(self.terminal.values())


def feed(sample: Sample, config: ReductionConfig, tables: BkwTables) -> list[Sample]:
    if tables.config != config:
        raise ValueError("tables were built for a different config")
    return tables.feed(sample)


def run_reduction(source, count: int, config: ReductionConfig,
                  tables: BkwTables | None = None) -> ReductionResult:
    """Feed `count` source samples (rotated per variant) through the pipeline.

    ring_blind feeds each input once, traditional all n rotations, advanced
    n/B rotations.  A short source is reported via `exhausted` with partial
    stats rather than an exception.
    """
    pipeline = tables if tables is not None else BkwTables(config)
    it = iter(source)
    consumed = 0
    exhausted = False
    t0 = time.perf_counter()
    for _ in range(count):
        try:
            s = next(it)
        except StopIteration:
            exhausted = True
            break
        consumed += 1
        for j in range(config.rotations_per_input):
            pipeline.feed(rotate_sample(s, j, "both"))
    wall = time.perf_counter() - t0
    return ReductionResult(pipeline.terminal_list(), pipeline.stats(),
                           consumed, exhausted, wall)


def table_stats(tables: BkwTables) -> TableStats:
    return tables.stats()


# ---------------------------------------------------------------------------
# Checkpointing: versioned binary snapshot so long reductions can resume.
# Layout (little-endian): magic, version, n, q, k, variant, mode, then per
# active table the stored samples in insertion order, then terminal samples.
# Keys are not serialized; they are recomputed on load (canonicalization is
# idempotent on stored representatives).  Format documented in docs/FORMATS.md.
# ---------------------------------------------------------------------------

_CKPT_MAGIC = b"RBKWTBL1"


def _write_sample(fh, s: Sample, q: int):
    fh.write(struct.pack("<I", s.depth))
    fh.write((s.a.coeffs % q).astype("<u2").tobytes())
    fh.write((s.b.coeffs % q).astype("<u2").tobytes())


def _read_sample(fh, ring: RingParams) -> Sample:
    depth = struct.unpack("<I", fh.read(4))[0]
    raw = np.frombuffer(fh.read(2 * 2 * ring.n), dtype="<u2").astype(np.int64)
    return Sample(RingElement(ring, raw[: ring.n]), RingElement(ring, raw[ring.n:]), depth)


def save_tables(tables: BkwTables, path):
    cfg = tables.config
    with open(path, "wb") as fh:
        fh.write(_CKPT_MAGIC)
        fh.write(struct.pack("<IIIIBBQQ", 1, cfg.ring.n, cfg.ring.q, cfg.tower.k,
                             VARIANTS.index(cfg.variant), MODES.index(cfg.mode),
                             tables.fed_to_first, tables.terminal_arrivals))
        for t in tables.tables:
            rows = [pair for row in t.entries.values() for pair in row]
            fh.write(struct.pack("<QQ", len(rows), t.hits))
            for s, _prio in rows:
                _write_sample(fh, s, cfg.ring.q)
        fh.write(struct.pack("<Q", len(tables.terminal)))
        for s in tables.terminal.values():
            _write_sample(fh, s, cfg.ring.q)


def load_tables(path) -> BkwTables:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CKPT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        version, n, q, k, vi, mi, fed, term_arr = struct.unpack("<IIIIBBQQ", fh.read(26))
        if version != 1:
            raise ValueError(f"unsupported checkpoint version {version}")
        ring = RingParams(n, q)
        cfg = ReductionConfig(TowerParams(ring, k), VARIANTS[vi], MODES[mi])
        tables = BkwTables(cfg)
        tables.fed_to_first = fed
        tables.terminal_arrivals = term_arr
        order = tables.order
        for t in tables.tables:
            count, hits = struct.unpack("<QQ", fh.read(16))
            t.hits = hits
            for _ in range(count):
                s = _read_sample(fh, ring)
                prio = s.a.coeffs[order]
                lo = (t.index - 1) * cfg.B
                block = prio[lo:lo + cfg.B]
                if cfg.variant == "advanced":
                    ck = canonicalize(block, "advanced",
                                      tables._local_rot[t.index - 1], tables.step)
                else:
                    ck = canonicalize(block, cfg.variant)
                key = tables._pack(ck.key)
                t.entries.setdefault(key, []).append((s, prio))
                t.stored += 1
        (count,) = struct.unpack("<Q", fh.read(8))
        for _ in range(count):
            s = _read_sample(fh, ring)
            tables.terminal[(s.a.coeffs.tobytes(), s.b.coeffs.tobytes())] = s
    return tables
