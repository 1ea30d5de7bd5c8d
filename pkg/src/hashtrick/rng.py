"""Seeded randomness primitives.

Everything random in this package is a pure function of a 64-bit seed.
Seeds expand through a splitmix-style mixer into degree-20 polynomials over
the field of integers modulo the Mersenne prime 2^61 - 1. Counter-mode
evaluation of those polynomials yields raw streams, and the streams fill
the lookup tables of two-level tabulation hashes over 64-bit keys.

Two rules keep results reproducible across versions and machines:

* every derivation step is integer arithmetic with a frozen definition
  (no floats, no platform-dependent state), and
* every consumer draws a fixed, documented number of stream outputs, so
  table contents never shift when unrelated code changes.
"""

from __future__ import annotations

import numpy as np

MERSENNE_P = (1 << 61) - 1
POLY_COEFF_COUNT = 21  # degree 20

CHAR_COUNT = 8  # 8-bit characters per 64-bit key
CHAR_SIZE = 256
TABLE_ENTRIES = CHAR_COUNT * CHAR_SIZE  # per tabulation level
RESIDUES_PER_ENTRY = 2  # two draws build one 64-bit table entry
DTAB_STREAM_DRAWS = 2 * TABLE_ENTRIES * RESIDUES_PER_ENTRY

_MASK64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _mix_step(z: int) -> int:
    # splitmix64 finalizer
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 sequence: returns (next_state, output)."""
    state = (state + _SPLITMIX_GAMMA) & _MASK64
    return state, _mix_step(state)


def mix64(*parts: int) -> int:
    """Fold integers into one well-mixed 64-bit value.

    Order-sensitive. This is the seed-derivation rule for the whole
    package, so the definition is frozen: start from zero and absorb each
    part with a splitmix64 step.
    """
    acc = 0
    for part in parts:
        acc = _mix_step((acc + _SPLITMIX_GAMMA + (part & _MASK64)) & _MASK64)
    return acc


def _label_tag(label: str) -> int:
    """Stable 64-bit tag for a stream label (ASCII only)."""
    raw = label.encode("ascii")
    return mix64(len(raw), *raw)


def stream_seed(master_seed: int, label: str, *params: int) -> int:
    """Seed of the (label, params) sub-stream of ``master_seed``."""
    return mix64(master_seed, _label_tag(label), *params)


class PolyHash:
    """Degree-20 polynomial over GF(2^61 - 1), evaluated by Horner's rule.

    Coefficients derive deterministically from a 64-bit seed: a splitmix64
    sequence is sampled and draws >= 2^61 - 1 are rejected, which makes
    each coefficient uniform over the field. Same seed, same polynomial.
    """

    __slots__ = ("coefficients", "seed")

    def __init__(self, coefficients, seed: int | None = None):
        coefficients = tuple(int(c) for c in coefficients)
        if len(coefficients) != POLY_COEFF_COUNT:
            raise ValueError(
                f"need exactly {POLY_COEFF_COUNT} coefficients, got {len(coefficients)}"
            )
        for c in coefficients:
            if not 0 <= c < MERSENNE_P:
                raise ValueError(f"coefficient {c} outside [0, 2^61 - 1)")
        self.coefficients = coefficients
        self.seed = seed

    @classmethod
    def from_seed(cls, seed: int) -> "PolyHash":
        state = seed & _MASK64
        coeffs: list[int] = []
        while len(coeffs) < POLY_COEFF_COUNT:
            state, value = splitmix64(state)
            if value < MERSENNE_P:
                coeffs.append(value)
        return cls(coeffs, seed=seed)

    def __call__(self, key: int) -> int:
        x = key % MERSENNE_P
        acc = 0
        # Horner, highest coefficient first.
        for c in reversed(self.coefficients):
            acc = (acc * x + c) % MERSENNE_P
        return acc


class PolyHashStream:
    """Counter-mode stream over a seeded polynomial: output i is poly(i).

    ``next_u64`` packs two consecutive outputs into one 64-bit value (low
    32 bits of each; the first draw becomes the high half). Residues are
    only 61 bits wide, so a single draw cannot fill a table entry.
    """

    __slots__ = ("poly", "position")

    def __init__(self, seed: int):
        self.poly = PolyHash.from_seed(seed)
        self.position = 0

    def next_residue(self) -> int:
        value = self.poly(self.position)
        self.position += 1
        return value

    def next_u64(self) -> int:
        hi = self.next_residue() & 0xFFFFFFFF
        lo = self.next_residue() & 0xFFFFFFFF
        return (hi << 32) | lo


class DoubleTabulation:
    """Two-level tabulation hash on 64-bit keys.

    The key splits little-endian into eight 8-bit characters. The first
    level XORs one outer-table entry per character into a derived 64-bit
    key; the second level sends the derived key through the inner tables
    the same way. Tables are flat uint64 arrays of 2048 entries indexed by
    ``character * 256 + byte`` and are frozen read-only.

    Filling from a stream consumes exactly ``DTAB_STREAM_DRAWS`` outputs:
    outer table first, entries in index order, two draws per entry.
    """

    __slots__ = ("outer", "inner")

    def __init__(self, outer: np.ndarray, inner: np.ndarray):
        outer = np.ascontiguousarray(outer, dtype=np.uint64)
        inner = np.ascontiguousarray(inner, dtype=np.uint64)
        if outer.shape != (TABLE_ENTRIES,) or inner.shape != (TABLE_ENTRIES,):
            raise ValueError(f"tables must be flat arrays of {TABLE_ENTRIES} entries")
        outer.flags.writeable = False
        inner.flags.writeable = False
        self.outer = outer
        self.inner = inner

    @classmethod
    def from_stream(cls, stream: PolyHashStream) -> "DoubleTabulation":
        tables = []
        for _ in range(2):
            table = np.empty(TABLE_ENTRIES, dtype=np.uint64)
            for i in range(TABLE_ENTRIES):
                table[i] = stream.next_u64()
            tables.append(table)
        return cls(tables[0], tables[1])

    @classmethod
    def from_seed(cls, seed: int) -> "DoubleTabulation":
        return cls.from_stream(PolyHashStream(seed))

    def __call__(self, key: int) -> int:
        if not 0 <= key < 1 << 64:
            raise ValueError("keys are 64-bit unsigned integers")
        derived = 0
        for c in range(CHAR_COUNT):
            derived ^= int(self.outer[(c << 8) | ((key >> (8 * c)) & 0xFF)])
        out = 0
        for c in range(CHAR_COUNT):
            out ^= int(self.inner[(c << 8) | ((derived >> (8 * c)) & 0xFF)])
        return out

    def hash_many(self, keys) -> np.ndarray:
        """Hash an array of uint64 keys; same values as calling one by one."""
        from ._kernels import dtab_hash_batch

        return dtab_hash_batch(self.outer, self.inner, keys)


def derive_streams(master_seed: int, m: int = 0, k: int = 0) -> tuple[PolyHashStream, PolyHashStream]:
    """Split a master seed into (vector_stream, hashing_stream).

    The two sides never share a polynomial: vector generation draws from
    the "vec" lineage and hashing from the "hash" lineage. The hashing
    side fans out further per concern (projection uses "hash-bucket" and
    "hash-sign" sub-seeds of the same master). Distinct (m, k) pairs give
    distinct streams on both sides.
    """
    return (
        PolyHashStream(stream_seed(master_seed, "vec", m, k)),
        PolyHashStream(stream_seed(master_seed, "hash", m, k)),
    )
