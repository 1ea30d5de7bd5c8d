"""The feature-hashing projection.

A projection is described by a bucket count m, a bucket map and a sign map
over 64-bit keys. Applying it to a sparse vector adds sign(j) * x_j into
bucket(j) for every entry j, so each input coordinate lands in exactly one
output coordinate.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Iterator

import numpy as np

from .rng import DoubleTabulation, PolyHashStream, stream_seed

KAHAN_THRESHOLD = 10**6  # entries; beyond this, accumulate with compensation


class SparseVector:
    """Immutable sparse vector over the 64-bit key space.

    Entries are (index, value) pairs with strictly increasing indices and
    finite nonzero values. Norms are computed once at construction and
    cached.
    """

    __slots__ = ("entries", "nnz", "norm2", "norm_inf")

    def __init__(self, entries: Iterable[tuple[int, float]]):
        clean = tuple((int(i), float(v)) for i, v in entries)
        prev = -1
        for idx, val in clean:
            if not 0 <= idx < 1 << 64:
                raise ValueError(f"index {idx} outside the 64-bit key space")
            if idx <= prev:
                raise ValueError("indices must be strictly increasing")
            if not math.isfinite(val) or val == 0.0:
                raise ValueError(f"value at index {idx} must be finite and nonzero")
            prev = idx
        self.entries = clean
        self.nnz = len(clean)
        self.norm2 = math.sqrt(math.fsum(v * v for _, v in clean))
        self.norm_inf = max((abs(v) for _, v in clean), default=0.0)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        """Build from unordered pairs; duplicate indices are rejected."""
        return cls(sorted(pairs, key=lambda p: p[0]))

    @classmethod
    def from_text(cls, lines: Iterable[str]) -> "SparseVector":
        """Parse the line format ``index value``; blanks and # comments skipped."""
        pairs = []
        for lineno, line in enumerate(lines, start=1):
            body = line.strip()
            if not body or body.startswith("#"):
                continue
            fields = body.split()
            if len(fields) != 2:
                raise ValueError(f"line {lineno}: expected 'index value', got {body!r}")
            try:
                pairs.append((int(fields[0], 0), float(fields[1])))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls.from_pairs(pairs)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(self.entries)

    def __repr__(self) -> str:
        return f"SparseVector(nnz={self.nnz}, norm2={self.norm2!r})"


class FeatureHasher:
    """Projection parameters: m buckets plus bucket and sign maps.

    ``bucket_fn`` takes a 64-bit key into [0, m) and ``sign_fn`` into
    {-1, +1}; both may be arbitrary callables, which keeps tiny projections
    enumerable in tests. ``from_seed`` builds both from two independent
    tabulation hashes (bucket: hash mod m; sign: lowest hash bit, zero
    meaning +1) derived from the "hash-bucket" and "hash-sign" lineages of
    the master seed.
    """

    __slots__ = ("m", "bucket_fn", "sign_fn", "bucket_tab", "sign_tab")

    def __init__(self, m: int, bucket_fn: Callable[[int], int], sign_fn: Callable[[int], int]):
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise ValueError("m must be a positive integer")
        self.m = m
        self.bucket_fn = bucket_fn
        self.sign_fn = sign_fn
        self.bucket_tab: DoubleTabulation | None = None
        self.sign_tab: DoubleTabulation | None = None

    @classmethod
    def from_seed(cls, master_seed: int, m: int, k: int = 0) -> "FeatureHasher":
        bucket_tab = DoubleTabulation.from_stream(
            PolyHashStream(stream_seed(master_seed, "hash-bucket", m, k))
        )
        sign_tab = DoubleTabulation.from_stream(
            PolyHashStream(stream_seed(master_seed, "hash-sign", m, k))
        )

        def bucket_fn(key: int) -> int:
            return bucket_tab(key) % m

        def sign_fn(key: int) -> int:
            return 1 if (sign_tab(key) & 1) == 0 else -1

        hasher = cls(m, bucket_fn, sign_fn)
        hasher.bucket_tab = bucket_tab
        hasher.sign_tab = sign_tab
        return hasher


def project(hasher: FeatureHasher, x: SparseVector) -> np.ndarray:
    """Apply the projection; out[i] sums sign(j) * x_j over keys with bucket j = i."""
    out = np.zeros(hasher.m, dtype=np.float64)
    for key, value in x.entries:
        out[hasher.bucket_fn(key)] += hasher.sign_fn(key) * value
    return out


def projected_norm_sq(hasher: FeatureHasher, x: SparseVector) -> float:
    """Squared 2-norm of project(hasher, x) without materializing the output.

    Streams over entries accumulating per-bucket sums. Beyond
    KAHAN_THRESHOLD entries the per-bucket accumulation is compensated, so
    rounding stays negligible against distortions as small as 2^-10.
    """
    sums: dict[int, float] = {}
    if x.nnz <= KAHAN_THRESHOLD:
        for key, value in x.entries:
            b = hasher.bucket_fn(key)
            sums[b] = sums.get(b, 0.0) + hasher.sign_fn(key) * value
    else:
        comp: dict[int, float] = {}
        for key, value in x.entries:
            b = hasher.bucket_fn(key)
            term = hasher.sign_fn(key) * value - comp.get(b, 0.0)
            total = sums.get(b, 0.0)
            fresh = total + term
            comp[b] = (fresh - total) - term
            sums[b] = fresh
    return math.fsum(s * s for s in sums.values())
