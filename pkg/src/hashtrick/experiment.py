"""The norm-distortion grid experiment and its analysis.

One cell of the grid is a (bucket count m, support size k) pair. Every
trial of a cell projects the unit flat vector on a fresh block of k keys
(trial i uses keys i*k .. i*k + k - 1) through a projection seeded by
mix64(master_seed, m, k), and records whether the squared norm moved by at
least eps for each eps in the grid. Failure fractions then feed three
analyses:

* ``compute_nu_hat``: the empirical tradeoff value, the largest 1/sqrt(k)
  whose failure fraction stays at or below delta for every larger k,
* ``ratio_analysis``: empirical-to-predicted ratio of that value inside
  the window where the middle-regime prediction applies, and
* ``border_analysis``: max_k of the failure fraction and the product
  m * eps^2 * delta_hat, which the variance bound caps near 2.

Results persist as CSV with exact decimal fields, and every artifact
embeds the configuration that produced it, so analysis re-runs on files
byte-for-byte reproducibly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from .projection import FeatureHasher, SparseVector
from .rng import mix64

RESULTS_MAGIC = "hashtrick-results v1"

DEFAULT_M_VALUES = tuple(2 ** e for e in range(6, 13))
DEFAULT_K_VALUES = tuple(sorted({7, *(2 ** e for e in range(1, 14))}))
DEFAULT_EPS_VALUES = tuple(Fraction(1, 2 ** t) for t in range(10, 0, -1))
DEFAULT_DELTA_VALUES = tuple(Fraction(1, 2 ** j) for j in range(20, -1, -1))
DEFAULT_TRIALS = 1 << 16
DEFAULT_SEED = 0xC0FFEE
MIN_TRIALS = 1 << 10
TRUNCATION_LOWER = 4  # window floor, in units of lg(1/delta)/eps^2

RESULTS_HEADER = "m,k,eps,trials,failures,delta_hat"
RATIOS_HEADER = "m,eps,delta,nu_hat,left,right,ratio,branch"
BORDER_HEADER = "m,eps,max_delta_hat,product"


class ResultsFormatError(ValueError):
    """A persisted results file failed to parse."""


def _pow2_exponent(value: Fraction, name: str) -> int:
    """Exponent t with value = 2^-t; rejects non-dyadic grid values."""
    if value.numerator != 1:
        raise ValueError(f"{name} values must be powers of two, got {value}")
    den = value.denominator
    if den & (den - 1) != 0:
        raise ValueError(f"{name} values must be powers of two, got {value}")
    return den.bit_length() - 1


def _validate_ascending(values: Sequence, name: str) -> None:
    if len(values) == 0:
        raise ValueError(f"{name} grid must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} grid must be strictly ascending")


@dataclass(frozen=True)
class GridSpec:
    """Experiment configuration: the grids, the trial count and the seed.

    All grids are strictly ascending. m values are powers of two (the
    bucket map reduces hashes with a mask there), eps values are powers of
    two in (0, 1) so the failure test is exact integer arithmetic, and the
    trial count is at least 1024 so binomial noise stays analyzable.
    """

    m_values: tuple[int, ...] = DEFAULT_M_VALUES
    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    eps_values: tuple[Fraction, ...] = DEFAULT_EPS_VALUES
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(
            self, "eps_values", tuple(Fraction(e) for e in self.eps_values)
        )
        _validate_ascending(self.m_values, "m")
        _validate_ascending(self.k_values, "k")
        _validate_ascending(self.eps_values, "eps")
        for m in self.m_values:
            if m < 1 or m & (m - 1) != 0:
                raise ValueError(f"m values must be positive powers of two, got {m}")
        for k in self.k_values:
            if k < 1:
                raise ValueError(f"k values must be positive, got {k}")
        for eps in self.eps_values:
            if not 0 < eps < 1:
                raise ValueError(f"eps values must lie in (0, 1), got {eps}")
            _pow2_exponent(eps, "eps")
        if self.trials < MIN_TRIALS:
            raise ValueError(f"trials must be at least {MIN_TRIALS}")
        if not 0 <= int(self.master_seed) < 1 << 64:
            raise ValueError("master_seed must fit in 64 bits")

    @property
    def eps_exponents(self) -> tuple[int, ...]:
        return tuple(_pow2_exponent(e, "eps") for e in self.eps_values)

    def cells(self) -> list[tuple[int, int]]:
        return [(m, k) for m in self.m_values for k in self.k_values]


@dataclass(frozen=True)
class GridCellStat:
    """Failure count of one (m, k, eps) cell."""

    m: int
    k: int
    eps: Fraction
    trials: int
    failures: int

    @property
    def delta_hat(self) -> Fraction:
        return Fraction(self.failures, self.trials)


@dataclass(frozen=True)
class NuEstimate:
    """Empirical tradeoff value at one (m, eps, delta) point.

    ``nu_hat`` is the largest 1/sqrt(k) on the k grid such that every
    k' >= k keeps its failure fraction at or below delta (ties pass);
    None when even the largest k fails, with ``k_hat`` the witness k.
    """

    m: int
    eps: Fraction
    delta: Fraction
    nu_hat: float | None
    k_hat: int | None

    @property
    def defined(self) -> bool:
        return self.nu_hat is not None


@dataclass(frozen=True)
class RatioRecord:
    """Empirical-to-predicted ratio inside the middle-regime window."""

    m: int
    eps: Fraction
    delta: Fraction
    nu_hat: float
    k_hat: int
    left: float
    right: float
    ratio: float
    branch: str


@dataclass(frozen=True)
class BorderRow:
    """Worst failure fraction over k for one (m, eps), and its scaled form."""

    m: int
    eps: Fraction
    max_delta_hat: Fraction
    product: Fraction  # m * eps^2 * max_delta_hat


def generate_cell_vectors(spec: GridSpec, m: int, k: int) -> Iterator[SparseVector]:
    """Unit flat trial vectors of one cell: trial i lives on keys i*k .. i*k+k-1.

    The construction is deterministic (all randomness sits in the hashes),
    and key blocks are disjoint across trials so trials never share keys.
    The m argument only names the cell; supports depend on k and the trial
    count alone.
    """
    del m
    value = 1.0 / math.sqrt(k)
    for i in range(spec.trials):
        base = i * k
        yield SparseVector((base + j, value) for j in range(k))


def run_cell(master_seed: int, m: int, k: int, trials: int,
             eps_values: Sequence[Fraction], backend: str | None = None) -> list[int]:
    """Failure counts of one cell, one count per eps value.

    The projection is seeded by mix64(master_seed, m, k), so any cell can
    be recomputed in isolation.
    """
    hasher = FeatureHasher.from_seed(mix64(master_seed, m, k), m, k)
    exps = np.asarray([_pow2_exponent(Fraction(e), "eps") for e in eps_values],
                      dtype=np.int64)
    kernel = _kernels.get_backend(backend)
    fails = kernel.run_cell(
        hasher.bucket_tab.outer, hasher.bucket_tab.inner,
        hasher.sign_tab.outer, hasher.sign_tab.inner,
        m, k, trials, exps,
    )
    return [int(f) for f in fails]


def _cell_worker(args) -> list[int]:
    master_seed, m, k, trials, eps_values, backend = args
    return run_cell(master_seed, m, k, trials, eps_values, backend)


def _exact_str(value: Fraction) -> str:
    """Exact string for a rational: finite decimal when one exists, else num/den.

    Denominators of the form 2^a * 5^b terminate in base 10; everything in
    the default grids does (eps and delta are dyadic, trials a power of
    two). Both forms round-trip through Fraction() unchanged.
    """
    value = Fraction(value)
    num, den = value.numerator, value.denominator
    if num == 0:
        return "0"
    twos = (den & -den).bit_length() - 1
    rest = den >> twos
    fives = 0
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"{num}/{den}"
    shift = max(twos, fives)
    if shift == 0:
        return str(num)
    scaled = abs(num) * 2 ** (shift - twos) * 5 ** (shift - fives)
    sign = "-" if num < 0 else ""
    digits = str(scaled).zfill(shift + 1)
    whole, frac = digits[:-shift], digits[-shift:].rstrip("0")
    if not frac:
        return sign + whole
    return f"{sign}{whole}.{frac}"


def _meta_lines(spec: GridSpec) -> list[str]:
    return [
        f"# {RESULTS_MAGIC}",
        f"# seed={spec.master_seed}",
        f"# trials={spec.trials}",
        "# m=" + ",".join(str(m) for m in spec.m_values),
        "# k=" + ",".join(str(k) for k in spec.k_values),
        "# eps=" + ",".join(_exact_str(e) for e in spec.eps_values),
    ]


def run_grid(spec: GridSpec, out_path: str | None = None, jobs: int = 1,
             backend: str | None = None) -> list[GridCellStat]:
    """Run every cell of the grid, streaming rows to ``out_path`` if given.

    Rows appear sorted by (m, k, eps) and are flushed cell by cell, so an
    interrupted run leaves a readable prefix of the file. Results do not
    depend on ``jobs`` or ``backend``.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    cells = spec.cells()
    stats: list[GridCellStat] = []
    out = open(out_path, "w", encoding="utf-8") if out_path is not None else None
    try:
        if out is not None:
            for line in _meta_lines(spec):
                print(line, file=out)
            print(RESULTS_HEADER, file=out)
            out.flush()

        def emit(m: int, k: int, fails: list[int]) -> None:
            for eps, failures in zip(spec.eps_values, fails):
                stat = GridCellStat(m, k, eps, spec.trials, failures)
                stats.append(stat)
                if out is not None:
                    print(
                        f"{m},{k},{_exact_str(eps)},{spec.trials},"
                        f"{failures},{_exact_str(stat.delta_hat)}",
                        file=out,
                    )
            if out is not None:
                out.flush()

        if jobs == 1:
            for m, k in cells:
                emit(m, k, run_cell(spec.master_seed, m, k, spec.trials,
                                    spec.eps_values, backend))
        else:
            args = [(spec.master_seed, m, k, spec.trials, spec.eps_values, backend)
                    for m, k in cells]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for (m, k), fails in zip(cells, pool.map(_cell_worker, args)):
                    emit(m, k, fails)
    finally:
        if out is not None:
            out.close()
    return stats


def write_results(path: str, spec: GridSpec, stats: Iterable[GridCellStat]) -> None:
    """Persist precomputed stats in the same format ``run_grid`` streams."""
    with open(path, "w", encoding="utf-8") as out:
        for line in _meta_lines(spec):
            print(line, file=out)
        print(RESULTS_HEADER, file=out)
        for stat in stats:
            print(
                f"{stat.m},{stat.k},{_exact_str(stat.eps)},{stat.trials},"
                f"{stat.failures},{_exact_str(stat.delta_hat)}",
                file=out,
            )


def read_results(path: str) -> tuple[dict[str, str], list[GridCellStat]]:
    """Parse a results file; malformed content names the offending line."""
    meta: dict[str, str] = {}
    stats: list[GridCellStat] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != RESULTS_HEADER:
                    raise ResultsFormatError(
                        f"{path}: line {lineno}: expected header {RESULTS_HEADER!r}, got {line!r}"
                    )
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 6:
                raise ResultsFormatError(
                    f"{path}: line {lineno}: expected 6 fields, got {len(fields)}"
                )
            try:
                m, k = int(fields[0]), int(fields[1])
                eps = Fraction(fields[2])
                trials, failures = int(fields[3]), int(fields[4])
                recorded = Fraction(fields[5])
            except (ValueError, ZeroDivisionError) as exc:
                raise ResultsFormatError(f"{path}: line {lineno}: {exc}") from None
            if m < 1 or k < 1 or trials < 1 or not 0 <= failures <= trials:
                raise ResultsFormatError(
                    f"{path}: line {lineno}: values out of range"
                )
            if recorded != Fraction(failures, trials):
                raise ResultsFormatError(
                    f"{path}: line {lineno}: delta_hat disagrees with failures/trials"
                )
            stats.append(GridCellStat(m, k, eps, trials, failures))
    if not header_seen:
        raise ResultsFormatError(f"{path}: missing header row")
    return meta, stats


def _stat_index(stats: Iterable[GridCellStat]) -> dict[tuple[int, int, Fraction], GridCellStat]:
    index: dict[tuple[int, int, Fraction], GridCellStat] = {}
    for stat in stats:
        index[(stat.m, stat.k, stat.eps)] = stat
    return index


def compute_nu_hat(stats: Iterable[GridCellStat], m: int, eps, delta,
                   k_values: Sequence[int] | None = None) -> NuEstimate:
    """Empirical tradeoff value at (m, eps, delta) from persisted stats.

    Requires a stat for every k on the grid at this (m, eps); missing
    cells are refused by name rather than silently treated as passes.
    """
    eps = Fraction(eps)
    delta = Fraction(delta)
    index = _stat_index(stats)
    if k_values is None:
        k_values = sorted({key[1] for key in index})
    if not k_values:
        raise ValueError("no k values available")
    missing = [(m, k) for k in k_values if (m, k, eps) not in index]
    if missing:
        raise ValueError(f"missing grid cells for eps={eps}: {missing}")
    best_k: int | None = None
    for k in sorted(k_values, reverse=True):
        if index[(m, k, eps)].delta_hat <= delta:
            best_k = k
        else:
            break
    if best_k is None:
        return NuEstimate(m, eps, delta, None, None)
    return NuEstimate(m, eps, delta, 1.0 / math.sqrt(best_k), best_k)


def in_truncation_window(m: int, eps: Fraction, delta: Fraction,
                         lower: int = TRUNCATION_LOWER) -> bool:
    """Exact test for lower * lg(1/delta) / eps^2 <= m < 2 / (eps^2 delta)."""
    j = _pow2_exponent(delta, "delta")
    if j < 1:
        return False  # delta = 1 has lg(1/delta) = 0; the prediction is vacuous
    eps_sq = eps * eps
    return m * eps_sq >= lower * j and m * eps_sq * delta < 2


def ratio_analysis(estimates: Iterable[NuEstimate],
                   scale_reference: float = 1.0,
                   lower: int = TRUNCATION_LOWER) -> list[RatioRecord]:
    """Ratios nu_hat / (sqrt(eps) * min(left, right)) inside the window.

    Undefined estimates and points outside the truncation window are
    skipped. ``scale_reference`` divides into the prediction when a
    nonunit middle-regime constant should be factored out.
    """
    records: list[RatioRecord] = []
    for est in estimates:
        if not est.defined:
            continue
        if not in_truncation_window(est.m, est.eps, est.delta, lower):
            continue
        j = _pow2_exponent(est.delta, "delta")
        eps = float(est.eps)
        left = math.log2(eps * est.m / j) / j
        right = math.sqrt(math.log2(eps * eps * est.m / j) / j)
        predicted = scale_reference * math.sqrt(eps) * min(left, right)
        branch = "left" if left < right else "right"
        records.append(RatioRecord(
            est.m, est.eps, est.delta, est.nu_hat, est.k_hat,
            left, right, est.nu_hat / predicted, branch,
        ))
    return records


def border_analysis(stats: Iterable[GridCellStat]) -> list[BorderRow]:
    """Worst failure fraction over k, per (m, eps), with m * eps^2 scaling."""
    worst: dict[tuple[int, Fraction], Fraction] = {}
    for stat in stats:
        key = (stat.m, stat.eps)
        current = worst.get(key)
        if current is None or stat.delta_hat > current:
            worst[key] = stat.delta_hat
    rows = []
    for (m, eps), max_delta in sorted(worst.items()):
        rows.append(BorderRow(m, eps, max_delta, m * eps * eps * max_delta))
    return rows


def analyze_results(stats: Iterable[GridCellStat],
                    delta_values: Sequence = DEFAULT_DELTA_VALUES,
                    scale_reference: float = 1.0,
                    lower: int = TRUNCATION_LOWER,
                    ) -> tuple[list[NuEstimate], list[RatioRecord], list[BorderRow]]:
    """Full analysis pass over persisted stats.

    Returns per-(m, eps, delta) tradeoff estimates, the in-window ratio
    records, and the border table.
    """
    stats = list(stats)
    index = _stat_index(stats)
    m_values = sorted({key[0] for key in index})
    eps_values = sorted({key[2] for key in index})
    k_values = sorted({key[1] for key in index})
    estimates = []
    for m in m_values:
        for eps in eps_values:
            for delta in delta_values:
                estimates.append(compute_nu_hat(stats, m, eps, delta, k_values))
    return estimates, ratio_analysis(estimates, scale_reference, lower), border_analysis(stats)


def write_ratios(path: str, records: Iterable[RatioRecord]) -> None:
    with open(path, "w", encoding="utf-8") as out:
        print(RATIOS_HEADER, file=out)
        for rec in records:
            print(
                f"{rec.m},{_exact_str(rec.eps)},{_exact_str(rec.delta)},"
                f"{rec.nu_hat!r},{rec.left!r},{rec.right!r},{rec.ratio!r},{rec.branch}",
                file=out,
            )


def write_border(path: str, rows: Iterable[BorderRow]) -> None:
    with open(path, "w", encoding="utf-8") as out:
        print(BORDER_HEADER, file=out)
        for row in rows:
            print(
                f"{row.m},{_exact_str(row.eps)},"
                f"{_exact_str(row.max_delta_hat)},{_exact_str(row.product)}",
                file=out,
            )
