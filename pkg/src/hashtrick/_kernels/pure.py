"""Numpy fallback for the compiled kernels.

Identical outputs to hashtrick._kernels._core, just slower. The grid-cell
loop is vectorized per batch of trials: hash every key of the batch, sort
by (trial, bucket), reduce segments to bucket sums, square and scatter the
squares back onto trials.
"""

from __future__ import annotations

import numpy as np

TABLE_ENTRIES = 2048
_BATCH_KEYS = 1 << 18


def _as_tables(arr) -> np.ndarray:
    table = np.ascontiguousarray(arr, dtype=np.uint64)
    if table.shape != (TABLE_ENTRIES,):
        raise ValueError(f"tabulation tables must be flat arrays of {TABLE_ENTRIES} entries")
    return table.reshape(8, 256)


def dtab_hash_batch(outer, inner, keys) -> np.ndarray:
    """Hash an array of uint64 keys through one double-tabulation instance."""
    outer8 = _as_tables(outer)
    inner8 = _as_tables(inner)
    keys = np.ascontiguousarray(keys, dtype=np.uint64)
    derived = np.zeros_like(keys)
    for c in range(8):
        chars = ((keys >> np.uint64(8 * c)) & np.uint64(0xFF)).astype(np.intp)
        derived ^= outer8[c][chars]
    out = np.zeros_like(keys)
    for c in range(8):
        chars = ((derived >> np.uint64(8 * c)) & np.uint64(0xFF)).astype(np.intp)
        out ^= inner8[c][chars]
    return out


def run_cell(bucket_outer, bucket_inner, sign_outer, sign_inner,
             m, k, trials, eps_exponents) -> np.ndarray:
    """Failure counts per epsilon for one (m, k) cell.

    Trial i projects the unit flat vector on keys i*k .. i*k + k - 1.
    With S the sum of squared signed bucket counts, the trial fails at
    epsilon 2^-t exactly when |S - k| * 2^t >= k (integer arithmetic, so
    ties are failures).
    """
    m = int(m)
    k = int(k)
    trials = int(trials)
    if m < 1 or k < 1 or trials < 0:
        raise ValueError("need m >= 1, k >= 1, trials >= 0")
    exps = np.ascontiguousarray(eps_exponents, dtype=np.int64)
    fails = np.zeros(exps.shape[0], dtype=np.int64)
    batch_trials = max(1, _BATCH_KEYS // k)
    start = 0
    while start < trials:
        n = min(batch_trials, trials - start)
        keys = np.arange(start * k, (start + n) * k, dtype=np.uint64)
        buckets = (dtab_hash_batch(bucket_outer, bucket_inner, keys) % np.uint64(m)).astype(np.int64)
        sign_bits = dtab_hash_batch(sign_outer, sign_inner, keys) & np.uint64(1)
        signs = np.where(sign_bits == np.uint64(0), 1, -1).astype(np.int64)
        trial_ids = np.repeat(np.arange(n, dtype=np.int64), k)
        composite = trial_ids * m + buckets
        order = np.argsort(composite, kind="stable")
        comp_sorted = composite[order]
        sign_sorted = signs[order]
        seg_starts = np.flatnonzero(np.r_[True, comp_sorted[1:] != comp_sorted[:-1]])
        bucket_sums = np.add.reduceat(sign_sorted, seg_starts)
        seg_trials = comp_sorted[seg_starts] // m
        s_per_trial = np.zeros(n, dtype=np.int64)
        np.add.at(s_per_trial, seg_trials, bucket_sums * bucket_sums)
        dist = np.abs(s_per_trial - k)
        for idx in range(exps.shape[0]):
            fails[idx] += int(np.count_nonzero((dist << exps[idx]) >= k))
        start += n
    return fails
