"""Backend equivalence and correctness of the hot-loop kernels."""

import numpy as np
import pytest

from hashtrick import _kernels
from hashtrick._kernels import available_backends, get_backend, pure
from hashtrick.rng import TABLE_ENTRIES, DoubleTabulation, mix64, stream_seed

BACKENDS = [get_backend(name) for name in available_backends()]
BACKEND_IDS = list(available_backends())


def _tables(seed, label):
    dtab = DoubleTabulation.from_seed(stream_seed(seed, label))
    return dtab.outer, dtab.inner


def _dtab_reference(outer, inner, key):
    """Independent scalar reimplementation of the two-level lookup."""
    derived = 0
    for c in range(8):
        derived ^= int(outer[c * 256 + ((key >> (8 * c)) & 0xFF)])
    out = 0
    for c in range(8):
        out ^= int(inner[c * 256 + ((derived >> (8 * c)) & 0xFF)])
    return out


def _run_cell_reference(bucket_tabs, sign_tabs, m, k, trials, eps_exponents):
    """Per-trial dict accumulation, no batching, no shared state."""
    bo, bi = bucket_tabs
    so, si = sign_tabs
    fails = [0] * len(eps_exponents)
    for i in range(trials):
        sums = {}
        for j in range(k):
            key = i * k + j
            b = _dtab_reference(bo, bi, key) % m
            s = 1 if (_dtab_reference(so, si, key) & 1) == 0 else -1
            sums[b] = sums.get(b, 0) + s
        s_total = sum(v * v for v in sums.values())
        dist = abs(s_total - k)
        for idx, t in enumerate(eps_exponents):
            if (dist << t) >= k:
                fails[idx] += 1
    return fails


@pytest.fixture(scope="module")
def table_pairs():
    seed = mix64(0xC0FFEE, 64, 8)
    return _tables(seed, "hash-bucket"), _tables(seed, "hash-sign")


class TestHashBatch:
    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_matches_scalar_reference(self, backend, table_pairs):
        (outer, inner), _ = table_pairs
        rng = np.random.default_rng(11)
        keys = rng.integers(0, 2**64, size=64, dtype=np.uint64)
        keys[0] = 0
        keys[1] = 2**64 - 1
        got = backend.dtab_hash_batch(outer, inner, keys)
        want = [_dtab_reference(outer, inner, int(key)) for key in keys]
        assert got.tolist() == want

    def test_backends_agree(self, table_pairs):
        if len(BACKENDS) < 2:
            pytest.skip("only one backend built")
        (outer, inner), _ = table_pairs
        rng = np.random.default_rng(12)
        keys = rng.integers(0, 2**64, size=4096, dtype=np.uint64)
        outs = [b.dtab_hash_batch(outer, inner, keys) for b in BACKENDS]
        assert np.array_equal(outs[0], outs[1])

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_empty_keys(self, backend, table_pairs):
        (outer, inner), _ = table_pairs
        out = backend.dtab_hash_batch(outer, inner, np.empty(0, dtype=np.uint64))
        assert out.shape == (0,)

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_rejects_wrong_table_size(self, backend, table_pairs):
        (outer, _), _ = table_pairs
        short = np.zeros(TABLE_ENTRIES - 1, dtype=np.uint64)
        with pytest.raises(ValueError):
            backend.dtab_hash_batch(short, outer, np.zeros(1, dtype=np.uint64))
        with pytest.raises(ValueError):
            backend.dtab_hash_batch(outer, short, np.zeros(1, dtype=np.uint64))


class TestRunCell:
    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_matches_per_trial_reference(self, backend, table_pairs):
        bucket_tabs, sign_tabs = table_pairs
        exps = list(range(0, 11))
        got = backend.run_cell(*bucket_tabs, *sign_tabs, 16, 4, 500, exps)
        want = _run_cell_reference(bucket_tabs, sign_tabs, 16, 4, 500, exps)
        assert got.tolist() == want

    def test_backends_agree_across_shapes(self):
        if len(BACKENDS) < 2:
            pytest.skip("only one backend built")
        exps = np.arange(0, 8, dtype=np.int64)
        for m, k in ((2, 2), (16, 7), (100, 7), (64, 16), (257, 3)):
            seed = mix64(99, m, k)
            bucket_tabs = _tables(seed, "hash-bucket")
            sign_tabs = _tables(seed, "hash-sign")
            outs = [b.run_cell(*bucket_tabs, *sign_tabs, m, k, 300, exps)
                    for b in BACKENDS]
            assert np.array_equal(outs[0], outs[1]), (m, k)

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_all_zero_tables_fail_every_trial(self, backend):
        # zero tables send every key to bucket 0 with sign +1, so k keys
        # pile up: S = k^2 and the distortion is k - 1 >= 1 at eps = 1
        zero = np.zeros(TABLE_ENTRIES, dtype=np.uint64)
        out = backend.run_cell(zero, zero, zero, zero, 8, 2, 50, [0])
        assert out.tolist() == [50]

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_identity_tables_never_fail(self, backend):
        # hash(key) = key for key < 256, so the first 64 trials of k = 4
        # keys land in 64 * 4 = 256 distinct buckets of m = 256: S = k
        ident = np.zeros(TABLE_ENTRIES, dtype=np.uint64)
        ident[0:256] = np.arange(256, dtype=np.uint64)
        out = backend.run_cell(ident, ident, ident, ident, 256, 4, 64,
                               list(range(0, 11)))
        assert out.tolist() == [0] * 11

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_threshold_tie_counts_as_failure(self, backend):
        # zero tables with k = 2 give distortion exactly 2; at exponent 0
        # the comparison is 2 >= 2, a tie, and must count
        zero = np.zeros(TABLE_ENTRIES, dtype=np.uint64)
        out = backend.run_cell(zero, zero, zero, zero, 4, 2, 10, [0])
        assert out.tolist() == [10]

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_trials_zero_and_empty_exponents(self, backend, table_pairs):
        bucket_tabs, sign_tabs = table_pairs
        out = backend.run_cell(*bucket_tabs, *sign_tabs, 8, 2, 0, [0, 1])
        assert out.tolist() == [0, 0]
        out = backend.run_cell(*bucket_tabs, *sign_tabs, 8, 2, 10, [])
        assert out.shape == (0,)

    @pytest.mark.parametrize("backend", BACKENDS, ids=BACKEND_IDS)
    def test_domain_validation(self, backend, table_pairs):
        bucket_tabs, sign_tabs = table_pairs
        for bad in ((0, 2, 1), (2, 0, 1), (2, 2, -1)):
            with pytest.raises(ValueError):
                backend.run_cell(*bucket_tabs, *sign_tabs, *bad, [0])
        with pytest.raises(ValueError):
            backend.run_cell(np.zeros(3, dtype=np.uint64), bucket_tabs[1],
                             *sign_tabs, 2, 2, 1, [0])

    def test_pure_batching_is_invisible(self, table_pairs, monkeypatch):
        bucket_tabs, sign_tabs = table_pairs
        exps = [0, 2, 4]
        whole = pure.run_cell(*bucket_tabs, *sign_tabs, 16, 7, 200, exps)
        monkeypatch.setattr(pure, "_BATCH_KEYS", 64)
        chopped = pure.run_cell(*bucket_tabs, *sign_tabs, 16, 7, 200, exps)
        assert np.array_equal(whole, chopped)


class TestBackendSelection:
    def test_module_exports_point_at_active_backend(self):
        active = get_backend()
        assert _kernels.dtab_hash_batch is active.dtab_hash_batch
        assert _kernels.run_cell is active.run_cell
        assert _kernels.BACKEND in available_backends()

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("HASHTRICK_BACKEND", "python")
        assert get_backend() is pure
        monkeypatch.delenv("HASHTRICK_BACKEND")
        assert get_backend() in (pure, *BACKENDS)

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            get_backend("fortran")
