import random
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umapstab import _kernels, _pykernels

try:
    from umapstab import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])


def _random_weights(rng, n, p_inf=0.4):
    w = rng.uniform(0.0, 10.0, size=(n, n))
    w = np.minimum(w, w.T)
    mask = rng.random((n, n)) < p_inf
    mask = mask | mask.T
    w[mask] = np.inf
    np.fill_diagonal(w, 0.0)
    return np.ascontiguousarray(w)


def _naive_fw(w):
    d = w.tolist()
    n = len(d)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return np.array(d)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_floyd_warshall_matches_scalar_loop(impl):
    rng = np.random.default_rng(1)
    for n in (1, 2, 5, 17):
        w = _random_weights(rng, n)
        d = w.copy()
        impl.floyd_warshall(d)
        assert np.array_equal(d, _naive_fw(w))


@needs_ext
def test_backends_bit_identical():
    rng = np.random.default_rng(7)
    for n in (3, 30, 64):
        w = _random_weights(rng, n, p_inf=0.7)
        a, b = w.copy(), w.copy()
        _pykernels.floyd_warshall(a)
        _ckernels.floyd_warshall(b)
        assert a.tobytes() == b.tobytes()
        for s in (0.5, 2.0, np.inf):
            assert np.array_equal(_pykernels.threshold_labels(a, s), _ckernels.threshold_labels(a, s))
        iu, ju = np.triu_indices(n, 1)
        order = np.lexsort((ju, iu, a[iu, ju]))
        us, vs = iu[order].astype(np.int64), ju[order].astype(np.int64)
        for x, y in zip(_pykernels.merge_sequence(n, us, vs), _ckernels.merge_sequence(n, us, vs)):
            assert np.array_equal(x, y)


def test_threshold_labels_use_least_index():
    d = np.array([[0, 5, 1], [5, 0, 1], [1, 1, 0]], dtype=float)
    for impl in BACKENDS:
        assert impl.threshold_labels(d, 1.0).tolist() == [0, 0, 0]
        assert impl.threshold_labels(d, 0.5).tolist() == [0, 1, 2]


def test_merge_sequence_records_absorbed_block():
    us = np.array([1, 0, 0], dtype=np.int64)
    vs = np.array([2, 2, 1], dtype=np.int64)
    for impl in BACKENDS:
        e, absorbed, into = impl.merge_sequence(3, us, vs)
        assert e.tolist() == [0, 1]
        assert absorbed.tolist() == [2, 1]
        assert into.tolist() == [1, 0]


def _pack(rows, nbits):
    nwords = max(1, (nbits + 63) // 64)
    arr = np.zeros((len(rows), nwords), dtype=np.uint64)
    for r, row in enumerate(rows):
        for b, bit in enumerate(row):
            if bit:
                arr[r, b >> 6] |= np.uint64(1) << np.uint64(b & 63)
    return arr


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 130), st.integers(0, 2**32 - 1).map(random.Random))
def test_gf2_rank_matches_dense_elimination(nrows, ncols, r):
    from oracles import gf2_rank_dense

    rows = [[r.random() < 0.3 for _ in range(ncols)] for _ in range(nrows)]
    expected = gf2_rank_dense(rows)
    for impl in BACKENDS:
        assert impl.gf2_rank(_pack(rows, ncols)) == expected


def test_env_var_forces_fallback():
    env = dict(os.environ, UMAPSTAB_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from umapstab import _kernels; print(_kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")
    if _ckernels is not None and not os.environ.get("UMAPSTAB_PURE_PYTHON"):
        assert _kernels.BACKEND == "cython"
