"""Pure Python / numpy implementations of the hot kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``_kernels`` picks one at import.
"""

import numpy as np


def floyd_warshall(d):
    """All-pairs shortest paths, in place, on a C-contiguous float64 matrix.

    Pivot order is 0..n-1.  Row and column ``k`` are fixed points of pass ``k``
    (the diagonal is zero), so this vectorised pass produces bit-identical
    results to the scalar triple loop.
    """
    n = d.shape[0]
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)


def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def threshold_labels(d, s):
    """Label each index by the least index of its component in {d <= s}."""
    n = d.shape[0]
    parent = list(range(n))
    iu, ju = np.nonzero(np.triu(d <= s, 1))
    for i, j in zip(iu.tolist(), ju.tolist()):
        ri = _find(parent, i)
        rj = _find(parent, j)
        if ri != rj:
            if ri < rj:
                parent[rj] = ri
            else:
                parent[ri] = rj
    return np.array([_find(parent, i) for i in range(n)], dtype=np.int64)


def merge_sequence(n, us, vs):
    """Replay edges in the given order through union-find.

    Returns ``(edge_index, absorbed, into)`` arrays, one entry per edge that
    joins two blocks.  Blocks are represented by their least index; the block
    with the larger representative is absorbed.
    """
    parent = list(range(n))
    eidx, absorbed, into = [], [], []
    for e, (u, v) in enumerate(zip(us.tolist(), vs.tolist())):
        ru = _find(parent, u)
        rv = _find(parent, v)
        if ru == rv:
            continue
        lo, hi = (ru, rv) if ru < rv else (rv, ru)
        parent[hi] = lo
        eidx.append(e)
        absorbed.append(hi)
        into.append(lo)
    return (
        np.array(eidx, dtype=np.int64),
        np.array(absorbed, dtype=np.int64),
        np.array(into, dtype=np.int64),
    )


def gf2_rank(rows):
    """Rank over GF(2) of a bit-packed uint64 matrix (one row per vector).

    The array is consumed (reduced in place).
    """
    nrows, nwords = rows.shape
    vecs = []
    for r in range(nrows):
        v = 0
        for w in range(nwords - 1, -1, -1):
            v = (v << 64) | int(rows[r, w])
        if v:
            vecs.append(v)
    pivots = {}
    rank = 0
    for v in vecs:
        while v:
            top = v.bit_length() - 1
            p = pivots.get(top)
            if p is None:
                pivots[top] = v
                rank += 1
                break
            v ^= p
    return rank
