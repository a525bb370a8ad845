"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 50 100 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from umapstab import _pykernels

try:
    from umapstab import _ckernels
except ImportError:
    _ckernels = None


def _weights(rng, n, p_inf=0.8):
    w = rng.uniform(0.0, 10.0, size=(n, n))
    w = np.minimum(w, w.T)
    mask = rng.random((n, n)) < p_inf
    w[mask | mask.T] = np.inf
    np.fill_diagonal(w, 0.0)
    return np.ascontiguousarray(w)


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n, repeat, rng):
    w = _weights(rng, n)
    d = w.copy()
    _pykernels.floyd_warshall(d)
    iu, ju = np.triu_indices(n, 1)
    keep = np.isfinite(d[iu, ju])
    iu, ju = iu[keep], ju[keep]
    order = np.lexsort((ju, iu, d[iu, ju]))
    us, vs = iu[order].astype(np.int64), ju[order].astype(np.int64)
    bits = rng.random((n, 4 * n)) < 0.1
    packed = np.packbits(bits, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    packed = np.ascontiguousarray(np.pad(packed, ((0, 0), (0, pad))).view(np.uint64))

    rows = []
    for name, call in [
        ("floyd_warshall", lambda k: k.floyd_warshall(w.copy())),
        ("threshold_labels", lambda k: k.threshold_labels(d, 5.0)),
        ("merge_sequence", lambda k: k.merge_sequence(n, us, vs)),
        ("gf2_rank", lambda k: k.gf2_rank(packed.copy())),
    ]:
        t_py = _best(lambda: call(_pykernels), repeat)
        t_c = _best(lambda: call(_ckernels), repeat) if _ckernels else float("nan")
        rows.append((name, n, t_py, t_c))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'n':>6}{'python [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, size, t_py, t_c in bench(n, args.repeat, rng):
            speed = t_py / t_c if t_c == t_c and t_c > 0 else float("nan")
            print(f"{name:<18}{size:>6}{t_py:>14.5f}{t_c:>14.5f}{speed:>10.1f}")


if __name__ == "__main__":
    main()
