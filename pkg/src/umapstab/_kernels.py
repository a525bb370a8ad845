"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``UMAPSTAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("UMAPSTAB_PURE_PYTHON", "") not in ("", "0"):
    from umapstab import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from umapstab import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from umapstab import _pykernels as _impl

        BACKEND = "python"

floyd_warshall = _impl.floyd_warshall
threshold_labels = _impl.threshold_labels
merge_sequence = _impl.merge_sequence
gf2_rank = _impl.gf2_rank

__all__ = ["BACKEND", "floyd_warshall", "threshold_labels", "merge_sequence", "gf2_rank"]
