"""Backend selection and deterministic parallel dispatch for path kernels.

The compiled extension is preferred when importable; set ``QCLT_KERNELS`` to
``python`` or ``compiled`` to force a backend.  Worker threads split the
path range into contiguous chunks writing disjoint output slots, so results
are identical for every worker count (each path's stream depends only on
``(seed, path_index)``).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py
from .rng import stream_keys

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; numpy fallback only
    _compiled = None

_FORCED = os.environ.get("QCLT_KERNELS", "").strip().lower()
if _FORCED == "python":
    _impl = _kernels_py
elif _FORCED == "compiled":
    if _compiled is None:
        raise ImportError("QCLT_KERNELS=compiled but the extension is not built")
    _impl = _compiled
else:
    _impl = _compiled if _compiled is not None else _kernels_py

BACKEND = _impl.BACKEND_NAME


def available_backends() -> dict:
    """Importable kernel modules keyed by backend name."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def _chunks(num_paths: int, workers: int):
    workers = max(1, min(workers, num_paths))
    step = (num_paths + workers - 1) // workers
    return [(i, min(i + step, num_paths)) for i in range(0, num_paths, step)]


def _run(fn, num_paths: int, workers: int, args_for_chunk) -> None:
    spans = _chunks(num_paths, workers)
    if len(spans) == 1:
        fn(*args_for_chunk(*spans[0]))
        return
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        futures = [pool.submit(fn, *args_for_chunk(i0, i1)) for i0, i1 in spans]
        for fut in futures:
            fut.result()


def run_chain_paths(cum_rows, fvals, hmat, start, n_steps, num_paths, seed,
                    workers: int = 1, backend=None):
    """Sample ``num_paths`` chain paths; returns ``(sums, mart_sums, last_states)``."""
    impl = available_backends()[backend] if backend else _impl
    keys = stream_keys(seed, num_paths)
    out_s = np.empty(num_paths)
    out_m = np.empty(num_paths)
    out_last = np.empty(num_paths, dtype=np.int64)

    def args(i0, i1):
        return (cum_rows, fvals, hmat, start, n_steps, keys[i0:i1],
                out_s[i0:i1], out_m[i0:i1], out_last[i0:i1])

    _run(impl.chain_paths, num_paths, workers, args)
    return out_s, out_m, out_last


def run_torus_paths(alpha, lazy, omegas, ccos, csin, x0, n_steps, num_paths,
                    seed, workers: int = 1, backend=None):
    """Sample ``num_paths`` torus paths; returns ``(sums, last_positions)``."""
    impl = available_backends()[backend] if backend else _impl
    keys = stream_keys(seed, num_paths)
    out_s = np.empty(num_paths)
    out_x = np.empty(num_paths)

    def args(i0, i1):
        return (alpha, lazy, omegas, ccos, csin, x0, n_steps, keys[i0:i1],
                out_s[i0:i1], out_x[i0:i1])

    _run(impl.torus_paths, num_paths, workers, args)
    return out_s, out_x
