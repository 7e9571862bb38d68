"""Pure numpy path kernels; drop-in fallback for the compiled extension.

Both backends implement the identical per-path recurrence, so the chain
kernel is bit-for-bit reproducible across backends (all operations are
integer mixes, table lookups and float additions applied in the same order).
The torus kernel matches up to libm rounding in cos/sin.
"""

from __future__ import annotations

import numpy as np

from .rng import GOLDEN, TWO_NEG53, mix64_vec

BACKEND_NAME = "python"

_G = np.uint64(GOLDEN)
_S11 = np.uint64(11)


def _uniforms(counters: np.ndarray) -> np.ndarray:
    # advance every stream one draw, in place, and return the uniforms
    counters += _G
    z = mix64_vec(counters)
    return (z >> _S11).astype(np.float64) * TWO_NEG53


def chain_paths(cum_rows, fvals, hmat, start, n_steps, keys,
                out_s, out_m, out_last) -> None:
    """Walk ``len(keys)`` paths of ``n_steps`` transitions from ``start``.

    ``cum_rows`` holds per-row cumulative kernel sums with the last column
    pinned at 1.0.  Writes the additive functional sum, the martingale sum
    and the final state for each path into the ``out_*`` slots.
    """
    npaths = keys.shape[0]
    ctr = keys.astype(np.uint64).copy()
    state = np.full(npaths, start, dtype=np.int64)
    s = np.zeros(npaths)
    m = np.zeros(npaths)
    for _ in range(n_steps):
        u = _uniforms(ctr)
        rows = cum_rows[state]                       # (npaths, n_states)
        nxt = (u[:, None] >= rows).sum(axis=1)       # first j with u < cum[j]
        m += hmat[state, nxt]
        s += fvals[nxt]
        state = nxt
    out_s[:] = s
    out_m[:] = m
    out_last[:] = state


def torus_paths(alpha, lazy, omegas, ccos, csin, x0, n_steps, keys,
                out_s, out_x) -> None:
    """Lazy +-alpha rotation walk on [0, 1) accumulating the observable sum.

    The observable is ``f(x) = sum_j ccos[j] cos(omegas[j] x) +
    csin[j] sin(omegas[j] x)`` with ``omegas`` the pre-scaled angular
    frequencies ``2 pi nu``.  Step rule per uniform ``u``: stay if
    ``u < lazy``, step ``+alpha`` if ``u < lazy + (1 - lazy)/2``, else
    ``-alpha``.
    """
    npaths = keys.shape[0]
    ctr = keys.astype(np.uint64).copy()
    x = np.full(npaths, x0, dtype=np.float64)
    s = np.zeros(npaths)
    mid = lazy + 0.5 * (1.0 - lazy)
    for _ in range(n_steps):
        u = _uniforms(ctr)
        x = np.where(u < lazy, x, np.where(u < mid, x + alpha, x - alpha))
        x -= np.floor(x)
        phase = x[:, None] * omegas[None, :]
        s += np.cos(phase) @ ccos + np.sin(phase) @ csin
    out_s[:] = s
    out_x[:] = x
