# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled path kernels; algorithmically identical to _kernels_py.

Per path: a splitmix64 counter stream keyed off the path index drives
inverse-CDF transitions on precomputed cumulative kernel rows.  The chain
kernel is bit-for-bit identical to the numpy fallback; the torus kernel
matches up to libm rounding in cos/sin.
"""

from libc.math cimport cos, sin, floor

BACKEND_NAME = "compiled"

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long MIX_A = 0xBF58476D1CE4E5B9ULL
cdef unsigned long long MIX_B = 0x94D049BB133111EBULL
cdef double TWO_NEG53 = 1.0 / 9007199254740992.0


cdef inline unsigned long long _mix64(unsigned long long z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


def chain_paths(const double[:, ::1] cum_rows, const double[::1] fvals,
                const double[:, ::1] hmat,
                long start, long n_steps, const unsigned long long[::1] keys,
                double[::1] out_s, double[::1] out_m, long[::1] out_last):
    """Walk len(keys) paths of n_steps transitions from `start`."""
    cdef Py_ssize_t npaths = keys.shape[0]
    cdef Py_ssize_t i
    cdef long k, state, nxt
    cdef unsigned long long ctr, z
    cdef double u, s, m
    with nogil:
        for i in range(npaths):
            ctr = keys[i]
            state = start
            s = 0.0
            m = 0.0
            for k in range(n_steps):
                ctr += GOLDEN
                z = _mix64(ctr)
                u = <double>(z >> 11) * TWO_NEG53
                nxt = 0
                while u >= cum_rows[state, nxt]:
                    nxt += 1
                m += hmat[state, nxt]
                s += fvals[nxt]
                state = nxt
            out_s[i] = s
            out_m[i] = m
            out_last[i] = state


def torus_paths(double alpha, double lazy, const double[::1] omegas,
                const double[::1] ccos, const double[::1] csin, double x0, long n_steps,
                const unsigned long long[::1] keys, double[::1] out_s, double[::1] out_x):
    """Lazy +-alpha rotation walk on [0, 1) accumulating the observable sum."""
    cdef Py_ssize_t npaths = keys.shape[0]
    cdef Py_ssize_t nfreq = omegas.shape[0]
    cdef Py_ssize_t i, j
    cdef long k
    cdef unsigned long long ctr, z
    cdef double u, x, s, fval
    cdef double mid = lazy + 0.5 * (1.0 - lazy)
    with nogil:
        for i in range(npaths):
            ctr = keys[i]
            x = x0
            s = 0.0
            for k in range(n_steps):
                ctr += GOLDEN
                z = _mix64(ctr)
                u = <double>(z >> 11) * TWO_NEG53
                if u < lazy:
                    pass
                elif u < mid:
                    x = x + alpha
                else:
                    x = x - alpha
                x = x - floor(x)
                fval = 0.0
                for j in range(nfreq):
                    fval += ccos[j] * cos(x * omegas[j]) + csin[j] * sin(x * omegas[j])
                s += fval
            out_s[i] = s
            out_x[i] = x
