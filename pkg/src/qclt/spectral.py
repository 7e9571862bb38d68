"""Spectral measures of observables and the condition integrals built on them.

For a reversible chain the symmetrized kernel ``S = D^{1/2} Q D^{-1/2}``
(``D = diag(pi)``) is a symmetric matrix whose eigendecomposition gives the
atomic spectral measure of an observable ``f``: atom ``i`` sits at eigenvalue
``t_i`` and carries mass ``(u_i . D^{1/2} f)^2``.  Group walks contribute
measures with complex atoms on the closed unit disk; those are built by the
:mod:`qclt.group_walk` module and consumed by the same integral evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import FiniteChain, Observable, inner_product
from .errors import (
    BadIndexOrder,
    DivergentIntegral,
    JacobiNoConvergence,
    NotReversible,
)

JACOBI_REL_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
ATOM_MERGE_TOL = 1e-10
MASS_SINGULARITY_TOL = 1e-9    # atoms lighter than this may sit on a pole
LOCATION_SINGULARITY_TOL = 1e-12
TOTAL_MASS_RTOL = 1e-9


@dataclass(frozen=True)
class SpectralMeasure:
    """Atomic spectral measure: locations with nonnegative masses.

    Locations are real in [-1, 1] for reversible chains and complex in the
    closed unit disk for group walks.  ``total`` is the sum of the masses,
    which equals the squared L2(pi) norm of the observable.
    """

    locations: np.ndarray
    masses: np.ndarray
    total: float

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.locations)

    def __post_init__(self):
        if np.min(self.masses, initial=0.0) < 0.0:
            raise ValueError("spectral masses must be nonnegative")
        if np.max(np.abs(self.locations), initial=0.0) > 1.0 + 1e-12:
            raise ValueError("spectral locations must lie in the closed unit disk")


def _off_diag_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.linalg.norm(off))


def jacobi_eigh(sym: np.ndarray, rel_tol: float = JACOBI_REL_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every upper-triangle pair in turn until the off-diagonal
    Frobenius norm falls below ``rel_tol`` times the Frobenius norm of the
    input.  Returns ``(eigenvalues, eigenvectors)`` with orthonormal
    eigenvector columns.

    Raises
    ------
    JacobiNoConvergence
        If the sweep limit is reached first (pathological input).
    """
    a = np.array(sym, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if scale == 0.0 or n == 1:
        return np.diag(a).copy(), v
    for _ in range(max_sweeps):
        if _off_diag_norm(a) <= rel_tol * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # classical symmetric Schur rotation zeroing a[p, q]
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    if _off_diag_norm(a) <= rel_tol * scale:
        return np.diag(a).copy(), v
    raise JacobiNoConvergence(
        f"off-diagonal norm {_off_diag_norm(a)!r} after {max_sweeps} sweeps"
    )


def _merge_atoms(locations: np.ndarray, masses: np.ndarray):
    # Degenerate eigenvalues must not create spurious distinct atoms, so
    # locations within ATOM_MERGE_TOL are pooled (mass-weighted position).
    order = np.argsort(locations)
    locs, mass = locations[order], masses[order]
    out_loc, out_mass = [], []
    i = 0
    while i < len(locs):
        j = i
        while j + 1 < len(locs) and locs[j + 1] - locs[i] <= ATOM_MERGE_TOL:
            j += 1
        m = float(np.sum(mass[i:j + 1]))
        if m > 0.0:
            loc = float(np.sum(locs[i:j + 1] * mass[i:j + 1]) / m)
            out_loc.append(loc)
            out_mass.append(m)
        i = j + 1
    return np.asarray(out_loc), np.asarray(out_mass)


def spectral_measure(chain: FiniteChain, f: Observable) -> SpectralMeasure:
    """Spectral measure of ``f`` with respect to the kernel.

    Requires a reversible chain.  Eigenvalues within 1e-10 of each other are
    merged into a single atom; zero-mass atoms are dropped.  The total mass
    always reproduces ``<f, f>_pi`` (checked to 1e-9 relative), and for a
    mean-zero observable on an irreducible chain there is no mass at 1.
    """
    if not chain.flags.reversible:
        raise NotReversible("spectral measures are computed for reversible chains only")
    pi = chain.stationary
    rt = np.sqrt(pi)
    sym = (rt[:, None] * chain.kernel) / rt[None, :]
    sym = 0.5 * (sym + sym.T)  # kill roundoff asymmetry from detailed balance
    eigvals, eigvecs = jacobi_eigh(sym)
    weights = eigvecs.T @ (rt * f.values)
    locations = np.clip(eigvals, -1.0, 1.0)
    locations, masses = _merge_atoms(locations, weights * weights)
    # roundoff-sized atoms (relative to the total) are dropped so that e.g.
    # eigendirections orthogonal to f do not show up as spurious atoms
    keep = masses > 1e-14 * float(np.sum(masses))
    locations, masses = locations[keep], masses[keep]
    total = float(np.sum(masses))
    norm_sq = f.norm_sq
    if norm_sq > 0.0 and abs(total - norm_sq) > TOTAL_MASS_RTOL * max(total, norm_sq):
        raise JacobiNoConvergence(
            f"spectral mass {total!r} does not reproduce <f,f> = {norm_sq!r}"
        )
    if chain.flags.irreducible and len(masses):
        at_one = masses[np.abs(locations - 1.0) <= LOCATION_SINGULARITY_TOL]
        if at_one.sum() > MASS_SINGULARITY_TOL:
            raise NotReversible(
                "mean-zero observable carries mass at eigenvalue 1 on an "
                "irreducible chain; input is inconsistent"
            )
    return SpectralMeasure(locations=locations, masses=masses, total=total)


def _log_plus(u: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(u), 0.0)


def _weight_sr(t):
    return 1.0 / (1.0 - t)


def _weight_sr2(t):
    with np.errstate(divide="ignore"):
        inner = np.abs(np.log(1.0 - t))
    return _log_plus(inner) ** 2 / (1.0 - t)


def _weight_sigma_sq(t):
    return (1.0 + t) / (1.0 - t)


def _weight_sn(z):
    return 1.0 / np.abs(1.0 - z)


def _weight_sn1(z):
    gap = np.abs(1.0 - z)
    with np.errstate(divide="ignore"):
        return np.abs(np.log(gap)) / gap


# Condition integrands keyed by the names used in reports.  SR, SR2 and
# sigma_sq act on real spectra; SN and SN1 accept unit-disk locations.
WEIGHTS = {
    "SR": (_weight_sr, True),
    "SR2": (_weight_sr2, True),
    "sigma_sq": (_weight_sigma_sq, True),
    "SN": (_weight_sn, False),
    "SN1": (_weight_sn1, False),
}


def spectral_integral(measure: SpectralMeasure, weight: str, custom=None) -> float:
    """Integrate a named condition weight against the measure.

    ``weight`` is one of ``SR`` (``1/(1-t)``), ``SR2``
    (``(log+ |log(1-t)|)^2/(1-t)``), ``sigma_sq`` (``(1+t)/(1-t)``),
    ``SN`` (``1/|1-z|``), ``SN1`` (``|log|1-z||/|1-z|``), or ``custom`` with a
    caller-supplied integrand evaluated at the atom locations.

    Atoms within 1e-12 of the pole at 1 are skipped when their mass is
    roundoff-sized (at most 1e-9); heavier atoms there raise
    :class:`DivergentIntegral`, signalling that the condition fails.
    """
    if weight == "custom":
        if custom is None:
            raise ValueError("weight='custom' requires an integrand")
        fn, keep = custom, np.ones(len(measure.masses), dtype=bool)
    else:
        try:
            fn, real_only = WEIGHTS[weight]
        except KeyError:
            raise ValueError(f"unknown weight {weight!r}") from None
        if real_only and not measure.is_real:
            raise NotReversible(f"weight {weight!r} requires a real-supported measure")
        near_pole = np.abs(measure.locations - 1.0) <= LOCATION_SINGULARITY_TOL
        heavy = measure.masses > MASS_SINGULARITY_TOL
        if np.any(near_pole & heavy):
            i = int(np.nonzero(near_pole & heavy)[0][0])
            raise DivergentIntegral(
                f"atom at {measure.locations[i]!r} with mass {measure.masses[i]!r} "
                f"sits on the singularity of weight {weight!r}"
            )
        keep = ~near_pole
    if not np.any(keep):
        return 0.0
    vals = np.asarray(fn(measure.locations[keep]), dtype=np.float64)
    return float(np.sum(vals * measure.masses[keep]))


def _power_block_sum(t: np.ndarray, m: int, n: int) -> np.ndarray:
    # sum_{k=m}^{n-1} t^k, stable at t = +-1 and for large exponents.
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    near_one = np.abs(1.0 - t) < 1e-12
    safe = ~near_one
    ts = t[safe]
    out[safe] = (ts ** m - ts ** n) / (1.0 - ts)
    out[near_one] = float(n - m)
    return out


def kernel_gap_msq_spectral(measure: SpectralMeasure, m: int, n: int) -> float:
    """Mean square of the horizon gap of martingale-difference kernels,
    evaluated spectrally.

    Returns ``sum_i (1 - t_i^2) (sum_{k=m}^{n-1} t_i^k)^2 mass_i`` for a
    real-supported measure; this equals the direct pair-space moment
    computed by :func:`qclt.martingale.kernel_gap_msq`.
    """
    if m >= n:
        raise BadIndexOrder(f"need m < n, got m={m}, n={n}")
    if m < 1:
        raise BadIndexOrder(f"need m >= 1, got m={m}")
    if not measure.is_real:
        raise NotReversible("horizon-gap moments require a real-supported measure")
    t = measure.locations
    block = _power_block_sum(t, m, n)
    return float(np.sum((1.0 - t * t) * block * block * measure.masses))


def variance_growth(chain: FiniteChain, f: Observable, n: int) -> float:
    """Exact ``var(S_n)/n`` for the stationary partial sum of ``f``.

    Computed as ``(1/n) [n <f,f> + 2 sum_{k=1}^{n-1} (n-k) <f, Q^k f>]``
    with iterated kernel applications; no simulation involved.
    """
    if n < 1:
        raise BadIndexOrder(f"need n >= 1, got n={n}")
    pi, q = chain.stationary, chain.kernel
    fv = f.values
    acc = float(n) * f.norm_sq
    qkf = fv.copy()
    for k in range(1, n):
        qkf = q @ qkf
        acc += 2.0 * float(n - k) * float(np.sum(pi * fv * qkf))
    return acc / float(n)


def variance_tail_constant(measure: SpectralMeasure) -> float:
    """Constant ``C = sum_i mass_i |t_i| / (1 - t_i)^2`` controlling the
    approach of ``var(S_n)/n`` to its limit: the gap is at most ``4C/n``."""
    t = measure.locations
    if not measure.is_real:
        raise NotReversible("variance tail constant requires a real-supported measure")
    near_one = np.abs(1.0 - t) <= LOCATION_SINGULARITY_TOL
    if np.any(near_one & (measure.masses > MASS_SINGULARITY_TOL)):
        raise DivergentIntegral("variance tail constant diverges with mass at 1")
    keep = ~near_one
    tt = t[keep]
    return float(np.sum(measure.masses[keep] * np.abs(tt) / (1.0 - tt) ** 2))


def sigma_sq_identity_gap(chain: FiniteChain, f: Observable, n: int) -> float:
    """Convenience: ``|var(S_n)/n - integral((1+t)/(1-t))|`` at horizon n."""
    measure = spectral_measure(chain, f)
    return abs(variance_growth(chain, f, n) - spectral_integral(measure, "sigma_sq"))
