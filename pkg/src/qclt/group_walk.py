"""Random walks on finite abelian groups and the lazy torus rotation walk.

A step measure ``nu`` on a product of cyclic groups induces the kernel
``Q(x, y) = nu(y - x)``; the Haar (uniform) law is stationary, characters
diagonalize the kernel with multipliers ``nuhat(g)``, and every condition
sum becomes a finite Fourier sum.  The torus walk with irrational step is
handled by direct floating-point simulation plus per-frequency series data;
``{n alpha}`` quantities use the distance to the nearest integer, with the
raw fractional part reported alongside.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chain import FiniteChain, Observable, make_chain
from .errors import (
    BadProbabilities,
    DegenerateSigma,
    DimensionMismatch,
    EmptySample,
    EmptySupport,
    NotErgodic,
    RationalAlpha,
)
from .simulate import SimulationReport, ks_distance, standard_normal_cdf
from .spectral import SpectralMeasure, spectral_integral, spectral_measure

GOLDEN_ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
PROB_TOL = 1e-12
ERGODIC_TOL = 1e-12
RATIONAL_DENOMINATOR_CAP = 10 ** 6
RATIONAL_GAP_TOL = 1e-14


# ---------------------------------------------------------------------------
# finite abelian groups

@dataclass(frozen=True)
class GroupWalk:
    """Random walk on a product of cyclic groups, with its induced chain."""

    moduli: tuple
    atoms: tuple                 # ((element tuple, probability), ...)
    symmetric: bool
    ergodic: bool
    chain: FiniteChain
    elements: tuple              # all group elements in chain-state order


def _reduce(element, moduli) -> tuple:
    if isinstance(element, (int, np.integer)):
        element = (int(element),)
    if len(element) != len(moduli):
        raise DimensionMismatch(
            f"element {element!r} does not match moduli {moduli!r}"
        )
    return tuple(int(e) % m for e, m in zip(element, moduli))


def _neg(element, moduli) -> tuple:
    return tuple((-e) % m for e, m in zip(element, moduli))


def _sub(a, b, moduli) -> tuple:
    return tuple((x - y) % m for x, y, m in zip(a, b, moduli))


def character_values(moduli, g, elements) -> np.ndarray:
    """Values of the character indexed by ``g`` at the listed elements."""
    ang = np.zeros(len(elements))
    for d, m in enumerate(moduli):
        ang += (2.0 * math.pi * g[d] / m) * np.array([e[d] for e in elements], dtype=float)
    return np.exp(1j * ang)


def build_group_walk(moduli, atoms) -> GroupWalk:
    """Materialize the walk of a step measure as a finite chain.

    ``atoms`` maps group elements (ints for a single cyclic factor, tuples
    for products) to probabilities.  Duplicated elements are pooled after
    reduction mod the moduli.  The walk is symmetric iff the step measure
    equals its reflection, which is exactly reversibility of the chain; the
    ergodicity flag checks that no non-identity character has multiplier 1.
    """
    moduli = tuple(int(m) for m in (moduli if hasattr(moduli, "__len__") else [moduli]))
    if any(m < 1 for m in moduli):
        raise BadProbabilities(f"moduli must be positive, got {moduli}")
    items = atoms.items() if hasattr(atoms, "items") else list(atoms)
    pooled: dict = {}
    for element, prob in items:
        p = float(prob)
        if p < 0.0:
            raise BadProbabilities(f"negative probability {p} for element {element!r}")
        key = _reduce(element, moduli)
        pooled[key] = pooled.get(key, 0.0) + p
    pooled = {k: v for k, v in pooled.items() if v > 0.0}
    if not pooled:
        raise EmptySupport("the step measure has no atoms with positive mass")
    total = sum(pooled.values())
    if abs(total - 1.0) > PROB_TOL:
        raise BadProbabilities(f"step probabilities sum to {total!r}")

    elements = tuple(itertools.product(*(range(m) for m in moduli)))
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    kernel = np.zeros((n, n))
    for x, ex in enumerate(elements):
        for step, p in pooled.items():
            ey = tuple((a + b) % m for a, b, m in zip(ex, step, moduli))
            kernel[x, index[ey]] += p
    labels = [",".join(str(c) for c in e) if len(moduli) > 1 else str(e[0])
              for e in elements]
    pi = np.full(n, 1.0 / n)
    chain = make_chain(labels, kernel, stationary=pi)

    symmetric = all(abs(pooled.get(_neg(e, moduli), 0.0) - p) <= PROB_TOL
                    for e, p in pooled.items())
    nuhat = _nuhat_all(moduli, pooled, elements)
    ergodic = bool(np.all(np.abs(nuhat[1:] - 1.0) > ERGODIC_TOL))
    return GroupWalk(moduli=moduli, atoms=tuple(sorted(pooled.items())),
                     symmetric=symmetric, ergodic=ergodic, chain=chain,
                     elements=elements)


def _nuhat_all(moduli, pooled, elements) -> np.ndarray:
    # multiplier nuhat(g) = sum_z nu(z) chi_g(z) for every character g
    out = np.zeros(len(elements), dtype=complex)
    for i, g in enumerate(elements):
        acc = 0.0 + 0.0j
        for z, p in pooled.items():
            ang = 2.0 * math.pi * sum(g[d] * z[d] / m for d, m in enumerate(moduli))
            acc += p * complex(math.cos(ang), math.sin(ang))
        out[i] = acc
    return out


def walk_fourier(walk: GroupWalk, f: Observable):
    """Fourier multipliers of the step measure and coefficients of ``f``.

    Returns ``(nuhat, fhat)`` indexed like ``walk.elements`` (the dual group
    of a finite abelian group is isomorphic to the group itself).  ``fhat``
    is the direct O(N^2) transform ``<f, chi_g>``; Parseval is validated to
    1e-9 relative.
    """
    if f.values.shape != (len(walk.elements),):
        raise DimensionMismatch("observable does not match the group order")
    pooled = dict(walk.atoms)
    nuhat = _nuhat_all(walk.moduli, pooled, walk.elements)
    n = len(walk.elements)
    fhat = np.zeros(n, dtype=complex)
    for i, g in enumerate(walk.elements):
        chi = character_values(walk.moduli, g, walk.elements)
        fhat[i] = np.sum(f.values * np.conj(chi)) / n
    mass = float(np.sum(np.abs(fhat) ** 2))
    if abs(mass - f.norm_sq) > 1e-9 * max(mass, f.norm_sq, 1e-30):
        raise BadProbabilities(
            f"Parseval check failed: {mass!r} vs <f,f> = {f.norm_sq!r}"
        )
    return nuhat, fhat


def fourier_measure(walk: GroupWalk, f: Observable) -> SpectralMeasure:
    """Unit-disk spectral measure of ``f``: mass ``|fhat(g)|^2`` at each
    multiplier ``nuhat(g)``, non-identity characters only."""
    nuhat, fhat = walk_fourier(walk, f)
    masses = np.abs(fhat[1:]) ** 2
    locations = nuhat[1:].copy()
    # clip roundoff excursions outside the closed disk
    mods = np.abs(locations)
    locations[mods > 1.0] /= mods[mods > 1.0]
    return SpectralMeasure(locations=locations, masses=masses,
                           total=float(np.sum(masses)))


@dataclass(frozen=True)
class ConditionReport:
    """Finite Fourier condition sums over non-identity characters.

    ``sr_sum`` is ``sum |fhat|^2 / |1 - nuhat|`` (for symmetric walks this
    is the real-axis reciprocal-gap sum), ``g1_sum`` weights each term by
    ``(log+ |log|1 - nuhat||)^2`` and ``sn1_sum`` by ``|log|1 - nuhat||``.
    ``sr_spectral`` cross-validates ``sr_sum`` against the eigensolver route
    on the materialized chain (symmetric walks only; None otherwise).
    """

    sr_sum: float
    g1_sum: float
    sn1_sum: float
    symmetric: bool
    sr_spectral: float | None


def condition_sums(walk: GroupWalk, f: Observable) -> ConditionReport:
    """Evaluate the spectral condition sums of ``f`` for the walk.

    Raises :class:`NotErgodic` when the walk's support generates a proper
    subgroup (some non-identity multiplier equals 1 and the sums diverge).
    """
    if not walk.ergodic:
        raise NotErgodic("a non-identity character has multiplier 1")
    measure = fourier_measure(walk, f)
    sr = spectral_integral(measure, "SN")
    sn1 = spectral_integral(measure, "SN1")
    gaps = np.abs(1.0 - measure.locations)
    keep = gaps > 0
    logs = np.abs(np.log(gaps[keep]))
    logplus = np.where(logs > 1.0, np.log(logs), 0.0)
    g1 = float(np.sum(logplus ** 2 * measure.masses[keep] / gaps[keep]))
    sr_spectral = None
    if walk.symmetric:
        chain_measure = spectral_measure(walk.chain, f)
        sr_spectral = spectral_integral(chain_measure, "SR")
    return ConditionReport(sr_sum=sr, g1_sum=g1, sn1_sum=sn1,
                           symmetric=walk.symmetric, sr_spectral=sr_spectral)


# ---------------------------------------------------------------------------
# torus rotation walk

@dataclass(frozen=True)
class TorusWalk:
    """Lazy symmetric rotation walk ``x -> x +- alpha`` on the unit torus.

    ``fhat`` stores the observable's positive-frequency coefficients; the
    negative side is implied by Hermitian symmetry (real observable).
    """

    alpha: float
    lazy: float
    fhat: tuple                  # ((frequency > 0, complex coefficient), ...)


def convergents(alpha: float, q_cap: int):
    """Continued-fraction convergents ``p/q`` of ``alpha`` with ``q <= q_cap``.

    Floating-point expansion; terminates when the remainder is numerically
    exhausted or the denominator cap is passed.
    """
    out = []
    h_prev, k_prev = 1, 0
    a0 = math.floor(alpha)
    h, k = int(a0), 1
    out.append((h, k))
    frac = alpha - a0
    while frac > 1e-12:
        x = 1.0 / frac
        a = math.floor(x)
        frac = x - a
        h, h_prev = int(a) * h + h_prev, h
        k, k_prev = int(a) * k + k_prev, k
        if k > q_cap:
            break
        out.append((h, k))
    return out


def make_torus_walk(alpha: float, lazy: float = 0.0, fhat=None) -> TorusWalk:
    """Validate and build a torus walk.

    ``alpha`` is reduced mod 1 and rejected when some convergent ``p/q``
    with ``q <= 10^6`` matches it to 1e-14 (numerically rational).  ``fhat``
    may list positive frequencies only, or both signs (then Hermitian
    symmetry is checked before folding).
    """
    alpha = float(alpha) % 1.0
    if alpha == 0.0:
        raise RationalAlpha("alpha reduces to 0 mod 1")
    if not 0.0 <= lazy < 1.0:
        raise BadProbabilities(f"lazy weight {lazy!r} must lie in [0, 1)")
    for p, q in convergents(alpha, RATIONAL_DENOMINATOR_CAP):
        if q >= 1 and abs(alpha - p / q) <= RATIONAL_GAP_TOL:
            raise RationalAlpha(f"alpha is {p}/{q} to within 1e-14")
    folded: dict = {}
    for freq, coeff in (fhat.items() if hasattr(fhat, "items") else (fhat or [])):
        nn = int(freq)
        if nn == 0:
            raise DimensionMismatch("frequency 0 is not allowed (observables are centered)")
        c = complex(coeff)
        key = abs(nn)
        want = c if nn > 0 else c.conjugate()
        if key in folded and abs(folded[key] - want) > 1e-12:
            raise DimensionMismatch(
                f"coefficients at +-{key} violate Hermitian symmetry"
            )
        folded[key] = want
    return TorusWalk(alpha=alpha, lazy=float(lazy),
                     fhat=tuple(sorted(folded.items())))


def nearest_integer_distance(ns, alpha: float) -> np.ndarray:
    """Distance of ``n * alpha`` to the nearest integer, vectorized in ``n``."""
    t = np.asarray(ns, dtype=np.float64) * alpha
    return np.abs(t - np.rint(t))


def torus_multiplier_gap(walk: TorusWalk, ns) -> np.ndarray:
    """``1 - nuhat(n) = (1 - lazy) * 2 sin^2(pi n alpha)`` evaluated through
    the nearest-integer reduction of ``n alpha``."""
    dist = nearest_integer_distance(ns, walk.alpha)
    return (1.0 - walk.lazy) * 2.0 * np.sin(np.pi * dist) ** 2


@dataclass(frozen=True)
class TorusRow:
    """Per-frequency diagnostics for the rotation walk."""

    n: int
    frac: float                # raw fractional part of n * alpha
    dist: float                # nearest-integer distance of n * alpha
    one_minus_nuhat: float
    ratio: float               # one_minus_nuhat / (2 pi^2 dist^2)
    partial_sum: float         # cumulative condition sum up to this frequency


@dataclass(frozen=True)
class TorusConditionReport:
    rows: tuple
    convergents: tuple         # ((p, q), ...) with q <= cutoff


def torus_condition(walk: TorusWalk, cutoff: int) -> TorusConditionReport:
    """Series report for the walk's condition sum over its Fourier support.

    Each supported frequency contributes
    ``2 |fhat(n)|^2 (log+ |log(1 - nuhat(n))|)^2 / (1 - nuhat(n))``
    (the factor 2 accounts for the mirrored negative frequency).  The report
    never extrapolates an infinite tail; it returns partial sums and the
    per-frequency data needed to judge them, plus the continued-fraction
    convergents of alpha with denominators up to ``cutoff``.
    """
    freqs = [n for n, _ in walk.fhat]
    if freqs and cutoff < max(freqs):
        raise DimensionMismatch(
            f"cutoff {cutoff} is below the largest supported frequency {max(freqs)}"
        )
    rows = []
    acc = 0.0
    for n, coeff in walk.fhat:
        t = n * walk.alpha
        frac = t - math.floor(t)
        dist = min(frac, 1.0 - frac)
        gap = float(torus_multiplier_gap(walk, n))
        ratio = gap / (2.0 * math.pi ** 2 * dist * dist) if dist > 0 else float("nan")
        log_gap = abs(math.log(gap)) if gap > 0 else float("inf")
        logplus = math.log(log_gap) if log_gap > 1.0 else 0.0
        acc += 2.0 * abs(coeff) ** 2 * logplus ** 2 / gap
        rows.append(TorusRow(n=n, frac=frac, dist=dist, one_minus_nuhat=gap,
                             ratio=ratio, partial_sum=acc))
    return TorusConditionReport(rows=tuple(rows),
                                convergents=tuple(convergents(walk.alpha, cutoff)))


def torus_sigma_sq(walk: TorusWalk) -> float:
    """Limit variance ``sum_{n != 0} |fhat(n)|^2 (1 + nuhat) / (1 - nuhat)``."""
    acc = 0.0
    for n, coeff in walk.fhat:
        gap = float(torus_multiplier_gap(walk, n))
        nuhat = 1.0 - gap
        acc += 2.0 * abs(coeff) ** 2 * (1.0 + nuhat) / gap
    return acc


def simulate_torus(walk: TorusWalk, x: float, n: int, num_paths: int,
                   seed: int, workers: int = 1,
                   backend: str | None = None) -> SimulationReport:
    """Monte Carlo law of ``S_n / sqrt(n)`` for the rotation walk from ``x``.

    A zero observable short-circuits to an all-zero report; a nonzero
    observable with numerically zero limit variance raises
    :class:`DegenerateSigma`.
    """
    if n < 1 or num_paths < 1:
        raise EmptySample(f"need n >= 1 and paths >= 1, got n={n}, paths={num_paths}")
    x0 = float(x) % 1.0
    sigma_sq = torus_sigma_sq(walk)
    total_mass = sum(abs(c) ** 2 for _, c in walk.fhat)
    if sigma_sq <= 1e-12:
        if total_mass <= 1e-30:
            return SimulationReport(start_state=0, n=n, num_paths=num_paths,
                                    seed=seed, sample_mean=0.0, sample_var=0.0,
                                    ks_distance=0.0, residual_max=None,
                                    sigma_sq_used=0.0,
                                    backend=backend or kernels.BACKEND)
        raise DegenerateSigma(f"limit variance {sigma_sq!r} is numerically zero")
    freqs = np.array([n_ for n_, _ in walk.fhat], dtype=np.float64)
    coeffs = np.array([c for _, c in walk.fhat], dtype=complex)
    omegas = np.ascontiguousarray(2.0 * np.pi * freqs)
    ccos = np.ascontiguousarray(2.0 * coeffs.real)
    csin = np.ascontiguousarray(-2.0 * coeffs.imag)
    sums, _ = kernels.run_torus_paths(walk.alpha, walk.lazy, omegas, ccos, csin,
                                      x0, n, num_paths, seed,
                                      workers=workers, backend=backend)
    scaled = sums / math.sqrt(n)
    mean = float(np.mean(scaled))
    var = float(np.sum((scaled - mean) ** 2) / max(num_paths - 1, 1))
    kd = ks_distance(np.sort(scaled / math.sqrt(sigma_sq)), standard_normal_cdf)
    return SimulationReport(start_state=0, n=n, num_paths=num_paths, seed=seed,
                            sample_mean=mean, sample_var=var, ks_distance=kd,
                            residual_max=None, sigma_sq_used=sigma_sq,
                            backend=backend or kernels.BACKEND)
