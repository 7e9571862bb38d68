import math

import numpy as np
import pytest

from qclt import kernels
from qclt.chain import adjoint_kernel, center_observable
from qclt.errors import (
    BadProbabilities,
    DimensionMismatch,
    EmptySupport,
    NotErgodic,
    RationalAlpha,
)
from qclt.group_walk import (
    GOLDEN_ALPHA,
    build_group_walk,
    condition_sums,
    convergents,
    fourier_measure,
    make_torus_walk,
    nearest_integer_distance,
    simulate_torus,
    torus_condition,
    torus_multiplier_gap,
    torus_sigma_sq,
    walk_fourier,
)
from qclt.spectral import jacobi_eigh, spectral_integral, spectral_measure


def harmonic(chain, k, n):
    return center_observable(chain, math.sqrt(2.0) * np.cos(2 * math.pi * k * np.arange(n) / n))


def test_z5_build():
    walk = build_group_walk([5], {1: 0.5, 4: 0.5})
    assert walk.symmetric and walk.ergodic
    assert walk.chain.flags.reversible
    np.testing.assert_allclose(walk.chain.stationary, 0.2, atol=1e-15)
    np.testing.assert_allclose(walk.chain.kernel.sum(axis=0), 1.0, atol=1e-12)


def test_z3_rotation_build():
    walk = build_group_walk([3], {1: 1.0})
    assert not walk.symmetric
    assert walk.ergodic
    flags = walk.chain.flags
    assert flags.normal and not flags.reversible and flags.irreducible


def test_z4_subgroup_not_ergodic():
    walk = build_group_walk([4], {2: 1.0})
    assert not walk.ergodic


def test_build_validation():
    with pytest.raises(BadProbabilities):
        build_group_walk([5], {1: 0.7, 4: 0.4})
    with pytest.raises(BadProbabilities):
        build_group_walk([5], {1: -0.5, 4: 1.5})
    with pytest.raises(EmptySupport):
        build_group_walk([5], {})


def test_adjoint_is_reflected_walk():
    walk = build_group_walk([3], {1: 1.0})
    reflected = build_group_walk([3], {2: 1.0})
    np.testing.assert_allclose(adjoint_kernel(walk.chain), reflected.chain.kernel,
                               atol=1e-15)
    nu1, _ = walk_fourier(walk, harmonic(walk.chain, 1, 3))
    nu2, _ = walk_fourier(reflected, harmonic(reflected.chain, 1, 3))
    np.testing.assert_allclose(nu2, np.conj(nu1), atol=1e-12)


def test_walk_fourier_values():
    walk = build_group_walk([5], {1: 0.5, 4: 0.5})
    f = harmonic(walk.chain, 1, 5)
    nuhat, fhat = walk_fourier(walk, f)
    np.testing.assert_allclose(nuhat.real, np.cos(2 * np.pi * np.arange(5) / 5), atol=1e-12)
    np.testing.assert_allclose(nuhat.imag, 0.0, atol=1e-12)
    assert nuhat[1].real == pytest.approx(0.309016994, abs=1e-9)
    masses = np.abs(fhat) ** 2
    np.testing.assert_allclose(masses, [0.0, 0.5, 0.0, 0.0, 0.5], atol=1e-12)
    delta0 = build_group_walk([5], {0: 1.0})
    nu0, _ = walk_fourier(delta0, f)
    np.testing.assert_allclose(nu0, 1.0, atol=1e-15)


def test_parseval_random_observable():
    rng = np.random.default_rng(8)
    walk = build_group_walk([2, 3], {(1, 0): 0.25, (1, 2): 0.25, (0, 1): 0.5})
    f = center_observable(walk.chain, rng.normal(size=6))
    _, fhat = walk_fourier(walk, f)
    assert float(np.sum(np.abs(fhat) ** 2)) == pytest.approx(f.norm_sq, rel=1e-12)


def test_condition_sums_z5():
    walk = build_group_walk([5], {1: 0.5, 4: 0.5})
    rep = condition_sums(walk, harmonic(walk.chain, 1, 5))
    assert rep.sr_sum == pytest.approx(1.447213596, abs=1e-9)
    assert rep.g1_sum == 0.0  # |log|1 - nuhat|| < 1 for both atoms
    assert rep.symmetric
    assert rep.sr_spectral == pytest.approx(rep.sr_sum, abs=1e-9)


def test_condition_sums_z3_rotation():
    walk = build_group_walk([3], {1: 1.0})
    rep = condition_sums(walk, harmonic(walk.chain, 1, 3))
    assert rep.sr_sum == pytest.approx(1 / math.sqrt(3.0), abs=1e-9)
    assert rep.sr_spectral is None


def test_condition_sums_zero_observable_and_not_ergodic():
    walk = build_group_walk([5], {1: 0.5, 4: 0.5})
    rep = condition_sums(walk, center_observable(walk.chain, np.zeros(5)))
    assert rep.sr_sum == rep.g1_sum == rep.sn1_sum == 0.0
    bad = build_group_walk([4], {2: 1.0})
    with pytest.raises(NotErgodic):
        condition_sums(bad, harmonic(bad.chain, 1, 4))


def test_eigenvalue_multiset_identity():
    walk = build_group_walk([5], {1: 0.5, 4: 0.5})
    f = harmonic(walk.chain, 1, 5)
    nuhat, _ = walk_fourier(walk, f)
    rt = np.sqrt(walk.chain.stationary)
    sym = rt[:, None] * walk.chain.kernel / rt[None, :]
    eigvals, _ = jacobi_eigh(0.5 * (sym + sym.T))
    np.testing.assert_allclose(np.sort(eigvals), np.sort(nuhat.real), atol=1e-9)


def test_sigma_sq_transport():
    walk = build_group_walk([5], {1: 0.5, 4: 0.5})
    f = harmonic(walk.chain, 2, 5)
    disk = fourier_measure(walk, f)
    gaps = 1.0 - disk.locations.real
    fourier_sigma = float(np.sum(disk.masses * (1.0 + disk.locations.real) / gaps))
    chain_sigma = spectral_integral(spectral_measure(walk.chain, f), "sigma_sq")
    assert fourier_sigma == pytest.approx(chain_sigma, rel=1e-9)


# -- torus ---------------------------------------------------------------------

def test_make_torus_walk_validation():
    make_torus_walk(GOLDEN_ALPHA, fhat={1: 0.5})
    with pytest.raises(RationalAlpha):
        make_torus_walk(0.5, fhat={1: 0.5})
    with pytest.raises(RationalAlpha):
        make_torus_walk(3.0 / 7.0, fhat={1: 0.5})
    with pytest.raises(BadProbabilities):
        make_torus_walk(GOLDEN_ALPHA, lazy=1.0, fhat={1: 0.5})
    with pytest.raises(DimensionMismatch):
        make_torus_walk(GOLDEN_ALPHA, fhat={0: 1.0})
    with pytest.raises(DimensionMismatch):
        make_torus_walk(GOLDEN_ALPHA, fhat={1: 0.5 + 0.1j, -1: 0.5 + 0.1j})
    folded = make_torus_walk(GOLDEN_ALPHA, fhat={1: 0.5 + 0.1j, -1: 0.5 - 0.1j})
    assert folded.fhat == ((1, 0.5 + 0.1j),)


def test_convergents_golden_are_fibonacci():
    qs = [q for _, q in convergents(GOLDEN_ALPHA, 1000)]
    fib = [1, 1]
    while fib[-1] + fib[-2] <= 1000:
        fib.append(fib[-1] + fib[-2])
    assert qs == fib[: len(qs)]
    assert qs[-1] <= 1000 < qs[-1] + qs[-2]


def test_golden_distance_and_ratio():
    assert float(nearest_integer_distance(13, GOLDEN_ALPHA)) == pytest.approx(
        0.034442, abs=1e-6)
    walk = make_torus_walk(GOLDEN_ALPHA, fhat={1: 0.5})
    for q in (13, 21, 34, 55, 89, 144):
        dist = float(nearest_integer_distance(q, GOLDEN_ALPHA))
        gap = float(torus_multiplier_gap(walk, q))
        ratio = gap / (2 * math.pi ** 2 * dist ** 2)
        assert abs(ratio - 1.0) <= 5e-3
    assert gap / (2 * math.pi ** 2 * dist ** 2) == pytest.approx(1.0, abs=5e-3)


def test_trig_identity_reduced():
    ns = np.arange(1, 100_001)
    dist = nearest_integer_distance(ns, GOLDEN_ALPHA)
    lhs = 1.0 - np.cos(2 * np.pi * dist)
    rhs = 2.0 * np.sin(np.pi * dist) ** 2
    assert float(np.max(np.abs(lhs - rhs))) <= 1e-12


def test_torus_condition_report():
    walk = make_torus_walk(GOLDEN_ALPHA, lazy=0.5, fhat={1: 0.5, 13: 0.25})
    rep = torus_condition(walk, cutoff=100)
    assert [r.n for r in rep.rows] == [1, 13]
    for row in rep.rows:
        gap_expected = 0.5 * 2.0 * math.sin(math.pi * row.dist) ** 2
        assert row.one_minus_nuhat == pytest.approx(gap_expected, abs=1e-15)
        assert 0.0 <= row.dist <= 0.5
        assert row.frac == pytest.approx((row.n * GOLDEN_ALPHA) % 1.0, abs=1e-12)
    assert rep.rows[-1].partial_sum >= rep.rows[0].partial_sum >= 0.0
    assert all(q <= 100 for _, q in rep.convergents)
    with pytest.raises(DimensionMismatch):
        torus_condition(walk, cutoff=5)


def test_simulate_torus_zero_observable():
    walk = make_torus_walk(GOLDEN_ALPHA, fhat={})
    rep = simulate_torus(walk, 0.25, 64, 500, seed=4)
    assert rep.sample_mean == rep.sample_var == rep.ks_distance == 0.0


def test_simulate_torus_reproducible_and_variance():
    walk = make_torus_walk(GOLDEN_ALPHA, fhat={1: 1 / math.sqrt(2.0)})
    a = simulate_torus(walk, 0.0, 2048, 20_000, seed=21, workers=2)
    b = simulate_torus(walk, 0.0, 2048, 20_000, seed=21, workers=5)
    assert a == b
    c = 2 * math.pi * GOLDEN_ALPHA
    target = (1 + math.cos(c)) / (1 - math.cos(c))
    assert torus_sigma_sq(walk) == pytest.approx(target, rel=1e-12)
    assert a.sample_var == pytest.approx(target, rel=0.10)


def test_torus_backends_agree():
    backends = kernels.available_backends()
    if len(backends) < 2:
        pytest.skip("compiled extension not built")
    omegas = np.array([2 * np.pi, 6 * np.pi])
    ccos = np.array([0.7, 0.2])
    csin = np.array([0.1, -0.3])
    out = {}
    for name in backends:
        out[name] = kernels.run_torus_paths(GOLDEN_ALPHA, 0.25, omegas, ccos, csin,
                                            0.125, 300, 400, 11, backend=name)
    np.testing.assert_array_equal(out["python"][1], out["compiled"][1])  # positions
    np.testing.assert_allclose(out["python"][0], out["compiled"][0], atol=1e-9)
