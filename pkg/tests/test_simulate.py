import numpy as np
import pytest
import scipy.stats

from qclt import kernels
from qclt.chain import center_observable, make_chain
from qclt.errors import DegenerateSigma, EmptySample
from qclt.martingale import poisson_solve, quenched_diagnostics
from qclt.rng import PathStream, stream_key, stream_keys
from qclt.simulate import (
    cumulative_rows,
    ks_distance,
    sample_path,
    simulate_quenched,
    standard_normal_cdf,
)


def test_stream_keys_match_scalar():
    keys = stream_keys(99, 8)
    assert [int(k) for k in keys] == [stream_key(99, i) for i in range(8)]


def test_sample_path_identity_and_flip(flip):
    ident = make_chain("012", np.eye(3), stationary=[1 / 3] * 3)
    path = sample_path(ident, 1, 16, PathStream(0, 0))
    np.testing.assert_array_equal(path, np.ones(17, dtype=np.int64))
    path = sample_path(flip, 0, 6, PathStream(0, 0))
    np.testing.assert_array_equal(path, [0, 1, 0, 1, 0, 1, 0])


def test_sample_path_replays(two_state):
    a = sample_path(two_state, 0, 64, PathStream(7, 3))
    b = sample_path(two_state, 0, 64, PathStream(7, 3))
    np.testing.assert_array_equal(a, b)
    c = sample_path(two_state, 0, 64, PathStream(7, 4))
    assert not np.array_equal(a, c)


def test_sample_path_consistent_with_kernels(two_state, sign):
    # the scalar path replay and the batch kernels draw identical transitions
    scheme = poisson_solve(two_state, sign)
    n, paths, seed = 33, 6, 123
    for backend in kernels.available_backends():
        sums, mart, last = kernels.run_chain_paths(
            cumulative_rows(two_state), sign.values,
            np.ascontiguousarray(scheme.diff_kernel), 0, n, paths, seed,
            backend=backend)
        for i in range(paths):
            states = sample_path(two_state, 0, n, PathStream(seed, i))
            assert last[i] == states[-1]
            assert sums[i] == pytest.approx(float(np.sum(sign.values[states[1:]])), abs=1e-12)
            h = scheme.diff_kernel
            assert mart[i] == pytest.approx(
                float(np.sum(h[states[:-1], states[1:]])), abs=1e-12)


def test_backends_bitwise_identical_on_chain(two_state, sign):
    backends = kernels.available_backends()
    if len(backends) < 2:
        pytest.skip("compiled extension not built")
    scheme = poisson_solve(two_state, sign)
    args = (cumulative_rows(two_state), sign.values,
            np.ascontiguousarray(scheme.diff_kernel), 0, 257, 512, 77)
    out = {name: kernels.run_chain_paths(*args, backend=name) for name in backends}
    a, b = out["python"], out["compiled"]
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[2], b[2])


def test_ks_distance_values():
    assert ks_distance(np.array([0.0]), standard_normal_cdf) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(EmptySample):
        ks_distance(np.array([]), standard_normal_cdf)
    # inverse-transform quantile grid lands within 1/N
    n = 1000
    grid = scipy.stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    assert ks_distance(grid, standard_normal_cdf) <= 1.0 / n


def test_ks_distance_matches_scipy():
    rng = np.random.default_rng(5)
    for _ in range(5):
        sample = np.sort(rng.normal(size=257))
        mine = ks_distance(sample, standard_normal_cdf)
        ref = scipy.stats.kstest(sample, "norm").statistic
        assert mine == pytest.approx(ref, abs=1e-12)


def test_ks_null_scale():
    n = 100_000
    for seed in (0, 1):
        sample = np.sort(np.random.default_rng(seed).normal(size=n))
        d = ks_distance(sample, standard_normal_cdf)
        assert d <= 1.5 * 1.36 / np.sqrt(n)
        assert d >= 0.05 / np.sqrt(n)


def test_normal_cdf_accuracy():
    xs = np.linspace(-8, 8, 321)
    np.testing.assert_allclose(standard_normal_cdf(xs), scipy.stats.norm.cdf(xs),
                               atol=1e-12)


def test_simulate_deterministic_across_workers(two_state, sign):
    scheme = poisson_solve(two_state, sign)
    reports = [simulate_quenched(two_state, scheme, 0, 128, 3000, seed=5, workers=w)
               for w in (1, 2, 3, 7)]
    assert all(r == reports[0] for r in reports[1:])


def test_simulate_residual_and_moments(two_state, sign):
    scheme = poisson_solve(two_state, sign)
    rep = simulate_quenched(two_state, scheme, 1, 512, 4000, seed=9)
    assert rep.residual_max <= 1e-9
    # E^x(S_n)/sqrt(n) within 4 standard errors of the empirical mean
    diag = quenched_diagnostics(two_state, scheme, 1, 512)
    se = np.sqrt(rep.sample_var / rep.num_paths)
    assert abs(rep.sample_mean - diag.cond_mean / np.sqrt(512)) <= 4 * se


def test_simulate_iid_clt_smoke(iid):
    f = center_observable(iid, [1.0, -1.0])
    scheme = poisson_solve(iid, f)
    rep = simulate_quenched(iid, scheme, 0, 256, 20_000, seed=3)
    assert rep.ks_distance <= 0.05
    assert rep.sample_var == pytest.approx(1.0, rel=0.05)


def test_annealed_mixture_matches_sigma_sq(two_state, sign):
    # mixing fixed-start samples with pi weights reproduces the limit variance
    scheme = poisson_solve(two_state, sign)
    a = simulate_quenched(two_state, scheme, 0, 1024, 10_000, seed=2)
    b = simulate_quenched(two_state, scheme, 1, 1024, 10_000, seed=3)
    mixed_second_moment = 0.5 * (a.sample_var + a.sample_mean ** 2) \
        + 0.5 * (b.sample_var + b.sample_mean ** 2)
    assert mixed_second_moment == pytest.approx(scheme.sigma_sq, rel=0.05)


def test_simulate_rejects_degenerate_and_tiny(flip, two_state, sign):
    f = center_observable(flip, [1.0, -1.0])
    scheme = poisson_solve(flip, f)
    with pytest.raises(DegenerateSigma):
        simulate_quenched(flip, scheme, 0, 64, 1000, seed=0)
    with pytest.raises(EmptySample):
        simulate_quenched(two_state, poisson_solve(two_state, sign), 0, 8, 99, seed=0)


def test_dump_format(tmp_path, two_state, sign):
    scheme = poisson_solve(two_state, sign)
    out = tmp_path / "dump.csv"
    simulate_quenched(two_state, scheme, 0, 16, 200, seed=1, dump_path=out)
    lines = out.read_text().splitlines()
    assert lines[0] == "path_index,s_scaled,m_scaled"
    assert len(lines) == 201
    first = lines[1].split(",")
    assert first[0] == "0"
    float(first[1]), float(first[2])
