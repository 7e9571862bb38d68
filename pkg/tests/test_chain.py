import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qclt.chain import (
    adjoint_kernel,
    as_observable,
    center_observable,
    dump_document,
    inner_product,
    load_chain,
    load_document,
    make_chain,
)
from qclt.errors import (
    DimensionMismatch,
    NegativeEntry,
    NonStochasticRow,
    NotMeanZero,
    SingularStationary,
)

ROTATION3 = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]


def random_reversible(rng, n):
    w = rng.uniform(0.1, 1.0, size=(n, n))
    w = 0.5 * (w + w.T)
    return make_chain([str(i) for i in range(n)], w / w.sum(axis=1, keepdims=True))


def test_two_state_load(two_state):
    np.testing.assert_allclose(two_state.stationary, [0.5, 0.5], atol=1e-14)
    assert two_state.flags.reversible
    assert two_state.flags.normal
    assert two_state.flags.irreducible
    assert two_state.flags.aperiodic


def test_identity_kernel_needs_explicit_pi():
    eye = np.eye(3).tolist()
    with pytest.raises(SingularStationary):
        make_chain("012", eye)
    chain = make_chain("012", eye, stationary=[1 / 3] * 3)
    assert not chain.flags.irreducible
    assert chain.flags.reversible


def test_row_sum_rejected():
    with pytest.raises(NonStochasticRow):
        make_chain("01", [[0.6, 0.6], [0.5, 0.5]])


def test_negative_entry_rejected():
    with pytest.raises(NegativeEntry):
        make_chain("01", [[1.2, -0.2], [0.5, 0.5]])


def test_supplied_pi_validated(two_state):
    with pytest.raises(SingularStationary):
        make_chain("01", two_state.kernel, stationary=[0.9, 0.1])


def test_adjoint_symmetric_uniform(two_state):
    np.testing.assert_allclose(adjoint_kernel(two_state), two_state.kernel, atol=1e-15)


def test_adjoint_rotation_is_reverse_rotation():
    chain = make_chain("012", ROTATION3, stationary=[1 / 3] * 3)
    expected = np.array(ROTATION3).T  # the walk stepping by -1
    np.testing.assert_allclose(adjoint_kernel(chain), expected, atol=1e-15)


def test_adjoint_involution_and_stationarity():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = int(rng.integers(2, 7))
        w = rng.uniform(0.05, 1.0, size=(n, n))
        chain = make_chain([str(i) for i in range(n)], w / w.sum(1, keepdims=True))
        qstar = adjoint_kernel(chain)
        np.testing.assert_allclose(qstar.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(chain.stationary @ qstar, chain.stationary, atol=1e-12)
        pi = chain.stationary
        qss = (pi[None, :] * qstar.T) / pi[:, None]  # adjoint of the adjoint
        np.testing.assert_allclose(qss, chain.kernel, atol=1e-12)


def test_classification_flags():
    rotation = make_chain("012", ROTATION3, stationary=[1 / 3] * 3)
    assert not rotation.flags.reversible
    assert rotation.flags.normal
    assert rotation.flags.irreducible
    assert not rotation.flags.aperiodic

    swap = make_chain("01", [[0.0, 1.0], [1.0, 0.0]])
    assert swap.flags.reversible
    assert swap.flags.normal
    assert swap.flags.irreducible
    assert not swap.flags.aperiodic


def test_inner_product_values(two_state, sign):
    assert inner_product(two_state, sign, sign) == pytest.approx(1.0, abs=1e-14)
    qf = as_observable(two_state, two_state.kernel @ sign.values)
    assert inner_product(two_state, sign, qf) == pytest.approx(0.5, abs=1e-14)
    ones_dir = center_observable(two_state, [1.0, 1.0])  # centers to zero
    assert inner_product(two_state, sign, ones_dir) == 0.0
    with pytest.raises(DimensionMismatch):
        inner_product(two_state, sign, as_observable(
            make_chain("012", np.full((3, 3), 1 / 3)), [1.0, 0.0, -1.0]))


def test_center_observable(two_state):
    f = center_observable(two_state, [2.0, 0.0])
    np.testing.assert_allclose(f.values, [1.0, -1.0], atol=1e-15)
    assert f.norm_sq == pytest.approx(1.0)
    zero = center_observable(two_state, [5.0, 5.0])
    np.testing.assert_array_equal(zero.values, [0.0, 0.0])
    z3 = make_chain("012", np.full((3, 3), 1 / 3))
    np.testing.assert_allclose(center_observable(z3, [1.0, 2.0, 3.0]).values,
                               [-1.0, 0.0, 1.0], atol=1e-15)


def test_center_idempotent(two_state):
    once = center_observable(two_state, [3.0, 1.0])
    twice = center_observable(two_state, once.values)
    np.testing.assert_array_equal(once.values, twice.values)


def test_as_observable_rejects_nonzero_mean(two_state):
    with pytest.raises(NotMeanZero):
        as_observable(two_state, [1.0, 0.5])


def test_document_roundtrip(tmp_path, two_state):
    text = dump_document(two_state, {"f": [1.0, -1.0]})
    path = tmp_path / "chain.json"
    path.write_text(text)
    chain, obs = load_document(path)
    np.testing.assert_array_equal(chain.kernel, two_state.kernel)
    np.testing.assert_array_equal(obs["f"], [1.0, -1.0])
    # also accepted as a raw JSON string and as a mapping
    chain2 = load_chain(text)
    np.testing.assert_array_equal(chain2.kernel, two_state.kernel)
    chain3 = load_chain(json.loads(text))
    np.testing.assert_array_equal(chain3.kernel, two_state.kernel)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10_000))
def test_random_reversible_invariants(n, seed):
    chain = random_reversible(np.random.default_rng(seed), n)
    assert chain.flags.reversible
    np.testing.assert_allclose(chain.stationary @ chain.kernel, chain.stationary,
                               atol=1e-12)
    np.testing.assert_allclose(adjoint_kernel(chain), chain.kernel, atol=1e-9)
    assert abs(chain.stationary.sum() - 1.0) <= 1e-12
