import numpy as np
import pytest

from qclt.chain import center_observable, make_chain


@pytest.fixture
def two_state():
    # eigenvalues {1, 0.5}; f = (1, -1) is the 0.5-eigenvector
    return make_chain(["0", "1"], [[0.75, 0.25], [0.25, 0.75]])


@pytest.fixture
def iid():
    # rows equal pi: successive states independent
    return make_chain(["0", "1"], [[0.5, 0.5], [0.5, 0.5]])


@pytest.fixture
def flip():
    # deterministic period-2 swap; eigenvalue -1
    return make_chain(["0", "1"], [[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def sign(two_state):
    return center_observable(two_state, np.array([1.0, -1.0]))


def sign_of(chain):
    return center_observable(chain, np.where(np.arange(chain.n_states) % 2 == 0, 1.0, -1.0))
