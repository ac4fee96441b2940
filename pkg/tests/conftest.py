import numpy as np
import pytest

from mdplab import policy_iteration, stay_go_mdp


@pytest.fixture
def stay_go():
    return stay_go_mdp()


@pytest.fixture
def stay_go_oracle(stay_go):
    return policy_iteration(stay_go)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
