import numpy as np
import pytest

from mqsense.basis import enumerate_basis
from mqsense.validation import random_operator, random_state


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


@pytest.fixture
def small_state(rng):
    def make(n):
        return random_state(enumerate_basis(n), rng)

    return make


@pytest.fixture
def small_op(rng):
    def make(n, hermitian=False):
        return random_operator(enumerate_basis(n), rng, hermitian)

    return make
