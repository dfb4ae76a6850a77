import numpy as np
import pytest
from hypothesis import strategies as st

from locc_cert.linalg import random_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20050318)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unit(rng, d):
    v = crandn(rng, d)
    return v / np.linalg.norm(v)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


def brute_kron(x, y):
    """x (x) y by explicit index arithmetic, independent of numpy.kron."""
    out = np.zeros(len(x) * len(y), dtype=complex)
    for i in range(len(x)):
        for j in range(len(y)):
            out[i * len(y) + j] = x[i] * y[j]
    return out


def haar_basis_rows(rng, d):
    return random_unitary(d, rng).T
