import numpy as np
import pytest

from entlab.algebra import BlockStructure
from entlab.capacity import random_density_state
from entlab.entangle import AmplitudeOperator


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_amplitude(rng, dim_g=None, dim_h=None, dim_f=None, max_dim=4):
    dg = dim_g or int(rng.integers(1, max_dim + 1))
    dh = dim_h or int(rng.integers(1, max_dim + 1))
    df = dim_f or int(rng.integers(1, max_dim + 1))
    m = rng.standard_normal((dg * dh, df)) + 1j * rng.standard_normal((dg * dh, df))
    m /= np.sqrt(np.real(np.vdot(m, m)))
    return AmplitudeOperator(m, dg, dh)


def random_state(rng, dims):
    return random_density_state(BlockStructure(dims), rng)


def random_hermitian(rng, d):
    h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (h + h.conj().T) / 2
