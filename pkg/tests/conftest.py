import numpy as np
import pytest

from diamondeq import ChannelSpec, build_instance, normalize

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
PHASE_S = np.diag([1.0, 1j])
KET0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
KET1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)


def unitary_spec(u):
    u = np.asarray(u, dtype=complex)
    return ChannelSpec("unitary", u.shape[0], u.shape[0], (u,))


def constant_spec(sigma, input_dim=2):
    sigma = np.asarray(sigma, dtype=complex)
    return ChannelSpec("constant", input_dim, sigma.shape[0], (sigma,))


def unitary_instance(u, v):
    return build_instance(normalize(unitary_spec(u)), normalize(unitary_spec(v)))


def random_kraus_pair_spec(rng, n=2, k=2):
    """Admissible channel from a Haar-random (n*k) x n isometry split into
    k Kraus blocks."""
    g = rng.standard_normal((n * k, n)) + 1j * rng.standard_normal((n * k, n))
    q, _ = np.linalg.qr(g)
    ops = tuple(q[i * n:(i + 1) * n, :] for i in range(k))
    return ChannelSpec("kraus", n, n, ops)


@pytest.fixture
def identity_instance():
    return unitary_instance(I2, I2)


@pytest.fixture
def phase_instance():
    return unitary_instance(I2, PHASE_S)


@pytest.fixture
def orthogonal_instance():
    return build_instance(normalize(constant_spec(KET0)), normalize(constant_spec(KET1)))
