import numpy as np
import pytest

from qbound import QubitPhaseModel, entropy_to_bloch_length


@pytest.fixture(scope="session")
def study_r():
    return entropy_to_bloch_length(0.6)


@pytest.fixture(scope="session")
def study_model(study_r):
    return QubitPhaseModel((0.0, study_r, 0.0))


def random_density(rng, d, floor=0.0):
    """Random full-rank state; ``floor`` mixes in identity to bound the
    smallest eigenvalue away from zero (keeps absolute tolerances meaningful)."""
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    rho = rho / np.trace(rho).real
    if floor:
        rho = (1.0 - floor) * rho + floor * np.eye(d) / d
    return rho


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_mixed_qubit(rng, min_len=0.2, max_len=0.9, min_plane=0.3, domain=None):
    """Qubit phase model with a non-trivial component rotating about z."""
    from qbound import THETA_FULL

    vec = rng.normal(size=3)
    vec /= np.linalg.norm(vec)
    if np.linalg.norm(vec[:2]) < min_plane:
        vec[0] += 0.5
        vec /= np.linalg.norm(vec)
    return QubitPhaseModel(vec * rng.uniform(min_len, max_len),
                           domain=domain if domain is not None else THETA_FULL)


def random_projective_qubit_povm(rng):
    from qbound import POVM, bloch_to_density

    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    e1 = bloch_to_density(axis)
    return POVM(elements=(e1, np.eye(2) - e1))
