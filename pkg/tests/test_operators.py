import math

import numpy as np
import pytest

from conftest import random_density, random_hermitian
from qbound import (
    omega_apply,
    omega_apply_vectorized,
    spectral_decompose,
    support_projector,
    sym_pinv,
    tensor_power,
)
from qbound.errors import (
    DimensionCapError,
    DimensionMismatchError,
    NegativeEigenvalueError,
    NonHermitianError,
)
from qbound.models import PAULI_X, PAULI_Y, PAULI_Z


class TestSpectralDecompose:
    def test_scalar_matrix(self):
        dec = spectral_decompose(0.5 * np.eye(2))
        assert np.allclose(dec.eigenvalues, [0.5, 0.5])
        assert np.abs(dec.eigenvectors.conj().T @ dec.eigenvectors - np.eye(2)).max() < 1e-10

    def test_sigma_z(self):
        dec = spectral_decompose(PAULI_Z)
        assert np.allclose(dec.eigenvalues, [-1.0, 1.0])
        # computational-basis eigenvectors, phases fixed real positive
        assert np.allclose(np.abs(dec.eigenvectors), [[0, 1], [1, 0]], atol=1e-12)
        assert dec.eigenvectors[1, 0] == pytest.approx(1.0)
        assert dec.eigenvectors[0, 1] == pytest.approx(1.0)

    def test_mixed_qubit_hand_diagonalized(self):
        rho = 0.5 * (np.eye(2) + 0.42 * PAULI_Y)
        dec = spectral_decompose(rho)
        assert np.allclose(dec.eigenvalues, [0.29, 0.71])

    def test_reconstruction_and_unitarity_random(self):
        rng = np.random.default_rng(0)
        for d in (2, 3, 5):
            for _ in range(10):
                h = random_hermitian(rng, d)
                dec = spectral_decompose(h)
                scale = 1.0 + np.abs(h).max()
                assert np.abs(dec.reconstruct() - h).max() <= 1e-10 * scale
                assert np.abs(dec.eigenvectors.conj().T @ dec.eigenvectors - np.eye(d)).max() <= 1e-10
                assert np.all(np.diff(dec.eigenvalues) >= 0)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        h = random_hermitian(rng, 4)
        a = spectral_decompose(h)
        b = spectral_decompose(h.copy())
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_non_hermitian_rejected(self):
        with pytest.raises(NonHermitianError):
            spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSupportProjector:
    def test_full_rank_qubit(self):
        rho = 0.5 * (np.eye(2) + 0.42 * PAULI_Y)
        proj = support_projector(rho)
        assert proj.rank == 0
        assert np.abs(proj.projector).max() == 0.0

    def test_pure_state(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        proj = support_projector(rho)
        assert proj.rank == 1
        assert np.allclose(proj.projector, np.diag([0.0, 1.0]))

    def test_tensor_of_full_rank(self):
        rho = 0.5 * (np.eye(2) + 0.42 * PAULI_Y)
        proj = support_projector(np.kron(rho, rho))
        assert proj.rank == 0

    def test_idempotent_and_binary_spectrum(self):
        rng = np.random.default_rng(2)
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        proj = support_projector(rho)
        p = proj.projector
        assert np.abs(p @ p - p).max() <= 1e-10
        eigs = np.linalg.eigvalsh(p)
        assert np.all((np.abs(eigs) <= 1e-10) | (np.abs(eigs - 1) <= 1e-10))

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(NegativeEigenvalueError):
            support_projector(np.diag([1.1, -0.1]))


class TestOmega:
    def test_maximally_mixed_doubles(self):
        rng = np.random.default_rng(3)
        x = random_hermitian(rng, 2)
        assert np.abs(omega_apply(0.5 * np.eye(2), x) - 2 * x).max() <= 1e-12

    def test_omega_of_rho_is_identity_minus_kernel(self):
        rng = np.random.default_rng(4)
        rho = random_density(rng, 3)
        assert np.abs(omega_apply(rho, rho) - np.eye(3)).max() <= 1e-10
        # pure state: identity minus kernel projector is the state itself
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        pure = np.outer(psi, psi.conj())
        assert np.abs(omega_apply(pure, pure) - pure).max() <= 1e-10

    def test_uniform_weights_on_offdiagonal(self):
        rho = np.diag([0.71, 0.29]).astype(complex)
        assert np.abs(omega_apply(rho, PAULI_X) - 2 * PAULI_X).max() <= 1e-12

    def test_symmetric_division_identity(self):
        rng = np.random.default_rng(5)
        for d in (2, 3, 4):
            for _ in range(20):
                rho = random_density(rng, d)
                x = random_hermitian(rng, d)
                om = omega_apply(rho, x)
                assert np.abs(0.5 * (om @ rho + rho @ om) - x).max() <= 1e-9

    def test_identity_with_kernel_correction(self):
        rng = np.random.default_rng(6)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        x = random_hermitian(rng, 4)
        om = omega_apply(rho, x)
        proj = support_projector(rho).projector
        target = x - proj @ x @ proj
        assert np.abs(0.5 * (om @ rho + rho @ om) - target).max() <= 1e-9

    def test_linearity(self):
        rng = np.random.default_rng(7)
        rho = random_density(rng, 3)
        x, y = random_hermitian(rng, 3), random_hermitian(rng, 3)
        lhs = omega_apply(rho, 1.3 * x - 0.4 * y)
        rhs = 1.3 * omega_apply(rho, x) - 0.4 * omega_apply(rho, y)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_trace_inner_product_symmetry(self):
        rng = np.random.default_rng(8)
        rho = random_density(rng, 4)
        x, y = random_hermitian(rng, 4), random_hermitian(rng, 4)
        lhs = np.trace(x @ omega_apply(rho, y))
        rhs = np.trace(y @ omega_apply(rho, x))
        assert abs(lhs - rhs) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            omega_apply(0.5 * np.eye(2), np.eye(3))


class TestOmegaVectorized:
    def test_agrees_on_random_full_rank(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            rho = random_density(rng, 3)
            x = random_hermitian(rng, 3)
            dev = np.abs(omega_apply(rho, x) - omega_apply_vectorized(rho, x)).max()
            assert dev <= 1e-9

    def test_maximally_mixed(self):
        assert np.abs(omega_apply_vectorized(0.5 * np.eye(2), PAULI_Z) - 2 * PAULI_Z).max() <= 1e-12

    def test_pure_state_on_support(self):
        rng = np.random.default_rng(10)
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        # support-compatible operator: no kernel-kernel block
        phi = rng.normal(size=3) + 1j * rng.normal(size=3)
        x = np.outer(psi, phi.conj()) + np.outer(phi, psi.conj())
        dev = np.abs(omega_apply(rho, x) - omega_apply_vectorized(rho, x)).max()
        assert dev <= 1e-9


class TestTensorPower:
    def test_single_copy_is_identity_operation(self):
        rng = np.random.default_rng(11)
        rho = random_density(rng, 3)
        assert np.array_equal(tensor_power(rho, 1), rho)

    def test_mixed_power(self):
        assert np.allclose(tensor_power(0.5 * np.eye(2), 2), 0.25 * np.eye(4))

    def test_product_spectrum_with_multiplicities(self):
        rho = 0.5 * (np.eye(2) + 0.42 * PAULI_Y)
        got = np.sort(np.linalg.eigvalsh(tensor_power(rho, 3)))
        expected = np.sort([0.71 ** a * 0.29 ** (3 - a)
                            for a in (0, 1, 2, 3)
                            for _ in range(math.comb(3, a))])
        assert np.allclose(got, expected, atol=1e-12)

    def test_cap(self):
        with pytest.raises(DimensionCapError):
            tensor_power(np.eye(2), 13)


class TestSymPinv:
    def test_diagonal(self):
        assert np.allclose(sym_pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_inverse_of_invertible(self):
        rng = np.random.default_rng(12)
        a = rng.normal(size=(4, 4))
        m = a @ a.T + 0.5 * np.eye(4)
        assert np.abs(m @ sym_pinv(m) - np.eye(4)).max() <= 1e-9

    def test_rank_one(self):
        e = np.ones(3)
        m = np.outer(e, e)
        assert np.allclose(sym_pinv(m), m / 9.0, atol=1e-12)

    def test_real_input_gives_real_output(self):
        out = sym_pinv(np.diag([1.0, 2.0]))
        assert not np.iscomplexobj(out)
