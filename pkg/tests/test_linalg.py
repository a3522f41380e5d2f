import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hybridqed.errors import DimensionMismatch, NonHermitianInput, NotPositiveSemidefinite
from hybridqed.linalg import (commutator, expm_herm_scaled, herm_eig, kron,
                              min_eigenvalue_above, sqrtm_psd)
from hybridqed.model import PAULI_X, PAULI_Y, PAULI_Z

from conftest import random_hermitian

I2 = np.eye(2)


def test_kron_identity():
    assert np.array_equal(kron(I2, I2), np.eye(4))


def test_kron_sigma_y_pair():
    out = kron(PAULI_Y, PAULI_Y)
    assert np.allclose(out, np.fliplr(np.diag([-1, 1, 1, -1])))


def test_kron_mixed_product(rng):
    A, B, C, D = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    assert np.allclose(kron(A, B) @ kron(C, D), kron(A @ C, B @ D))


def test_kron_needs_factors():
    with pytest.raises(ValueError):
        kron()


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_eig_identity_and_sigma_y(method):
    assert np.allclose(herm_eig(np.eye(4), method).eigenvalues, 1.0)
    assert np.allclose(herm_eig(PAULI_Y, method).eigenvalues, [-1.0, 1.0])


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_eig_reconstruction(rng, method):
    A = random_hermitian(rng, 6)
    w, V = herm_eig(A, method)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - A)) < 1e-10
    assert np.max(np.abs(V.conj().T @ V - np.eye(6))) < 1e-10


def test_eig_jacobi_matches_lapack_on_batch(rng):
    A = np.array([random_hermitian(rng, 5) for _ in range(50)])
    w1 = herm_eig(A, "jacobi").eigenvalues
    w2 = herm_eig(A, "lapack").eigenvalues
    assert np.max(np.abs(w1 - w2)) < 1e-12


def test_eig_degenerate_spectrum():
    U = expm_herm_scaled(kron(PAULI_X, PAULI_Y), -0.3j)
    A = U @ np.diag([1.0, 1.0, 1.0, 2.0]) @ U.conj().T
    w, V = herm_eig(A)
    assert np.allclose(w, [1, 1, 1, 2], atol=1e-12)
    assert np.allclose(V.conj().T @ V, np.eye(4), atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitianInput):
        herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eig_rejects_unknown_method():
    with pytest.raises(ValueError):
        herm_eig(np.eye(2), method="qr")


def test_sqrtm_examples(rng):
    assert np.allclose(sqrtm_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(sqrtm_psd(np.eye(3)), np.eye(3))
    M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    B = M.conj().T @ M
    S = sqrtm_psd(B)
    assert np.max(np.abs(S @ S - B)) < 1e-8


def test_sqrtm_rank_deficient():
    v = np.array([1.0, 1j, 0.0]) / np.sqrt(2)
    P = np.outer(v, v.conj())
    assert np.allclose(sqrtm_psd(P), P, atol=1e-12)


def test_sqrtm_rejects_negative():
    with pytest.raises(NotPositiveSemidefinite):
        sqrtm_psd(np.diag([1.0, -0.1]))


def test_expm_examples(rng):
    H = random_hermitian(rng, 4)
    assert np.allclose(expm_herm_scaled(H, 0.0), np.eye(4))
    R = expm_herm_scaled(PAULI_Y, -1j * np.pi / 2)
    assert np.allclose(R, [[0, -1], [1, 0]], atol=1e-12)
    U = expm_herm_scaled(H, -0.01j)
    assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-10


def test_expm_matches_scipy(rng):
    from scipy.linalg import expm
    H = random_hermitian(rng, 6)
    assert np.allclose(expm_herm_scaled(H, -0.7j), expm(-0.7j * H), atol=1e-12)


def test_commutator_examples(rng):
    A = rng.normal(size=(3, 3))
    assert np.array_equal(commutator(A, A), np.zeros((3, 3)))
    assert np.allclose(commutator(PAULI_X, PAULI_Y), 2j * PAULI_Z)
    B, C = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    assert np.allclose(commutator(A, B @ C), commutator(A, B) @ C + B @ commutator(A, C))


def test_commutator_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        commutator(np.eye(2), np.eye(3))


def test_min_eigenvalue_above():
    assert min_eigenvalue_above(np.diag([0.0, 1.0]), 1e-7)
    assert not min_eigenvalue_above(np.diag([-1e-3, 1.0]), 1e-7)


_entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 4, 4), elements=_entries))
def test_property_eig_reconstructs(parts):
    M = parts[0] + 1j * parts[1]
    A = 0.5 * (M + M.conj().T)
    w, V = herm_eig(A)
    scale = max(1.0, np.max(np.abs(A)))
    assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - A)) < 1e-10 * scale
    assert np.isclose(w.sum(), np.trace(A).real, atol=1e-10 * scale)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 4, 4), elements=_entries), st.floats(-5, 5))
def test_property_expm_unitary(parts, s):
    M = parts[0] + 1j * parts[1]
    U = expm_herm_scaled(0.5 * (M + M.conj().T), -1j * s)
    assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-9


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 3, 3), elements=_entries))
def test_property_sqrt_squares_back(parts):
    M = parts[0] + 1j * parts[1]
    B = M.conj().T @ M
    S = sqrtm_psd(B)
    assert np.max(np.abs(S @ S - B)) < 1e-8 * max(1.0, np.max(np.abs(B)))
