"""Dense complex matrix kernel.

Every routine accepts plain ``numpy`` arrays. The eigen-based routines also
accept stacks of matrices with shape ``(..., n, n)`` and operate on each
matrix independently; the Jacobi solver rotates the whole stack at once, which
keeps concurrence and fidelity evaluation over long trajectories cheap.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, NotPositiveSemidefinite

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9
# eigenvalues below this fraction of the spectral radius are roundoff, not rank
RANK_RTOL = 1e-14

_JACOBI_MAX_SWEEPS = 60


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_square(A: np.ndarray, name: str = "matrix") -> None:
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    """Return ``(A + A†) / 2``."""
    return 0.5 * (A + dagger(A))


def hermiticity_error(A: np.ndarray) -> float:
    A = np.asarray(A)
    return float(np.max(np.abs(A - dagger(A)))) if A.size else 0.0


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = np.asarray(factors[0])
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f))
    return out


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``AB - BA``."""
    A = np.asarray(A)
    B = np.asarray(B)
    _check_square(A, "A")
    _check_square(B, "B")
    if A.shape[-1] != B.shape[-1]:
        raise DimensionMismatch(f"commutator of {A.shape} and {B.shape}")
    return A @ B - B @ A


def _jacobi_stack(A: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi on a stack ``(m, n, n)`` of Hermitian matrices.

    Each (p, q) rotation is J = diag-phase(q) · R(θ), with the phase chosen so
    that A[p, q] becomes real and R the classical real rotation that then
    annihilates it. Matrices that have already converged get the identity
    rotation, so one pass over the stack serves all of them.
    """
    A = A.astype(np.complex128, copy=True)
    m, n, _ = A.shape
    V = np.broadcast_to(np.eye(n, dtype=np.complex128), (m, n, n)).copy()
    if n == 1:
        return A[:, 0, 0].real.copy().reshape(m, 1), V

    scale = np.sqrt(np.sum(np.abs(A) ** 2, axis=(1, 2)))
    threshold = tol * np.maximum(scale, np.finfo(float).tiny)
    iu = np.triu_indices(n, 1)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.abs(A[:, iu[0], iu[1]]) ** 2, axis=1))
        if np.all(off <= threshold):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                mag = np.abs(apq)
                active = mag > 1e-300
                if not active.any():
                    continue
                safe = np.where(active, mag, 1.0)
                tau = (A[:, q, q].real - A[:, p, p].real) / (2.0 * safe)
                sgn = np.where(tau >= 0.0, 1.0, -1.0)
                t = np.where(active, sgn / (np.abs(tau) + np.hypot(1.0, tau)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ph = np.where(active, np.conj(apq) / safe, 1.0)  # e^{-i arg a_pq}

                cs, ss, phs = c[:, None], s[:, None], ph[:, None]
                col_p = A[:, :, p].copy()
                col_q = A[:, :, q]
                A[:, :, p] = cs * col_p - ss * phs * col_q
                A[:, :, q] = ss * col_p + cs * phs * col_q
                row_p = A[:, p, :].copy()
                row_q = A[:, q, :]
                A[:, p, :] = cs * row_p - ss * np.conj(phs) * row_q
                A[:, q, :] = ss * row_p + cs * np.conj(phs) * row_q
                A[:, p, q] = 0.0
                A[:, q, p] = 0.0

                vp = V[:, :, p].copy()
                vq = V[:, :, q]
                V[:, :, p] = cs * vp - ss * phs * vq
                V[:, :, q] = ss * vp + cs * phs * vq
    w = np.real(np.diagonal(A, axis1=1, axis2=2)).copy()
    return w, V


def herm_eig(A: np.ndarray, method: str = "jacobi", tol: float = HERMITIAN_TOL) -> EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix (or stack of them).

    Parameters
    ----------
    A : array_like, shape (..., n, n)
        Hermitian input. Asymmetry up to ``tol`` per entry is symmetrized away.
    method : {"jacobi", "lapack"}
        ``"jacobi"`` is the in-house cyclic Jacobi solver. ``"lapack"``
        defers to ``numpy.linalg.eigh``; use it for repeated decompositions
        of large matrices (the time-dependent propagator).

    Returns
    -------
    EigenDecomposition
        Ascending eigenvalues and orthonormal eigenvector columns.
    """
    A = np.asarray(A, dtype=np.complex128)
    _check_square(A)
    err = hermiticity_error(A)
    if err > tol:
        raise NonHermitianInput(f"asymmetry {err:.3e} exceeds {tol:.1e}")
    H = hermitian_part(A)
    if method == "lapack":
        w, V = np.linalg.eigh(H)
        return EigenDecomposition(w, V)
    if method != "jacobi":
        raise ValueError(f"unknown eigensolver {method!r}")

    batch = H.shape[:-2]
    n = H.shape[-1]
    w, V = _jacobi_stack(H.reshape(-1, n, n), tol=1e-15)
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    return EigenDecomposition(w.reshape(batch + (n,)), V.reshape(batch + (n, n)))


def _rebuild(V: np.ndarray, f: np.ndarray) -> np.ndarray:
    return (V * f[..., None, :]) @ dagger(V)


def sqrtm_psd(A: np.ndarray, tol: float = PSD_TOL, method: str = "jacobi") -> np.ndarray:
    """Principal square root of a positive-semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPositiveSemidefinite`. Eigenvalues that are pure
    roundoff (below ``1e-14`` of the largest) are also zeroed so that
    rank-deficient inputs such as pure states keep their exact rank.
    """
    w, V = herm_eig(A, method=method)
    wmin = np.min(w)
    if wmin < -tol:
        raise NotPositiveSemidefinite(f"eigenvalue {wmin:.3e} below -{tol:.1e}")
    floor = RANK_RTOL * np.max(np.abs(w), axis=-1, keepdims=True)
    w = np.where(w <= floor, 0.0, w)
    return hermitian_part(_rebuild(V, np.sqrt(w)))


def expm_herm_scaled(H: np.ndarray, s: complex, method: str = "jacobi") -> np.ndarray:
    """``exp(s H)`` for Hermitian ``H`` and complex scalar ``s``."""
    w, V = herm_eig(H, method=method)
    return _rebuild(V, np.exp(s * w))


def min_eigenvalue_above(A: np.ndarray, bound: float) -> bool:
    """True if every eigenvalue of Hermitian ``A`` exceeds ``-bound``.

    Decided by a Cholesky attempt on ``A + bound·I``, which is far cheaper
    than a full eigendecomposition on the integrator hot path.
    """
    A = np.asarray(A)
    n = A.shape[-1]
    try:
        np.linalg.cholesky(hermitian_part(A) + bound * np.eye(n))
    except np.linalg.LinAlgError:
        return False
    return True
