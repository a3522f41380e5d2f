"""Two-qubit concurrence and state fidelity.

All functions accept a single 4×4 density matrix or a stack ``(N, 4, 4)``;
stacks are processed in one batched eigensolve.
"""
from __future__ import annotations

import numpy as np

from .errors import NotADensityMatrix, NotPositiveSemidefinite, NotXState
from .linalg import dagger, herm_eig, hermiticity_error, kron, sqrtm_psd
from .model import PAULI_Y

SIGMA_YY = kron(PAULI_Y, PAULI_Y)

DENSITY_TOL = 1e-9
POSITIVITY_TOL = 1e-7
LAMBDA_CLAMP = 1e-12
XSTATE_TOL = 1e-10

_X_MASK = np.eye(4, dtype=bool) | np.fliplr(np.eye(4, dtype=bool))


def _validated(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim < 2 or rho.shape[-1] != rho.shape[-2] or (dim is not None and rho.shape[-1] != dim):
        raise NotADensityMatrix(f"bad shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise NotADensityMatrix("non-finite entries")
    if hermiticity_error(rho) > DENSITY_TOL:
        raise NotADensityMatrix("not Hermitian")
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    if np.max(np.abs(tr - 1.0)) > DENSITY_TOL:
        raise NotADensityMatrix(f"trace deviates from 1 by {np.max(np.abs(tr - 1.0)):.3e}")
    return rho


def _sqrt_state(rho: np.ndarray) -> np.ndarray:
    try:
        return sqrtm_psd(rho, tol=POSITIVITY_TOL)
    except NotPositiveSemidefinite as exc:
        raise NotADensityMatrix(str(exc)) from exc


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """ρ̃ = (σy⊗σy) ρ* (σy⊗σy), conjugation taken in the |ee>,|eg>,|ge>,|gg> basis."""
    return SIGMA_YY @ np.conj(rho) @ SIGMA_YY


def concurrence(rho: np.ndarray) -> np.ndarray | float:
    """Wootters concurrence max(0, λ1 − λ2 − λ3 − λ4).

    The λ's are the eigenvalues of R = sqrt(√ρ ρ̃ √ρ), obtained as square roots
    of the eigenvalues of the Hermitian product √ρ ρ̃ √ρ.
    """
    rho = _validated(rho, 4)
    s = _sqrt_state(rho)
    inner = s @ spin_flip(rho) @ s
    mu = herm_eig(0.5 * (inner + dagger(inner))).eigenvalues
    lam = np.sqrt(np.where(mu < LAMBDA_CLAMP, 0.0, mu))[..., ::-1]
    c = np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])
    return float(c) if np.ndim(c) == 0 else c


def is_xstate(rho: np.ndarray, tol: float = XSTATE_TOL) -> bool:
    rho = np.asarray(rho)
    return bool(np.all(np.abs(rho[..., ~_X_MASK]) <= tol))


def concurrence_xstate(rho: np.ndarray) -> np.ndarray | float:
    """Closed form 2·max(0, |ρ23| − √(ρ11ρ44), |ρ14| − √(ρ22ρ33)) (1-based indices)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise NotXState(f"bad shape {rho.shape}")
    if not is_xstate(rho):
        raise NotXState("entries outside the diagonal and anti-diagonal exceed tolerance")
    d = np.clip(np.real(np.diagonal(rho, axis1=-2, axis2=-1)), 0.0, None)
    a = np.abs(rho[..., 1, 2]) - np.sqrt(d[..., 0] * d[..., 3])
    b = np.abs(rho[..., 0, 3]) - np.sqrt(d[..., 1] * d[..., 2])
    c = 2.0 * np.maximum(0.0, np.maximum(a, b))
    return float(c) if np.ndim(c) == 0 else c


def fidelity_uhlmann(rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray | float:
    """Tr sqrt(√ρ1 ρ2 √ρ1)."""
    rho1 = _validated(rho1)
    rho2 = _validated(rho2, rho1.shape[-1])
    s = _sqrt_state(rho1)
    inner = s @ rho2 @ s
    root = _sqrt_state(0.5 * (inner + dagger(inner)))
    tr = np.trace(root, axis1=-2, axis2=-1)
    f = np.real(tr)
    return float(f) if np.ndim(f) == 0 else f


def fidelity_overlap(rho1: np.ndarray, rho2: np.ndarray) -> np.ndarray | float:
    """Squared convention, (Tr sqrt(√ρ1 ρ2 √ρ1))²."""
    f = fidelity_uhlmann(rho1, rho2)
    return f * f
