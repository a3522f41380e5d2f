"""Time evolution: Lindblad master equation and the closed full-chain model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from . import model
from .errors import DimensionMismatch, StateInvariantViolated
from .linalg import expm_herm_scaled, hermitian_part, kron, min_eigenvalue_above

POSITIVITY_TOL = 1e-7

Hamiltonian = Union[np.ndarray, Callable[[float], np.ndarray]]


def bell_initial_state() -> np.ndarray:
    """(|eg> + i|ge>)/√2 as a density matrix in the |ee>,|eg>,|ge>,|gg> basis."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = rho[2, 2] = 0.5
    rho[1, 2] = -0.5j
    rho[2, 1] = 0.5j
    return rho


def bell_vector() -> np.ndarray:
    return np.array([0, 1, 1j, 0], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class Channel:
    """Dissipator (rate/2)(2 L_i ρ L_j† − L_j† L_i ρ − ρ L_j† L_i)."""
    rate: float
    lower_i: np.ndarray
    lower_j: np.ndarray

    @property
    def diagonal(self) -> bool:
        return self.lower_i is self.lower_j or np.array_equal(self.lower_i, self.lower_j)


@dataclass
class LindbladSpec:
    hamiltonian: Hamiltonian
    channels: Sequence[Channel] = ()
    _cache: list = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        self.channels = tuple(self.channels)
        dims = {c.lower_i.shape for c in self.channels} | {c.lower_j.shape for c in self.channels}
        if not callable(self.hamiltonian):
            self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
            dims.add(self.hamiltonian.shape)
        if len(dims) > 1:
            raise DimensionMismatch(f"inconsistent operator shapes {sorted(dims)}")
        for c in self.channels:
            if c.diagonal and c.rate < 0:
                raise ValueError("diagonal decay rates must be >= 0")
        # (rate, L_i, L_j†, L_j† L_i / 2) for nonzero rates
        self._cache = [(c.rate, c.lower_i, c.lower_j.conj().T, 0.5 * c.lower_j.conj().T @ c.lower_i)
                       for c in self.channels if c.rate != 0.0]

    @property
    def time_dependent(self) -> bool:
        return callable(self.hamiltonian)

    def hamiltonian_at(self, t: float) -> np.ndarray:
        return self.hamiltonian(t) if callable(self.hamiltonian) else self.hamiltonian


def effective_spec(G: float, Gamma_A: float = 0.0, Gamma_B: float = 0.0,
                   Gamma_AB: float = 0.0, Gamma_BA: float = 0.0) -> LindbladSpec:
    """Two-atom master equation with exchange coupling G and the four atomic channels."""
    sA = kron(model.sigma_minus(), np.eye(2))
    sB = kron(np.eye(2), model.sigma_minus())
    return LindbladSpec(
        hamiltonian=model.effective_hamiltonian(G),
        channels=[Channel(Gamma_A, sA, sA), Channel(Gamma_B, sB, sB),
                  Channel(Gamma_AB, sA, sB), Channel(Gamma_BA, sB, sA)],
    )


def effective_spec_from_params(p: model.SystemParams) -> LindbladSpec:
    G = model.effective_coupling(p).value
    return effective_spec(G, p.Gamma_A, p.Gamma_B, p.Gamma_AB, p.Gamma_BA)


def lindblad_rhs(spec: LindbladSpec, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
    """dρ/dt = −i[H, ρ] + Σ_channels (Γ_ij/2)(2 L_i ρ L_j† − L_j†L_i ρ − ρ L_j†L_i)."""
    H = spec.hamiltonian_at(t)
    if rho.shape != H.shape:
        raise DimensionMismatch(f"rho {rho.shape} vs H {H.shape}")
    out = -1j * (H @ rho - rho @ H)
    for rate, Li, Ljd, half_LjdLi in spec._cache:
        out += rate * (Li @ rho @ Ljd) - rate * (half_LjdLi @ rho + rho @ half_LjdLi)
    return out


def rk4_step(spec: LindbladSpec, rho: np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical RK4 step, then re-Hermitize and renormalize the trace."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    k1 = lindblad_rhs(spec, rho, t)
    k2 = lindblad_rhs(spec, rho + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = lindblad_rhs(spec, rho + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = lindblad_rhs(spec, rho + dt * k3, t + dt)
    out = hermitian_part(rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    tr = np.trace(out).real
    if not np.isfinite(tr) or tr <= 0:
        raise StateInvariantViolated(f"trace {tr} at t={t + dt:.6g}")
    out /= tr
    if not min_eigenvalue_above(out, POSITIVITY_TOL):
        raise StateInvariantViolated(f"negative eigenvalue below -{POSITIVITY_TOL:g} at t={t + dt:.6g}")
    return out


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("one state per time point required")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def rescaled(self, s: float) -> "Trajectory":
        """Same samples on the time axis t -> s·t."""
        return Trajectory(self.times * s, self.states, dict(self.observables))


def _step_schedule(t_max: float, dt: float, record_every: int):
    """Step sizes and which step indices to record (0 and the last are always kept)."""
    if not t_max > 0 or not dt > 0:
        raise ValueError("t_max and dt must be positive")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    n_full = int(math.floor(t_max / dt + 1e-9))
    times = np.arange(n_full + 1, dtype=float) * dt
    if t_max - times[-1] > 1e-9 * dt:
        times = np.append(times, t_max)
    else:
        times[-1] = t_max
    n_steps = len(times) - 1
    record = np.zeros(n_steps + 1, dtype=bool)
    record[::record_every] = True
    record[-1] = True
    return times, record


def evolve(spec: LindbladSpec, rho0: np.ndarray, t_max: float, dt: float,
           record_every: int = 1) -> Trajectory:
    """Fixed-step RK4 propagation of the master equation."""
    rho = np.array(rho0, dtype=complex)
    times, record = _step_schedule(t_max, dt, record_every)
    out_t, out_s = [times[0]], [rho.copy()]
    for k in range(1, len(times)):
        rho = rk4_step(spec, rho, times[k - 1], times[k] - times[k - 1])
        if record[k]:
            out_t.append(times[k])
            out_s.append(rho.copy())
    return Trajectory(np.array(out_t), np.array(out_s))


def evolve_full(p: model.SystemParams, state0: np.ndarray, t_max: float, dt: float,
                record_every: int = 1, method: str = "lapack") -> Trajectory:
    """Closed evolution under H̃_I(t) with midpoint short-time propagators.

    ``state0`` may be a state vector (length D) or a density matrix (D×D);
    recorded states have the same form. The observable ``"norm_drift"`` holds
    |‖ψ‖² − 1| (or |tr ρ − 1|) at each recorded time.
    """
    H = model.FullHamiltonian(p)
    D = H.layout.dim
    state = np.array(state0, dtype=complex)
    vector = state.ndim == 1
    if state.shape != ((D,) if vector else (D, D)):
        raise DimensionMismatch(f"state shape {state.shape} does not match dimension {D}")
    times, record = _step_schedule(t_max, dt, record_every)

    def drift(s):
        return abs(np.vdot(s, s).real - 1.0) if vector else abs(np.trace(s).real - 1.0)

    out_t, out_s, out_d = [times[0]], [state.copy()], [drift(state)]
    for k in range(1, len(times)):
        t0, h = times[k - 1], times[k] - times[k - 1]
        U = expm_herm_scaled(H(t0 + 0.5 * h), -1j * h, method=method)
        state = U @ state if vector else U @ state @ U.conj().T
        if record[k]:
            out_t.append(times[k])
            out_s.append(state.copy())
            out_d.append(drift(state))
    return Trajectory(np.array(out_t), np.array(out_s), {"norm_drift": np.array(out_d)})


def populations(states: np.ndarray) -> np.ndarray:
    """Basis populations for a stack of density matrices ``(N, D, D)`` or
    state vectors ``(N, D)``."""
    states = np.asarray(states)
    if states.ndim == 3:
        return np.real(np.diagonal(states, axis1=-2, axis2=-1))
    return np.abs(states) ** 2
