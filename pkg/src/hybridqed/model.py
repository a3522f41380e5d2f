"""Parameters, operators and Hamiltonians of the atom–resonator–flux-qubit chain.

Conventions
-----------
* ħ = 1. Frequencies are angular, in rad/µs, so a value quoted as
  "2π × f MHz" is stored as ``2 * pi * f``; time is in µs.
* Kronecker factor order is (atomA, atomB, resA, resB, fluxQubit).
* Atomic basis: index 0 = |e>, index 1 = |g>, so that the two-atom basis
  reads |ee>, |eg>, |ge>, |gg>.
* Flux-qubit basis: index 0 = |g>, 1 = |e1>, 2 = |e2>.
* Resonators: Fock states |0>, ..., |n_fock - 1>.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import DimensionMismatch, DivisionByZeroDetuning, UnknownFactor
from .linalg import commutator, kron

TWO_PI = 2.0 * math.pi


def mhz(f: float) -> float:
    """Convert a frequency quoted as ``2π × f MHz`` to rad/µs."""
    return TWO_PI * f


class Regime(str, enum.Enum):
    DISPERSIVE = "dispersive"
    RESONANT = "resonant"


@dataclass(frozen=True)
class SystemParams:
    omega_a: float
    omega_b: float
    omega_A: float
    omega_B: float
    omega_e1g: float
    omega_e2g: float
    G_A: float
    G_B: float
    G_a: float
    G_b: float
    Omega: float
    Gamma_A: float
    Gamma_B: float
    Gamma_AB: float = 0.0
    Gamma_BA: float = 0.0
    regime: Regime = Regime.DISPERSIVE
    n_fock_a: int = 2
    n_fock_b: int = 2

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        for f in fields(self):
            if f.name in ("regime", "n_fock_a", "n_fock_b"):
                continue
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{f.name} must be finite and >= 0, got {v}")
        if self.n_fock_a < 2 or self.n_fock_b < 2:
            raise ValueError("Fock truncation must keep at least 2 levels")

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def layout(self) -> "FactorLayout":
        return FactorLayout.default(self.n_fock_a, self.n_fock_b)


def preset_dispersive(Omega: float = mhz(50.0)) -> SystemParams:
    """Dispersive-regime parameters: all four detunings 2π·120 MHz."""
    return SystemParams(
        omega_a=mhz(5120.0),
        omega_b=mhz(1400.0),
        omega_A=mhz(5240.0),
        omega_B=mhz(1280.0),
        omega_e2g=mhz(5000.0),
        omega_e1g=mhz(1520.0),
        G_A=mhz(40.0), G_B=mhz(40.0), G_a=mhz(40.0), G_b=mhz(40.0),
        Omega=Omega,
        Gamma_A=mhz(0.1), Gamma_B=mhz(0.1), Gamma_AB=0.0, Gamma_BA=0.0,
        regime=Regime.DISPERSIVE,
    )


def preset_resonant(Omega: float = mhz(0.01)) -> SystemParams:
    """Resonant-regime parameters: Δ_Aa = Δ_Bb = 2π·15, Δ_aq = Δ_bq = 2π·30 MHz."""
    return SystemParams(
        omega_a=mhz(5120.0),
        omega_b=mhz(1400.0),
        omega_A=mhz(5135.0),
        omega_B=mhz(1385.0),
        omega_e2g=mhz(5090.0),
        omega_e1g=mhz(1430.0),
        G_A=mhz(40.0), G_B=mhz(40.0), G_a=mhz(40.0), G_b=mhz(40.0),
        Omega=Omega,
        Gamma_A=mhz(0.1), Gamma_B=mhz(0.1), Gamma_AB=0.0, Gamma_BA=0.0,
        regime=Regime.RESONANT,
    )


def preset_resonant_scaled(factor: float = 10.0, Omega: float = mhz(0.01)) -> SystemParams:
    """Resonant preset with Δ_e1e2 divided by ``factor`` and Ω scaled alongside.

    The resonator-b side (ω_b, ω_B, ω_e1g) is shifted rigidly, which keeps
    Δ_Aa, Δ_aq, Δ_Bb, Δ_bq unchanged and Ω/Δ_e1e2 fixed. Used to make the
    full-model propagation affordable.
    """
    p = preset_resonant(Omega / factor)
    d = detunings(p)
    shift = (p.omega_e2g - d.delta_e1e2 / factor) - p.omega_e1g
    return p.replace(
        omega_b=p.omega_b + shift,
        omega_B=p.omega_B + shift,
        omega_e1g=p.omega_e1g + shift,
    )


@dataclass(frozen=True)
class Detunings:
    delta_Aa: float
    delta_aq: float
    delta_Bb: float
    delta_bq: float
    delta_e1e2: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.delta_Aa, self.delta_aq, self.delta_Bb, self.delta_bq, self.delta_e1e2)


def detunings(p: SystemParams) -> Detunings:
    return Detunings(
        delta_Aa=abs(p.omega_a - p.omega_A),
        delta_aq=abs(p.omega_e2g - p.omega_a),
        delta_Bb=abs(p.omega_b - p.omega_B),
        delta_bq=abs(p.omega_e1g - p.omega_b),
        delta_e1e2=p.omega_e2g - p.omega_e1g,
    )


def resonant_constraint_residual(d: Detunings) -> float:
    """``Δ_Bb − Δ_bq − Δ_e1e2 + Δ_aq − Δ_Aa``.

    Zero when the five-step exchange path from atom A to atom B is resonant
    end to end; its magnitude is the net energy mismatch of that path.
    """
    return d.delta_Bb - d.delta_bq - d.delta_e1e2 + d.delta_aq - d.delta_Aa


def regime_warnings(p: SystemParams) -> list[str]:
    """Human-readable violations of the regime validity conditions."""
    d = detunings(p)
    pairs = [("delta_aq", d.delta_aq, "G_a", p.G_a), ("delta_bq", d.delta_bq, "G_b", p.G_b),
             ("delta_Aa", d.delta_Aa, "G_A", p.G_A), ("delta_Bb", d.delta_Bb, "G_B", p.G_B)]
    out = []
    if p.regime is Regime.DISPERSIVE:
        for dn, dv, gn, gv in pairs:
            if not dv > gv:
                out.append(f"dispersive regime needs {dn} >> {gn}: {dv / TWO_PI:.6g} vs {gv / TWO_PI:.6g} (2pi MHz)")
        ratio = d.delta_aq * d.delta_bq / p.Omega**2 if p.Omega > 0 else math.inf
        if ratio < 10.0:
            out.append(f"dispersive regime needs delta_aq*delta_bq >> Omega^2: ratio is only {ratio:.3g}")
    else:
        for dn, dv, gn, gv in pairs:
            if not dv < gv:
                out.append(f"resonant regime needs {dn} << {gn}: {dv / TWO_PI:.6g} vs {gv / TWO_PI:.6g} (2pi MHz)")
        res = resonant_constraint_residual(d)
        if abs(res) > 1e-9 * max(abs(x) for x in d.as_tuple()):
            out.append(f"resonant detuning constraint violated: residual {res / TWO_PI:.6g} (2pi MHz)")
    return out


@dataclass(frozen=True)
class EffectiveCoupling:
    value: float
    regime: Regime


def _require_nonzero(**values: float) -> None:
    zero = [k for k, v in values.items() if v == 0.0]
    if zero:
        raise DivisionByZeroDetuning(zero)


def coupling_dispersive(p: SystemParams) -> EffectiveCoupling:
    d = detunings(p)
    _require_nonzero(delta_e1e2=d.delta_e1e2, delta_aq=d.delta_aq, delta_bq=d.delta_bq,
                     delta_Aa=d.delta_Aa, delta_Bb=d.delta_Bb)
    bracket = (d.delta_Aa - d.delta_Bb + 4.0 * (d.delta_aq - d.delta_bq) + 6.0 * d.delta_e1e2)
    g = (p.Omega * p.G_a * p.G_b * p.G_A * p.G_B
         / (d.delta_e1e2 * d.delta_aq * d.delta_bq * d.delta_Aa * d.delta_Bb)) * bracket / 20.0
    return EffectiveCoupling(g, Regime.DISPERSIVE)


def coupling_resonant(p: SystemParams) -> EffectiveCoupling:
    d = detunings(p)
    _require_nonzero(delta_Aa=d.delta_Aa, delta_Bb=d.delta_Bb,
                     **{"delta_aq-delta_Aa": d.delta_aq - d.delta_Aa,
                        "delta_bq-delta_Bb": d.delta_bq - d.delta_Bb})
    g = (2.0 * p.Omega * p.G_a * p.G_b * p.G_A * p.G_B
         / (d.delta_Aa * d.delta_Bb * (d.delta_aq - d.delta_Aa) * (d.delta_bq - d.delta_Bb)))
    return EffectiveCoupling(g, Regime.RESONANT)


def effective_coupling(p: SystemParams) -> EffectiveCoupling:
    """Closed-form coupling for the regime tagged on ``p``."""
    if p.regime is Regime.DISPERSIVE:
        return coupling_dispersive(p)
    return coupling_resonant(p)


# ---------------------------------------------------------------------------
# local operators

def sigma_minus() -> np.ndarray:
    """Atomic lowering |g><e| in the (e, g) basis."""
    return np.array([[0, 0], [1, 0]], dtype=complex)


def sigma_plus() -> np.ndarray:
    return sigma_minus().T.copy()


def destroy(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


FLUX_LEVELS = {"g": 0, "e1": 1, "e2": 2}


def flux_op(x: str, y: str) -> np.ndarray:
    """Flux-qubit transition operator |x><y|."""
    op = np.zeros((3, 3), dtype=complex)
    op[FLUX_LEVELS[x], FLUX_LEVELS[y]] = 1.0
    return op


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class FactorLayout:
    factors: tuple[tuple[str, int], ...]

    @classmethod
    def default(cls, n_fock_a: int = 2, n_fock_b: int = 2) -> "FactorLayout":
        return cls((("atomA", 2), ("atomB", 2), ("resA", n_fock_a), ("resB", n_fock_b), ("fluxQubit", 3)))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def dim_of(self, name: str) -> int:
        for n, d in self.factors:
            if n == name:
                return d
        raise UnknownFactor(name)

    def index(self, **levels: int) -> int:
        """Flat basis index; unspecified factors default to level 0.

        Atoms take 0 for |e> and 1 for |g>, so pass ``atomA=1`` for ground.
        """
        unknown = set(levels) - set(self.names)
        if unknown:
            raise UnknownFactor(", ".join(sorted(unknown)))
        return int(np.ravel_multi_index(tuple(levels.get(n, 0) for n in self.names), self.dims))

    def basis_state(self, **levels: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(**levels)] = 1.0
        return psi


E, G = 0, 1  # atomic level indices


def embed(op: np.ndarray, factor: str, layout: FactorLayout) -> np.ndarray:
    """Lift a single-factor operator to the full tensor space."""
    op = np.asarray(op)
    dim = layout.dim_of(factor)
    if op.shape != (dim, dim):
        raise DimensionMismatch(f"{factor} has dimension {dim}, operator is {op.shape}")
    parts = [op if name == factor else np.eye(d) for name, d in layout.factors]
    return kron(*parts)


@dataclass(frozen=True)
class FullModelTerms:
    """Lowering-type operator of each interaction term; the Hamiltonian is
    Σ_k g_k (X_k e^{iΔ_k t} + h.c.)."""
    layout: FactorLayout
    atom_res_a: np.ndarray    # a† σ_A⁻
    qubit_res_a: np.ndarray   # a† σ⁻_{g e2}
    atom_res_b: np.ndarray    # b† σ_B⁻
    qubit_res_b: np.ndarray   # b† σ⁻_{g e1}
    drive: np.ndarray         # σ_{e1 e2} = |e1><e2|


@functools.lru_cache(maxsize=8)
def full_model_terms(n_fock_a: int = 2, n_fock_b: int = 2) -> FullModelTerms:
    lay = FactorLayout.default(n_fock_a, n_fock_b)
    ad = embed(destroy(n_fock_a).T, "resA", lay)
    bd = embed(destroy(n_fock_b).T, "resB", lay)
    terms = FullModelTerms(
        layout=lay,
        atom_res_a=ad @ embed(sigma_minus(), "atomA", lay),
        qubit_res_a=ad @ embed(flux_op("g", "e2"), "fluxQubit", lay),
        atom_res_b=bd @ embed(sigma_minus(), "atomB", lay),
        qubit_res_b=bd @ embed(flux_op("g", "e1"), "fluxQubit", lay),
        drive=embed(flux_op("e1", "e2"), "fluxQubit", lay),
    )
    for f in fields(terms)[1:]:
        getattr(terms, f.name).setflags(write=False)
    return terms


def _term_list(p: SystemParams):
    t = full_model_terms(p.n_fock_a, p.n_fock_b)
    d = detunings(p)
    return [
        (p.G_A, d.delta_Aa, t.atom_res_a),
        (p.G_a, d.delta_aq, t.qubit_res_a),
        (p.G_B, d.delta_Bb, t.atom_res_b),
        (p.G_b, d.delta_bq, t.qubit_res_b),
        (p.Omega, d.delta_e1e2, t.drive),
    ]


class FullHamiltonian:
    """Callable ``t -> H̃_I(t)`` for fixed parameters (term matrices cached)."""

    def __init__(self, p: SystemParams):
        self.params = p
        self.layout = p.layout()
        self._terms = [(g, delta, X) for g, delta, X in _term_list(p) if g != 0.0]

    def __call__(self, t: float) -> np.ndarray:
        D = self.layout.dim
        H = np.zeros((D, D), dtype=complex)
        for g, delta, X in self._terms:
            H += (g * np.exp(1j * delta * t)) * X
        return H + H.conj().T


def full_hamiltonian(p: SystemParams, t: float) -> np.ndarray:
    """Interaction-picture Hamiltonian of the full chain at time ``t`` (µs)."""
    return FullHamiltonian(p)(t)


def number_operator(layout: FactorLayout) -> np.ndarray:
    """Total excitation number with flux-qubit weights g=0, e1=1, e2=1."""
    n_a = destroy(layout.dim_of("resA"))
    n_b = destroy(layout.dim_of("resB"))
    excited = np.diag([1.0, 0.0]).astype(complex)
    return (embed(excited, "atomA", layout) + embed(excited, "atomB", layout)
            + embed(n_a.T @ n_a, "resA", layout) + embed(n_b.T @ n_b, "resB", layout)
            + embed(np.diag([0.0, 1.0, 1.0]).astype(complex), "fluxQubit", layout))


def lambda_generator(p: SystemParams, layout: FactorLayout | None = None) -> np.ndarray:
    """Anti-Hermitian generator of the dispersive transformation.

    Each coupling contributes (g/Δ)(X − X†) with X its lowering-type operator.
    """
    d = detunings(p)
    _require_nonzero(delta_Aa=d.delta_Aa, delta_aq=d.delta_aq, delta_e1e2=d.delta_e1e2,
                     delta_Bb=d.delta_Bb, delta_bq=d.delta_bq)
    if layout is not None and layout != p.layout():
        p = p.replace(n_fock_a=layout.dim_of("resA"), n_fock_b=layout.dim_of("resB"))
    D = p.layout().dim
    lam = np.zeros((D, D), dtype=complex)
    for g, delta, X in _term_list(p):
        lam += (g / delta) * (X - X.conj().T)
    return lam


def bch_effective(H: np.ndarray, lam: np.ndarray, order: int) -> np.ndarray:
    """Truncated series Σ_{k≤order} ad_λ^k(H) / k! for e^λ H e^{−λ}."""
    if order < 0:
        raise ValueError("order must be >= 0")
    H = np.asarray(H)
    lam = np.asarray(lam)
    if H.shape != lam.shape:
        raise DimensionMismatch(f"H {H.shape} vs lambda {lam.shape}")
    out = H.astype(complex, copy=True)
    term = out
    for k in range(1, order + 1):
        term = commutator(lam, term) / k
        out = out + term
    return out


def effective_hamiltonian(G: EffectiveCoupling | float) -> np.ndarray:
    """G (σ_A⁻σ_B⁺ + σ_A⁺σ_B⁻) in the |ee>, |eg>, |ge>, |gg> basis."""
    g = G.value if isinstance(G, EffectiveCoupling) else float(G)
    X = kron(sigma_minus(), sigma_plus())
    return g * (X + X.conj().T)
