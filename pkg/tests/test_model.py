import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from hybridqed import model
from hybridqed.errors import DimensionMismatch, DivisionByZeroDetuning, UnknownFactor
from hybridqed.linalg import commutator, kron
from hybridqed.model import E, G, mhz

TOL_MHZ = 1e-9


def in_mhz(d):
    return np.array(d.as_tuple()) / model.TWO_PI


def test_dispersive_preset_detunings():
    p = model.preset_dispersive()
    assert np.allclose(in_mhz(model.detunings(p)), [120, 120, 120, 120, 3480], atol=TOL_MHZ)
    assert p.Gamma_AB == 0 and p.Gamma_BA == 0
    assert p.Omega == pytest.approx(mhz(50))


def test_resonant_preset_detunings():
    p = model.preset_resonant()
    assert np.allclose(in_mhz(model.detunings(p)), [15, 30, 15, 30, 3660], atol=TOL_MHZ)
    for g in (p.G_A, p.G_B, p.G_a, p.G_b):
        assert g == pytest.approx(mhz(40))


def test_equal_frequencies_give_zero_detunings():
    p = model.preset_dispersive().replace(omega_a=1.0, omega_b=1.0, omega_A=1.0, omega_B=1.0,
                                          omega_e1g=1.0, omega_e2g=1.0)
    assert model.detunings(p).as_tuple() == (0, 0, 0, 0, 0)


def test_constraint_residual():
    assert model.resonant_constraint_residual(model.Detunings(5, 7, 5, 7, 0)) == 0
    d = model.detunings(model.preset_resonant())
    assert model.resonant_constraint_residual(d) / model.TWO_PI == pytest.approx(-3660, abs=TOL_MHZ)
    assert any("constraint" in w for w in model.regime_warnings(model.preset_resonant()))


def test_scaled_preset_keeps_chain_detunings():
    p = model.preset_resonant_scaled()
    d = in_mhz(model.detunings(p))
    assert np.allclose(d, [15, 30, 15, 30, 366], atol=TOL_MHZ)
    assert p.Omega == pytest.approx(mhz(0.001))


def test_params_validation():
    with pytest.raises(ValueError):
        model.preset_dispersive().replace(G_A=-1.0)
    with pytest.raises(ValueError):
        model.preset_dispersive().replace(n_fock_a=1)
    with pytest.raises(ValueError):
        model.preset_dispersive().replace(Omega=math.nan)


def test_dispersive_coupling_value():
    g = model.coupling_dispersive(model.preset_dispersive()).value
    hand = 0.3 * mhz(50) * (40 / 120) ** 4
    assert g == pytest.approx(hand, rel=1e-10)
    assert g / model.TWO_PI == pytest.approx(0.185185, rel=1e-5)


def test_resonant_coupling_value():
    g = model.coupling_resonant(model.preset_resonant()).value
    hand = mhz(2 * 0.01 * 40**4 / 15**4)
    assert g == pytest.approx(hand, rel=1e-10)
    assert 1 <= g / model.coupling_dispersive(model.preset_dispersive()).value <= 100


def test_couplings_vanish_without_drive():
    assert model.coupling_dispersive(model.preset_dispersive(0.0)).value == 0
    assert model.coupling_resonant(model.preset_resonant(0.0)).value == 0


def test_dispersive_bracket_can_vanish():
    p = model.preset_dispersive().replace(omega_e1g=mhz(5000))  # Δ_e1e2 = 0
    with pytest.raises(DivisionByZeroDetuning) as info:
        model.coupling_dispersive(p)
    assert "delta_e1e2" in info.value.names


def test_resonant_zero_denominator_names():
    p = model.preset_resonant().replace(omega_A=model.preset_resonant().omega_a)
    with pytest.raises(DivisionByZeroDetuning) as info:
        model.coupling_resonant(p)
    assert "delta_Aa" in info.value.names


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_coupling_homogeneity(s, w):
    """Linear in Ω; scaling all couplings by s multiplies G by s⁴."""
    base = model.preset_dispersive()
    p = base.replace(Omega=w * base.Omega, G_A=s * base.G_A, G_B=s * base.G_B,
                     G_a=s * base.G_a, G_b=s * base.G_b)
    ratio = model.coupling_dispersive(p).value / model.coupling_dispersive(base).value
    assert ratio == pytest.approx(w * s**4, rel=1e-10)


def test_effective_hamiltonian():
    assert np.array_equal(model.effective_hamiltonian(0.0), np.zeros((4, 4)))
    H = model.effective_hamiltonian(1.0)
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 1
    assert np.array_equal(H, expected)
    assert np.allclose(np.linalg.eigvalsh(model.effective_hamiltonian(2.5)), [-2.5, 0, 0, 2.5])


def test_layout_basics():
    lay = model.FactorLayout.default()
    assert lay.names == ("atomA", "atomB", "resA", "resB", "fluxQubit")
    assert lay.dim == 48
    assert model.FactorLayout.default(3, 4).dim == 2 * 2 * 3 * 4 * 3
    with pytest.raises(UnknownFactor):
        lay.dim_of("resC")


def test_embed_examples(rng):
    lay = model.FactorLayout.default()
    assert np.array_equal(model.embed(np.eye(2), "atomA", lay), np.eye(48))
    X = rng.normal(size=(2, 2))
    Y = rng.normal(size=(2, 2))
    assert np.allclose(commutator(model.embed(X, "atomA", lay), model.embed(Y, "resB", lay)), 0)
    ground = lay.basis_state(atomA=G, atomB=G)
    assert np.allclose(model.embed(model.sigma_minus(), "atomA", lay) @ ground, 0)
    with pytest.raises(DimensionMismatch):
        model.embed(np.eye(3), "atomA", lay)


def test_full_hamiltonian_properties(rng):
    p = model.preset_dispersive()
    H = model.FullHamiltonian(p)
    N = model.number_operator(H.layout)
    for t in rng.uniform(0, 5, size=4):
        Ht = H(t)
        assert np.max(np.abs(Ht - Ht.conj().T)) < 1e-12
        assert np.max(np.abs(commutator(Ht, N))) < 1e-10
    assert H(0.0).shape == (48, 48)


def test_full_hamiltonian_single_element():
    p = model.preset_dispersive()
    lay = p.layout()
    H0 = model.full_hamiltonian(p, 0.0)
    i = lay.index(atomA=E, atomB=G)
    j = lay.index(atomA=G, atomB=G, resA=1)
    assert H0[j, i] == pytest.approx(p.G_A)
    assert H0[i, j] == pytest.approx(p.G_A)


def test_full_hamiltonian_larger_fock_conserves_number():
    p = model.preset_resonant().replace(n_fock_a=3, n_fock_b=3)
    H = model.FullHamiltonian(p)
    assert np.max(np.abs(commutator(H(0.3), model.number_operator(H.layout)))) < 1e-10


def test_lambda_generator():
    p = model.preset_dispersive()
    lam = model.lambda_generator(p)
    assert np.max(np.abs(lam + lam.conj().T)) < 1e-12
    zero = p.replace(G_A=0.0, G_B=0.0, G_a=0.0, G_b=0.0, Omega=0.0)
    assert np.array_equal(model.lambda_generator(zero), np.zeros((48, 48)))


def test_lambda_single_coupling_conserves_excitations():
    p = model.preset_dispersive().replace(G_B=0.0, G_a=0.0, G_b=0.0, Omega=0.0)
    lam = model.lambda_generator(p)
    N = model.number_operator(p.layout())
    lam2 = lam @ lam
    assert np.max(np.abs(commutator(lam2, N))) < 1e-12
    lay = p.layout()
    i = lay.index(atomA=E, atomB=G)
    j = lay.index(atomA=G, atomB=G, resA=1)
    block = lam2[np.ix_([i, j], [i, j])]
    r = p.G_A / model.detunings(p).delta_Aa
    assert np.allclose(block, -r**2 * np.eye(2))


def test_bch_order_zero_and_exact_conjugation():
    theta = 0.3
    lam = theta * (model.sigma_plus() - model.sigma_minus())
    H = model.PAULI_Z
    assert np.array_equal(model.bch_effective(H, lam, 0), H)
    exact = expm(lam) @ H @ expm(-lam)
    assert np.max(np.abs(model.bch_effective(H, lam, 20) - exact)) < 1e-8


def test_bch_rejects_bad_input():
    with pytest.raises(ValueError):
        model.bch_effective(np.eye(2), np.eye(2), -1)
    with pytest.raises(DimensionMismatch):
        model.bch_effective(np.eye(2), np.eye(3), 2)


def test_local_operators():
    assert np.array_equal(model.sigma_minus() @ np.array([1, 0]), [0, 1])  # e -> g
    a = model.destroy(3)
    assert np.allclose(a @ a.T - a.T @ a, np.diag([1, 1, -2]))
    assert model.flux_op("e1", "e2")[1, 2] == 1
    assert np.allclose(kron(model.PAULI_X, model.PAULI_X) @ kron(model.PAULI_X, model.PAULI_X), np.eye(4))
