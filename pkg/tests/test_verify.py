import math

import numpy as np
import pytest

from hybridqed import dynamics as dy
from hybridqed import model, verify
from hybridqed.errors import DimensionMismatch, FitDidNotConverge
from hybridqed.linalg import kron


def test_projection_round_trip():
    lay = model.FactorLayout.default()
    X = kron(model.sigma_minus(), model.sigma_plus())
    op = kron(X + X.conj().T, np.eye(2), np.eye(2), np.eye(3))
    assert np.allclose(verify.project_to_atoms(op, lay), model.effective_hamiltonian(1.0))
    assert np.allclose(verify.project_to_atoms(np.eye(48), lay), np.eye(4))


def test_projection_of_single_creation_term_vanishes():
    p = model.preset_dispersive()
    t = model.full_model_terms()
    H = p.G_A * (t.atom_res_a + t.atom_res_a.conj().T)
    assert np.array_equal(verify.project_to_atoms(H, p.layout()), np.zeros((4, 4)))


def test_projection_shape_check():
    with pytest.raises(DimensionMismatch):
        verify.project_to_atoms(np.eye(12), model.FactorLayout.default())


def test_bch_null_results():
    p = model.preset_dispersive()
    assert verify.bch_dispersive_check(p, 0).G_numeric == 0.0
    for order in range(6):
        rep = verify.bch_dispersive_check(p.replace(Omega=0.0), order)
        assert rep.G_numeric == 0.0 and rep.G_formula == 0.0


def test_bch_order5_same_magnitude():
    rep = verify.bch_dispersive_check(model.preset_dispersive(), 5)
    assert 0.1 <= rep.ratio <= 10
    # only the fourth nested commutator links the atoms; its 1/4! weight
    # gives 5/6 of the closed form
    assert rep.ratio == pytest.approx(5 / 6, rel=1e-6)
    assert rep.deviation == pytest.approx(1 / 6, rel=1e-6)


def test_bch_requires_dispersive():
    with pytest.raises(ValueError):
        verify.bch_dispersive_check(model.preset_resonant(), 5)


def test_fit_synthetic():
    t = np.arange(0, 20, 1e-3)
    fit = verify.fit_sin2(t, np.sin(0.5 * t) ** 2)
    assert fit.frequency == pytest.approx(0.5, abs=1e-6)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-6)


def test_fit_with_bounds_and_failure():
    t = np.linspace(0, 10, 2000)
    fit = verify.fit_sin2(t, 0.8 * np.sin(1.3 * t) ** 2, bounds=(1.0, 2.0))
    assert fit.frequency == pytest.approx(1.3, abs=1e-6)
    rng = np.random.default_rng(3)
    with pytest.raises(FitDidNotConverge):
        verify.fit_sin2(t, rng.uniform(size=len(t)))


def test_swap_frequency_from_effective_model():
    g = 2.0
    rho0 = np.zeros((4, 4), complex)
    rho0[1, 1] = 1.0
    traj = dy.evolve(dy.effective_spec(g), rho0, 5.0, 1e-3)
    assert verify.extract_swap_frequency(traj).frequency == pytest.approx(g, abs=1e-4)


def test_period_and_zero_helpers():
    g = 1.7
    t = np.arange(0, 6, 1e-3)
    C = np.abs(np.cos(2 * g * t))
    assert verify.oscillation_period(t, C) == pytest.approx(math.pi / (2 * g), rel=1e-5)
    assert verify.first_zero(t, C) == pytest.approx(math.pi / (4 * g), abs=1e-6)
    assert math.isnan(verify.oscillation_period(t, np.zeros_like(t)))


def test_compare_regimes_presets():
    cmp = verify.compare_regimes(model.preset_dispersive(), model.preset_resonant(), t_max=4.0)
    assert cmp.resonant_period_shorter
    assert cmp.resonant.details["period_us"] == pytest.approx(
        math.pi / (2 * cmp.resonant.G_formula), rel=1e-3)
    assert cmp.dispersive.details["period_us"] == pytest.approx(1.35, rel=1e-3)
    assert cmp.coupling_ratio == pytest.approx(5.4613, rel=1e-4)


def test_compare_regimes_equal_couplings():
    p_disp = model.preset_dispersive()
    g_disp = model.coupling_dispersive(p_disp).value
    p_res = model.preset_resonant()
    p_res = p_res.replace(Omega=p_res.Omega * g_disp / model.coupling_resonant(p_res).value)
    cmp = verify.compare_regimes(p_disp, p_res, t_max=4.0)
    assert cmp.resonant.details["period_us"] == pytest.approx(cmp.dispersive.details["period_us"], rel=1e-6)


def test_conservation_error_is_zero():
    assert verify.conservation_error(model.preset_resonant_scaled()) < 1e-10


def test_full_model_report_fields():
    rep = verify.full_model_swap_check(model.preset_resonant_scaled(), t_max=0.05, dt=1e-3, record_every=1)
    for key in ("conservation_error", "norm_drift", "max_target_population", "constraint_residual"):
        assert key in rep.details
    assert rep.details["norm_drift"] < 1e-9
    assert rep.G_formula == pytest.approx(model.coupling_resonant(model.preset_resonant_scaled()).value)


def test_full_model_without_transfer_reports_nan():
    rep = verify.full_model_swap_check(model.preset_resonant_scaled(), t_max=0.05, dt=1e-3)
    assert math.isnan(rep.G_numeric)
    assert any("no transfer" in w for w in rep.warnings)
