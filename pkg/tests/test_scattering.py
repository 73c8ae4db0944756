import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from scatomo.scattering import (
    MeasurementSetup,
    channel_amplitudes,
    coefficients,
    omega,
    outcome_probabilities,
    probability_closed_form,
    probability_trace,
    probe_state_after_transmission,
    probe_state_after_transmission_trace,
    reflection_coefficients,
    reflection_operator,
    transmission_coefficients,
    transmission_operator,
)
from scatomo.spin_algebra import IDENTITY4, bloch_to_density, heisenberg_coupling

from conftest import random_bloch, random_directions, random_omegas

LOG_GRID = np.geomspace(1e-3, 1e3, 100)


def test_omega():
    assert omega(1) == 1
    assert omega(np.sqrt(3)) == pytest.approx(1 / np.sqrt(3), rel=1e-15)
    assert omega(2) == 0.5
    for bad in (0, -1, np.inf, np.nan):
        with pytest.raises(ValueError):
            omega(bad)


def test_amplitudes_free_limit():
    amp = channel_amplitudes(1e-12)
    assert abs(amp.t1 - 1) < 1e-11 and abs(amp.t3 - 1) < 1e-11
    assert abs(amp.r1) < 1e-11 and abs(amp.r3) < 1e-11


def test_amplitudes_at_unit_strength():
    # 1/|1 - 3i|^2 = 1/10
    amp = channel_amplitudes(1.0)
    assert abs(amp.t1) ** 2 == pytest.approx(0.1, abs=1e-15)
    assert abs(amp.r1) ** 2 == pytest.approx(0.9, abs=1e-15)


@pytest.mark.parametrize("w", LOG_GRID)
def test_per_channel_unitarity(w):
    amp = channel_amplitudes(w)
    assert abs(amp.t1) ** 2 + abs(amp.r1) ** 2 == pytest.approx(1, abs=1e-12)
    assert abs(amp.t3) ** 2 + abs(amp.r3) ** 2 == pytest.approx(1, abs=1e-12)
    assert amp.t1 == pytest.approx(1 + amp.r1, abs=1e-15)
    assert amp.t3 == pytest.approx(1 + amp.r3, abs=1e-15)


@pytest.mark.parametrize("w", LOG_GRID[::9])
def test_operator_identities(w):
    t, r = transmission_operator(w), reflection_operator(w)
    np.testing.assert_allclose(t, IDENTITY4 + r, atol=1e-15)
    np.testing.assert_allclose(t.conj().T @ t + r.conj().T @ r, IDENTITY4, atol=1e-12)
    prefactor = 1 / ((1 - 3j * w) * (1 + 1j * w))
    h = heisenberg_coupling()
    np.testing.assert_allclose(t, prefactor * ((1 - 2j * w) * IDENTITY4 - 1j * w * h), atol=1e-12)
    np.testing.assert_allclose(r, prefactor * (-3 * w**2 * IDENTITY4 - 1j * w * h), atol=1e-12)


def test_operators_free_limit():
    np.testing.assert_allclose(transmission_operator(1e-13), IDENTITY4, atol=1e-12)
    np.testing.assert_allclose(reflection_operator(1e-13), 0, atol=1e-12)


def test_transmission_coefficients_at_unit_strength():
    # (1+7)/(2*2*10), (1+3)/(2*2*10), 1/(2*10), -1/(2*10)
    co = transmission_coefficients(1.0)
    assert co.a == pytest.approx(0.2, abs=1e-15)
    assert co.a_prime == pytest.approx(0.1, abs=1e-15)
    assert co.b == pytest.approx(0.05, abs=1e-15)
    assert co.c == pytest.approx(-0.05, abs=1e-15)


def test_coefficient_relations_and_limits():
    t = transmission_coefficients(LOG_GRID)
    r = reflection_coefficients(LOG_GRID)
    np.testing.assert_array_equal(t.b, r.b)
    assert np.all(t.c < 0) and np.all(r.c > 0)
    strong = transmission_coefficients(1e6), reflection_coefficients(1e6)
    assert strong[0].a == pytest.approx(0, abs=1e-6)
    assert strong[1].a == pytest.approx(0.5, abs=1e-6)
    weak = transmission_coefficients(1e-6), reflection_coefficients(1e-6)
    assert weak[0].a == pytest.approx(0.5, abs=1e-6)
    assert weak[1].a == pytest.approx(0, abs=1e-6)


def test_coefficients_dispatch():
    assert coefficients(0.3, "transmission").channel == "t"
    assert coefficients(0.3, "r").channel == "r"
    with pytest.raises(ValueError):
        coefficients(0.3, "x")


def _random_setups(rng, n):
    ws = random_omegas(rng, n)
    ni, nf = random_directions(rng, n), random_directions(rng, n)
    vs = random_bloch(rng, n)
    chans = rng.choice(["t", "r"], size=n)
    for w, a, b, v, c in zip(ws, ni, nf, vs, chans):
        yield MeasurementSetup(a, b, 1 / w, c), v


def test_trace_and_closed_form_agree(rng):
    worst = 0.0
    for setup, v in _random_setups(rng, 1000):
        p_cf = probability_closed_form(setup, v)
        p_tr = probability_trace(setup, bloch_to_density(v))
        assert 0 <= p_cf <= 1
        worst = max(worst, abs(p_cf - p_tr))
    assert worst < 1e-12


def test_free_propagation_limits(rng):
    for n, v in zip(random_directions(rng, 20), random_bloch(rng, 20)):
        s = MeasurementSetup(n, n, 1e13, "t")
        assert probability_trace(s, bloch_to_density(v)) == pytest.approx(1, abs=1e-12)
        for nf in random_directions(rng, 3):
            assert probability_trace(MeasurementSetup(n, nf, 1e13, "r"), bloch_to_density(v)) < 1e-12


def test_reflection_parallel_detection_is_blind_to_target(rng):
    n = random_directions(rng, 1)[0]
    setup = MeasurementSetup(n, n, 0.8, "r")
    co = reflection_coefficients(1 / 0.8)
    values = [probability_closed_form(setup, v) for v in random_bloch(rng, 50)]
    np.testing.assert_allclose(values, co.a + co.a_prime, atol=1e-14)


def test_transmission_parallel_range_at_sqrt3():
    n = np.array([0.0, 0.6, 0.8])
    setup = MeasurementSetup(n, n, np.sqrt(3), "t")
    assert probability_closed_form(setup, n) == pytest.approx(0.75, abs=1e-12)
    assert probability_closed_form(setup, -n) == pytest.approx(0.25, abs=1e-12)


def test_four_outcomes_sum_to_one(rng):
    for setup, v in _random_setups(rng, 300):
        p = outcome_probabilities(setup.n_i, setup.n_f, setup.kappa, v)
        assert p.sum() == pytest.approx(1, abs=1e-12)
        assert np.all(p >= 0)


def test_rotational_covariance(rng):
    rots = Rotation.random(200, random_state=7)
    for rot, (setup, v) in zip(rots, _random_setups(rng, 200)):
        rotated = MeasurementSetup(rot.apply(setup.n_i), rot.apply(setup.n_f), setup.kappa, setup.channel)
        assert probability_closed_form(rotated, rot.apply(v)) == pytest.approx(
            probability_closed_form(setup, v), abs=1e-10)
        assert probability_trace(rotated, bloch_to_density(rot.apply(v))) == pytest.approx(
            probability_trace(setup, bloch_to_density(v)), abs=1e-10)


def test_probe_state_aligned_target():
    rho_x, norm = probe_state_after_transmission(np.diag([1.0, 0.0]), 0.7, [0, 0, 1])
    np.testing.assert_allclose(rho_x, np.diag([1 / (1 + 0.49), 0]), atol=1e-15)
    assert norm == pytest.approx(1 / 1.49)


def test_probe_state_reference_coefficients(rng):
    w = 0.45
    rho_dd = 0.3
    rho = bloch_to_density([0.0, 0.0, 1 - 2 * rho_dd])
    rho_x, _ = probe_state_after_transmission(rho, w, [0, 0, 1])
    scaled = rho_x * (1 + w**2)
    assert scaled[1, 1] == pytest.approx(4 * w**2 / (1 + 9 * w**2) * rho_dd, abs=1e-15)
    assert scaled[0, 0] == pytest.approx(0.7 + (1 + w**2) / (1 + 9 * w**2) * rho_dd, abs=1e-15)


def test_probe_state_matches_partial_trace(rng):
    for n, v, w in zip(random_directions(rng, 200), random_bloch(rng, 200), random_omegas(rng, 200)):
        rho = bloch_to_density(v)
        rho_x, norm = probe_state_after_transmission(rho, w, n)
        np.testing.assert_allclose(rho_x, probe_state_after_transmission_trace(rho, w, n), atol=1e-12)
        np.testing.assert_allclose(rho_x, rho_x.conj().T, atol=1e-15)
        assert np.linalg.eigvalsh(rho_x).min() >= -1e-12
        # Tr rho_x is the transmission probability summed over detector outcomes.
        t_plus = probability_closed_form(MeasurementSetup(n, n, 1 / w, "t"), v)
        t_minus = probability_closed_form(MeasurementSetup(n, -n, 1 / w, "t"), v)
        assert norm == pytest.approx(t_plus + t_minus, abs=1e-12)
        assert rho_x[0, 0].real == pytest.approx(t_plus, abs=1e-12)


def test_setup_validation():
    with pytest.raises(ValueError):
        MeasurementSetup([0, 0, 1], [0, 0, 1], 0.0, "t")
    with pytest.raises(ValueError):
        MeasurementSetup([0, 0, 2], [0, 0, 1], 1.0, "t")
    with pytest.raises(ValueError):
        MeasurementSetup([0, 0, 1], [0, 0, 1], 1.0, "sideways")
