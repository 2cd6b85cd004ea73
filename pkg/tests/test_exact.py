import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakmeas.exact import (
    conditional_probability,
    eta_coefficients,
    eta_g_probability,
    evolve_exact,
    exact_report,
    fock_probability,
)
from weakmeas.hilbert import (
    FockPointerState,
    QubitState,
    expm_propagate,
    number,
    op_tensor,
    sigma_x,
    tensor_product,
)
from weakmeas.weak_values import postselected_intensity_first_order

from conftest import MAX_SIGNAL, qubits, random_pointer, random_qubit


def oracle(s0, phi0, g):
    """Dense exp(-i g sigma_x (x) N) on the qubit-major product state."""
    H = op_tensor(sigma_x(), number(phi0.n_max))
    return expm_propagate(H, g, tensor_product(s0, phi0))


class TestEta:
    def test_identity(self, rng):
        s0 = random_qubit(rng)
        eta = eta_coefficients(s0, 0.0, 7)
        assert eta.eta_g == s0.alpha and eta.eta_e == s0.beta

    def test_quarter_turn(self, rng):
        s0 = random_qubit(rng)
        eta = eta_coefficients(s0, math.pi / 4, 2)
        assert eta.eta_g == pytest.approx(-1j * s0.beta, abs=1e-15)
        assert eta.eta_e == pytest.approx(-1j * s0.alpha, abs=1e-15)

    def test_frozen_example(self):
        # values from the dense-exponential oracle, alpha=0.6, beta=0.8, g=0.3, n=2
        eta = eta_coefficients(QubitState(0.6, 0.8), 0.3, 2)
        assert eta.eta_g == pytest.approx(0.49520136894580685 - 0.45171397871602825j, abs=1e-14)
        assert eta.eta_e == pytest.approx(0.6602684919277425 - 0.33878548403702113j, abs=1e-14)

    def test_frozen_example_against_oracle(self):
        out = oracle(QubitState(0.6, 0.8), FockPointerState.number_state(2, 3), 0.3).tensor()
        eta = eta_coefficients(QubitState(0.6, 0.8), 0.3, 2)
        assert abs(out[0, 2] - eta.eta_g) <= 1e-12 and abs(out[1, 2] - eta.eta_e) <= 1e-12

    def test_negative_index(self):
        with pytest.raises(ValueError):
            eta_coefficients(MAX_SIGNAL, 0.1, -1)

    @settings(max_examples=200)
    @given(qubits(), st.floats(-10, 10), st.integers(0, 50))
    def test_unit_norm(self, s0, g, n):
        eta = eta_coefficients(s0, g, n)
        assert abs(abs(eta.eta_g) ** 2 + abs(eta.eta_e) ** 2 - 1) <= 1e-14

    @settings(max_examples=200)
    @given(qubits(), st.floats(-10, 10), st.integers(0, 50))
    def test_closed_form_modulus(self, s0, g, n):
        eta = eta_coefficients(s0, g, n)
        assert abs(abs(eta.eta_g) ** 2 - eta_g_probability(s0, g, n)) <= 1e-14


class TestEvolve:
    def test_zero_coupling(self, rng):
        s0, phi0 = random_qubit(rng), random_pointer(rng, 5)
        np.testing.assert_allclose(evolve_exact(s0, phi0, 0.0).amps,
                                   tensor_product(s0, phi0).amps, rtol=0, atol=1e-15)

    def test_matches_oracle(self, rng):
        for _ in range(30):
            s0, phi0 = random_qubit(rng), random_pointer(rng, 16)
            g = rng.uniform(0, 1)
            err = np.max(np.abs(evolve_exact(s0, phi0, g).amps - oracle(s0, phi0, g).amps))
            assert err <= 1e-10

    def test_normalized(self, rng):
        psi = evolve_exact(random_qubit(rng), random_pointer(rng, 8), 0.77)
        assert abs(psi.norm() - 1) <= 1e-14

    def test_number_conservation(self, rng):
        s0, phi0 = random_qubit(rng), random_pointer(rng, 8)
        for g in (0.1, 1.0, 3.3):
            psi = evolve_exact(s0, phi0, g)
            probs = [fock_probability(psi, m) for m in range(9)]
            assert np.max(np.abs(np.array(probs) - np.abs(phi0.amps) ** 2)) <= 1e-14


class TestProbabilities:
    def test_number_state(self, rng):
        psi = evolve_exact(random_qubit(rng), FockPointerState.number_state(1, 3), 0.4)
        assert fock_probability(psi, 1) == pytest.approx(1.0, abs=1e-15)
        assert fock_probability(psi, 0) == 0.0

    def test_g_independent_half(self, rng):
        phi0 = FockPointerState([1 / math.sqrt(2), 1 / math.sqrt(2)])
        psi = evolve_exact(random_qubit(rng), phi0, 0.7)
        assert fock_probability(psi, 0) == pytest.approx(0.5, abs=1e-15)
        assert fock_probability(psi, 1) == pytest.approx(0.5, abs=1e-15)

    def test_completeness(self, rng):
        psi = evolve_exact(random_qubit(rng), random_pointer(rng, 6), 0.9)
        assert sum(fock_probability(psi, m) for m in range(7)) == pytest.approx(1.0, abs=1e-14)

    def test_index_range(self, rng):
        psi = evolve_exact(MAX_SIGNAL, random_pointer(rng, 2), 0.1)
        with pytest.raises(IndexError):
            fock_probability(psi, 3)
        with pytest.raises(IndexError):
            conditional_probability(psi, -1, "g")

    def test_conditional_frozen(self):
        # oracle value |eta_g1|^2 = 1/2 + sin(0.02)/2 at alpha=1/sqrt2, beta=i/sqrt2, g=0.01
        c1 = 0.8
        phi0 = FockPointerState([0.6, c1, 0.0])
        psi = evolve_exact(MAX_SIGNAL, phi0, 0.01)
        p = conditional_probability(psi, 1, "g")
        assert p == pytest.approx(c1 ** 2 * 0.5099993333466663, abs=1e-15)
        assert p == pytest.approx(c1 ** 2 * (0.5 + math.sin(0.02) / 2), abs=1e-15)
        ref = oracle(MAX_SIGNAL, phi0, 0.01).tensor()
        assert abs(p - abs(ref[0, 1]) ** 2) <= 1e-12

    def test_first_order_gap_is_third_order(self):
        phi0 = FockPointerState.number_state(1, 2)
        exact = conditional_probability(evolve_exact(MAX_SIGNAL, phi0, 0.01), 1, "g")
        first = postselected_intensity_first_order(MAX_SIGNAL, 1.0, 0.01, 1).i_s
        assert first - exact == pytest.approx(0.02 ** 3 / 12, rel=1e-3)

    def test_outcomes_sum_to_fock(self, rng):
        s0, phi0 = random_qubit(rng), random_pointer(rng, 5)
        psi = evolve_exact(s0, phi0, 0.35)
        for m in range(6):
            total = conditional_probability(psi, m, "g") + conditional_probability(psi, m, "e")
            assert abs(total - fock_probability(psi, m)) <= 1e-15

    def test_closed_form(self, rng):
        for _ in range(50):
            s0, phi0 = random_qubit(rng), random_pointer(rng, 5)
            g, m = rng.uniform(0, 2), int(rng.integers(0, 6))
            psi = evolve_exact(s0, phi0, g)
            expected = abs(phi0.amps[m]) ** 2 * eta_g_probability(s0, g, m)
            assert abs(conditional_probability(psi, m, "g") - expected) <= 1e-14

    def test_renormalized(self, rng):
        s0, phi0 = random_qubit(rng), random_pointer(rng, 3)
        psi = evolve_exact(s0, phi0, 0.2)
        p = conditional_probability(psi, 2, "e", renormalized=True)
        assert p == pytest.approx(1 - eta_g_probability(s0, 0.2, 2), abs=1e-14)

    def test_periodicity(self, rng):
        s0 = random_qubit(rng)
        for m in (1, 2, 5):
            for g in np.linspace(0, 1, 11):
                assert eta_g_probability(s0, g, m) == pytest.approx(
                    eta_g_probability(s0, g + math.pi / m, m), abs=1e-13)

    def test_report(self, rng):
        s0, phi0 = random_qubit(rng), random_pointer(rng, 3)
        rep = exact_report(s0, phi0, 0.1, 2)
        assert rep.order == "exact"
        assert abs(rep.i_s + rep.i_comp - rep.i0) <= 1e-12
        assert abs(rep.i_total - rep.i0) <= 1e-14
