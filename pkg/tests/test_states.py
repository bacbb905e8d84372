import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcslab.linalg import op_norm
from fcslab.states import (
    AtomicMeasure,
    entropy,
    gibbs,
    gibbs_variational_check,
    kms_defect,
    maximally_mixed,
    measure,
    pure_state,
    random_density,
    random_hermitian,
    spectral_measure,
)

SZ = np.array([[1, 0], [0, -1]], dtype=complex)


class TestGibbs:
    def test_two_level_closed_form(self):
        # independent closed form: weights (1, e^-1)/(1 + e^-1)
        z = 1.0 + np.exp(-1.0)
        rho = gibbs(np.diag([0.0, 1.0]).astype(complex), 1.0)
        assert np.allclose(rho, np.diag([1.0 / z, np.exp(-1.0) / z]), atol=1e-14)
        assert abs(rho[0, 0].real - 0.7310585786300049) <= 1e-12

    def test_infinite_temperature(self):
        assert np.allclose(gibbs(np.diag([0.0, 1.0, 3.0]).astype(complex), 0.0), np.eye(3) / 3)

    def test_hamiltonian_proportional_to_identity(self):
        assert np.allclose(gibbs(np.eye(4, dtype=complex), 7.3), np.eye(4) / 4)

    def test_overflow_guard(self):
        rho = gibbs(np.diag([0.0, 2000.0]).astype(complex), 1.0)
        assert np.allclose(rho, np.diag([1.0, 0.0]))

    def test_commutes_with_hamiltonian(self, rng):
        h = random_hermitian(4, rng)
        rho = gibbs(h, 1.3)
        assert op_norm(h @ rho - rho @ h) <= 1e-12

    def test_energy_monotone_in_beta(self, rng):
        h = random_hermitian(4, rng)
        betas = np.linspace(-3.0, 3.0, 25)
        energies = [np.trace(h @ gibbs(h, b)).real for b in betas]
        assert all(e2 <= e1 + 1e-12 for e1, e2 in zip(energies, energies[1:]))

    def test_low_temperature_limits(self, rng):
        h = random_hermitian(3, rng)
        w = np.linalg.eigvalsh(h)
        gap = min(np.diff(w))
        for beta, target in ((40.0, w[0]), (-40.0, w[-1])):
            e = np.trace(h @ gibbs(h, beta)).real
            assert abs(e - target) <= 3 * np.exp(-abs(beta) * gap) + 1e-12


class TestEntropy:
    def test_maximally_mixed(self):
        for d in (2, 3, 5):
            assert abs(entropy(maximally_mixed(d)) - np.log(d)) <= 1e-12

    def test_pure_state(self, rng):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert entropy(pure_state(psi)) <= 1e-12

    def test_direct_formula(self):
        # oracle: -(3/4 log 3/4 + 1/4 log 1/4)
        expected = -(0.75 * np.log(0.75) + 0.25 * np.log(0.25))
        assert abs(expected - 0.5623351446188083) <= 1e-12
        assert abs(entropy(np.diag([0.75, 0.25]).astype(complex)) - expected) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6))
    def test_bounds(self, seed, d):
        rho = random_density(d, np.random.default_rng(seed))
        s = entropy(rho)
        assert -1e-12 <= s <= np.log(d) + 1e-12


class TestVariational:
    def test_equality_at_thermal(self, rng):
        h = random_hermitian(3, rng)
        rep = gibbs_variational_check(h, 1.2, trials=30, rng_seed=5)
        assert abs(rep.equality_gap) <= 1e-10
        assert rep.max_violation <= 1e-10

    def test_pure_ground_state_gap(self):
        # oracle: gap = log(1 + e^-1) for nu = ground state of diag(0, 1)
        h = np.diag([0.0, 1.0]).astype(complex)
        nu = np.diag([1.0, 0.0]).astype(complex)
        log_z = np.log(1.0 + np.exp(-1.0))
        value = np.trace(nu @ (-h)).real + entropy(nu)
        assert abs((log_z - value) - np.log1p(np.exp(-1.0))) <= 1e-12
        rep = gibbs_variational_check(h, 1.0, trials=5, rng_seed=0)
        assert rep.max_violation <= 1e-10

    def test_zero_hamiltonian_reduces_to_entropy_bound(self, rng):
        rep = gibbs_variational_check(np.zeros((3, 3), dtype=complex), 1.0, trials=40, rng_seed=2)
        # log tr e^0 = log d; the functional is S(nu) <= log d
        assert rep.max_violation <= 1e-10


class TestMeasure:
    def test_eigenstate_untouched(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        res = measure(rho, SZ)
        assert len(res.outcomes) == 1
        assert res.outcomes.locations[0] == pytest.approx(1.0)
        assert np.allclose(res.post_states[0], rho)

    def test_mixed_state_sz(self):
        res = measure(maximally_mixed(2), SZ)
        assert np.allclose(np.sort(res.outcomes.locations), [-1.0, 1.0])
        assert np.allclose(res.outcomes.weights, [0.5, 0.5])
        for loc, post in zip(res.outcomes.locations, res.post_states):
            expected = np.diag([1.0, 0.0]) if loc > 0 else np.diag([0.0, 1.0])
            assert np.allclose(post, expected)

    def test_scalar_observable(self, rng):
        rho = random_density(3, rng)
        res = measure(rho, 2.5 * np.eye(3, dtype=complex))
        assert len(res.outcomes) == 1
        assert res.outcomes.locations[0] == pytest.approx(2.5)
        assert res.outcomes.weights[0] == pytest.approx(1.0)

    def test_expectation_matches_trace(self, rng):
        rho = random_density(4, rng)
        a = random_hermitian(4, rng)
        res = measure(rho, a)
        assert abs(res.expectation - np.trace(rho @ a).real) <= 1e-12
        assert abs(res.outcomes.mass - 1.0) <= 1e-12


class TestSpectralMeasure:
    def test_agrees_with_measurement_law(self, rng):
        rho = random_density(4, rng)
        a = random_hermitian(4, rng)
        mu = spectral_measure(a, rho)
        law = measure(rho, a).outcomes
        assert np.allclose(mu.locations, law.locations)
        assert np.allclose(mu.weights, law.weights)

    def test_uniform_for_maximally_mixed(self):
        mu = spectral_measure(SZ, maximally_mixed(2))
        assert np.allclose(mu.locations, [-1.0, 1.0])
        assert np.allclose(mu.weights, [0.5, 0.5])

    def test_single_eigenvalue(self):
        mu = spectral_measure(np.eye(3, dtype=complex), maximally_mixed(3))
        assert len(mu) == 1 and mu.weights[0] == pytest.approx(1.0)

    def test_polynomial_integration(self, rng):
        rho = random_density(5, rng)
        a = random_hermitian(5, rng)
        mu = spectral_measure(a, rho)
        lhs = mu.integrate(lambda x: x**3 - 2 * x).real
        rhs = np.trace(rho @ (a @ a @ a - 2 * a)).real
        assert abs(lhs - rhs) <= 1e-10


class TestKmsDefect:
    def test_vanishes_at_thermal(self, rng):
        h = random_hermitian(3, rng)
        rho = gibbs(h, 1.7)
        pairs = [(random_hermitian(3, rng), random_hermitian(3, rng)) for _ in range(100)]
        assert kms_defect(rho, h, 1.7, pairs) <= 1e-10

    def test_detects_wrong_temperature(self, rng):
        h = np.diag([0.0, 1.0, 2.3]).astype(complex)  # nondegenerate
        rho = gibbs(h, 0.5)
        pairs = [(random_hermitian(3, rng), random_hermitian(3, rng)) for _ in range(20)]
        assert kms_defect(rho, h, 1.5, pairs) > 1e-6

    def test_identity_pair_contributes_zero(self, rng):
        h = random_hermitian(3, rng)
        eye = np.eye(3, dtype=complex)
        assert kms_defect(random_density(3, rng), h, 1.0, [(eye, eye)]) <= 1e-12


class TestAtomicMeasure:
    def test_merging_preserves_mean(self):
        mu = AtomicMeasure.from_points(
            np.array([0.0, 1e-10, 1.0]), np.array([0.3, 0.3, 0.4]), merge_tol=1e-8
        )
        assert len(mu) == 2
        assert abs(mu.mass - 1.0) <= 1e-15
        assert abs(mu.mean - (0.3 * 1e-10 + 0.4)) <= 1e-15

    def test_drops_negligible_weights(self):
        mu = AtomicMeasure.from_points(np.array([0.0, 5.0]), np.array([1.0, 1e-16]))
        assert len(mu) == 1

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError, match="negative"):
            AtomicMeasure.from_points(np.array([0.0]), np.array([-0.5]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 20))
    def test_merge_separation_invariant(self, seed, n):
        g = np.random.default_rng(seed)
        mu = AtomicMeasure.from_points(g.normal(size=n), g.uniform(0.1, 1.0, size=n),
                                       merge_tol=0.3)
        if len(mu) > 1:
            assert np.min(np.diff(mu.locations)) > 0.3 * 0.999
        assert abs(mu.mass - sum(mu.weights)) <= 1e-12

    def test_char_at_zero_is_mass(self, rng):
        mu = AtomicMeasure.from_points(rng.normal(size=5), rng.uniform(0.1, 1, size=5))
        assert mu.char(0.0) == pytest.approx(mu.mass)
