import numpy as np
import pytest

from fcslab.linalg import (
    RankDeficientError,
    dagger,
    hs_inner,
    hs_norm,
    positive_sqrt,
    tensor,
)
from fcslab.modular import (
    cone_membership,
    equilibrium_vector,
    evolved_reservoir_weight,
    interaction_cocycle,
    liouvilleans,
    mixing_diagnostic,
    modular_pair,
    perturbed_gibbs_vector,
    relative_modular,
    reservoir_weight_vector,
    standard_gns,
)
from fcslab.scenarios import chain_scenario
from fcslab.states import gibbs, maximally_mixed, pure_state, random_density


def rand_mat(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


class TestStandardGns:
    def test_identity_normalization(self, rng):
        rho = random_density(4, rng)
        rep, omega = standard_gns(rho)
        assert abs(hs_inner(omega, omega) - 1.0) <= 1e-12

    def test_pure_state_vector_is_projector(self, rng):
        p = pure_state(rng.normal(size=3))
        _, omega = standard_gns(p)
        assert np.allclose(omega, p, atol=1e-12)

    def test_trace_agreement(self, rng):
        rho = random_density(4, rng)
        rep, omega = standard_gns(rho)
        for _ in range(20):
            a = rand_mat(rng, 4)
            assert abs(hs_inner(omega, rep(a)(omega)) - np.trace(rho @ a)) <= 1e-12

    def test_representation_homomorphism(self, rng):
        rep, omega = standard_gns(random_density(3, rng))
        a, b = rand_mat(rng, 3), rand_mat(rng, 3)
        x = rand_mat(rng, 3)
        assert np.allclose(rep(a @ b)(x), rep(a)(rep(b)(x)))


class TestModularStructure:
    def test_tracial_reference_is_trivial(self, rng):
        ms = modular_pair(maximally_mixed(3))
        x = rand_mat(rng, 3)
        assert np.allclose(ms.delta(x), x, atol=1e-12)
        assert np.allclose(ms.conjugation(x), dagger(x))

    def test_vacuum_invariance(self, rng):
        ms = modular_pair(random_density(4, rng))
        assert hs_norm(ms.delta(ms.omega) - ms.omega) <= 1e-12

    def test_star_action_on_algebra_vectors(self, rng):
        ms = modular_pair(random_density(3, rng))
        for _ in range(50):
            a = rand_mat(rng, 3)
            assert hs_norm(ms.star(a @ ms.omega) - dagger(a) @ ms.omega) <= 1e-10

    def test_conjugation_antiunitary_involution(self, rng):
        ms = modular_pair(random_density(4, rng))
        x, y = rand_mat(rng, 4), rand_mat(rng, 4)
        assert abs(hs_inner(ms.conjugation(x), ms.conjugation(y)) - hs_inner(y, x)) <= 1e-10
        assert hs_norm(ms.conjugation(ms.conjugation(x)) - x) <= 1e-12

    def test_polar_identities(self, rng):
        ms = modular_pair(random_density(4, rng))
        x = rand_mat(rng, 4)
        # Delta = F S
        assert hs_norm(ms.commutant_star(ms.star(x)) - ms.delta(x)) <= 1e-10 * hs_norm(x)
        # Delta^(-1/2) = J Delta^(1/2) J
        lhs = ms.conjugation(ms.delta_power(0.5, ms.conjugation(x)))
        assert hs_norm(lhs - ms.delta_power(-0.5, x)) <= 1e-10 * hs_norm(x)
        # commutant star operator acts by the sandwiched adjoint
        r = ms.rho_ref
        sandwich = positive_sqrt(r) @ dagger(x) @ np.linalg.inv(positive_sqrt(r))
        assert hs_norm(ms.commutant_star(x) - sandwich) <= 1e-9 * hs_norm(x)

    def test_rejects_rank_deficient_reference(self):
        with pytest.raises(RankDeficientError, match="eigenvalue"):
            modular_pair(np.diag([1.0, 0.0]).astype(complex))

    def test_kms_boundary_condition(self, rng):
        ms = modular_pair(random_density(3, rng))
        omega = ms.omega
        for _ in range(20):
            a, b = rand_mat(rng, 3), rand_mat(rng, 3)
            lhs = hs_inner(omega, a @ ms.delta(b @ omega))
            rhs = hs_inner(omega, b @ a @ omega)
            assert abs(lhs - rhs) <= 1e-10

    def test_tomita_takesaki_commutation(self, rng):
        ms = modular_pair(random_density(3, rng))
        a, b, x = rand_mat(rng, 3), rand_mat(rng, 3), rand_mat(rng, 3)
        jaj = lambda y: ms.conjugation(a @ ms.conjugation(y))
        assert hs_norm(jaj(b @ x) - b @ jaj(x)) <= 1e-10 * hs_norm(x)
        # modular flow maps left multipliers to left multipliers
        t = 0.9
        flowed = ms.delta_power(1j * t, a @ ms.delta_power(-1j * t, x))
        mult = ms.ref_power(1j * t) @ a @ ms.ref_power(-1j * t)
        assert hs_norm(flowed - mult @ x) <= 1e-9 * hs_norm(x)


class TestRelativeModular:
    def test_reduces_to_modular(self, rng):
        rho = random_density(3, rng)
        rel = relative_modular(rho, rho)
        ms = modular_pair(rho)
        x = rand_mat(rng, 3)
        assert hs_norm(rel.apply(x) - ms.delta(x)) <= 1e-10 * hs_norm(x)

    def test_total_mass_of_weight(self, rng):
        eta = 2.7 * random_density(4, rng)  # non-normalized weight
        omega_state = random_density(4, rng)
        rel = relative_modular(eta, omega_state)
        omega = positive_sqrt(omega_state)
        val = hs_inner(omega, rel.apply(np.eye(4) @ omega))
        assert abs(val - 2.7) <= 1e-10

    def test_radon_nikodym(self, rng):
        eta = random_density(4, rng)
        omega_state = random_density(4, rng)
        rel = relative_modular(eta, omega_state)
        omega = positive_sqrt(omega_state)
        for _ in range(100):
            a = rand_mat(rng, 4)
            lhs = hs_inner(omega, rel.apply(a @ omega))
            assert abs(lhs - np.trace(eta @ a)) <= 1e-10

    def test_positive_self_adjoint_on_hs_space(self, rng):
        rel = relative_modular(random_density(3, rng), random_density(3, rng))
        x, y = rand_mat(rng, 3), rand_mat(rng, 3)
        assert abs(hs_inner(x, rel.apply(y)) - hs_inner(rel.apply(x), y)) <= 1e-10
        assert hs_inner(x, rel.apply(x)).real >= -1e-12

    def test_power_interpolates(self, rng):
        rel = relative_modular(random_density(3, rng), random_density(3, rng))
        x = rand_mat(rng, 3)
        assert np.allclose(rel.power(1.0, x), rel.apply(x))
        assert np.allclose(rel.power(0.0, x), x)

    def test_rejects_singular_denominator(self, rng):
        with pytest.raises(RankDeficientError):
            relative_modular(random_density(2, rng), np.diag([1.0, 0.0]).astype(complex))


class TestNaturalCone:
    def test_reference_vector_in_cone(self, rng):
        ms = modular_pair(random_density(3, rng))
        assert cone_membership(ms.omega)

    def test_negated_positive_outside(self, rng):
        assert not cone_membership(-random_density(3, rng))

    def test_generated_vectors_inside(self, rng):
        ms = modular_pair(random_density(4, rng))
        for _ in range(100):
            a = rand_mat(rng, 4)
            vec = a @ ms.omega @ dagger(a)  # A (J A J) reference
            assert cone_membership(vec, 1e-10)

    def test_cone_is_exactly_psd(self, rng):
        # every PSD matrix arises as A (J A J) applied to the reference
        ms = modular_pair(random_density(3, rng))
        p = random_density(3, rng)
        a = positive_sqrt(p) @ np.linalg.inv(positive_sqrt(ms.omega))
        assert np.allclose(a @ ms.omega @ dagger(a), p, atol=1e-10)


class TestScenarioVectors:
    def test_uncoupled_perturbed_vector_is_equilibrium(self, qubit_qubit):
        scn = qubit_qubit.with_lam(0.0)
        assert hs_norm(perturbed_gibbs_vector(scn) - equilibrium_vector(scn)) <= 1e-12

    def test_perturbed_vector_matches_coupled_gibbs(self, qubit_qubit):
        scn = qubit_qubit.with_lam(0.5)
        target = positive_sqrt(gibbs(scn.h_coupled, scn.beta))
        assert hs_norm(perturbed_gibbs_vector(scn) - target) <= 1e-10

    def test_perturbed_vector_normalized_and_in_cone(self, scenario_factory):
        scn = scenario_factory(21, d_sys=3, d_res=3)
        vec = perturbed_gibbs_vector(scn)
        assert abs(hs_norm(vec) - 1.0) <= 1e-12
        assert cone_membership(vec, 1e-10)

    def test_weight_vector_norm(self, qubit_qubit):
        assert abs(hs_norm(reservoir_weight_vector(qubit_qubit)) ** 2 - 2.0) <= 1e-12

    def test_liouvilleans_kill_their_vectors(self, scenario_factory):
        scn = scenario_factory(5, d_sys=2, d_res=4)
        lv = liouvilleans(scn)
        assert hs_norm(lv.free(equilibrium_vector(scn))) <= 1e-10
        assert hs_norm(lv.coupled(perturbed_gibbs_vector(scn))) <= 1e-10

    def test_liouvilleans_hermitian_on_hs_space(self, scenario_factory, rng):
        scn = scenario_factory(6, d_sys=2, d_res=3)
        lv = liouvilleans(scn)
        d = scn.dim
        for op in (lv.free, lv.coupled, lv.half):
            x, y = rand_mat(rng, d), rand_mat(rng, d)
            assert abs(hs_inner(x, op(y)) - hs_inner(op(x), y)) <= 1e-10

    def test_coupled_liouvillean_decomposition(self, scenario_factory, rng):
        scn = scenario_factory(8, d_sys=2, d_res=4)
        lv = liouvilleans(scn)
        x = rand_mat(rng, scn.dim)
        assert hs_norm(lv.coupled(x) - lv.coupled_decomposed(x)) <= 1e-12 * hs_norm(x)

    def test_flow_preserves_cone(self, scenario_factory, rng):
        scn = scenario_factory(9, d_sys=2, d_res=3)
        lv = liouvilleans(scn)
        omega = equilibrium_vector(scn)
        for _ in range(20):
            a = rand_mat(rng, scn.dim)
            vec = a @ omega @ dagger(a)
            assert cone_membership(lv.exp_coupled(1.7, vec), 1e-10)


class TestCocycle:
    def test_zero_time_identity(self, qubit_qubit):
        assert np.allclose(interaction_cocycle(qubit_qubit, 0.0), np.eye(4), atol=1e-12)

    def test_uncoupled_identity(self, qubit_qubit):
        scn = qubit_qubit.with_lam(0.0)
        assert np.allclose(interaction_cocycle(scn, 2.3), np.eye(4), atol=1e-12)

    def test_conjugation_identity(self, scenario_factory, rng):
        # cocycle-conjugated weight modular operator equals the flowed one
        scn = scenario_factory(31, d_sys=2, d_res=4)
        t = 1.3
        gam = interaction_cocycle(scn, t)
        static = tensor(np.eye(scn.dim_sys), scn.rho_res)
        rel_t = relative_modular(evolved_reservoir_weight(scn, t), static)
        conj_weight = gam @ static @ dagger(gam)
        for _ in range(10):
            x = rand_mat(rng, scn.dim)
            lhs = rel_t.apply(x)
            rhs = conj_weight @ x @ np.linalg.inv(static)
            assert hs_norm(lhs - rhs) <= 1e-10 * hs_norm(x)

    def test_left_multiplier_membership(self, scenario_factory, rng):
        # acting on HS vectors commutes with every right multiplication
        scn = scenario_factory(32, d_sys=2, d_res=3)
        gam = interaction_cocycle(scn, 0.9)
        b, x = rand_mat(rng, scn.dim), rand_mat(rng, scn.dim)
        assert hs_norm(gam @ (x @ b) - (gam @ x) @ b) <= 1e-12 * hs_norm(x) * hs_norm(b)


class TestMixingDiagnostic:
    def test_degenerate_window(self, qubit_qubit):
        # at t = 0 the evolution is the identity map, so the report must
        # equal the distance of the identity from the rank-one projector
        rep = mixing_diagnostic(qubit_qubit, (0.0, 0.0), 2, n_vectors=4, seed=3)
        rng = np.random.default_rng(3)
        d = qubit_qubit.dim
        vecs = []
        for _ in range(4):
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            vecs.append(g / hs_norm(g))
        omega_lam = perturbed_gibbs_vector(qubit_qubit)
        expected = max(
            abs(hs_inner(xi, xj) - hs_inner(xi, omega_lam) * hs_inner(omega_lam, xj))
            for xi in vecs
            for xj in vecs
        )
        assert rep.grid == 1
        assert rep.distance == pytest.approx(expected, abs=1e-12)

    def test_tiny_reservoir_flagged(self):
        scn = chain_scenario(1, lam=0.2)
        rep = mixing_diagnostic(scn, (0.0, 40.0), 21)
        assert not rep.mixing_like

    def test_trivial_reservoir_flagged(self):
        # dimension-one reservoir: the system is isolated and quasi-periodic
        from fcslab.dynamics import Scenario

        h_sys = np.diag([0.0, 1.0]).astype(complex)
        scn = Scenario(h_sys, np.zeros((1, 1)), 0.3 * np.array([[0, 1], [1, 0]],
                       dtype=complex), 0.5, 1.0, np.diag([0.2, 0.8]).astype(complex))
        rep = mixing_diagnostic(scn, (0.0, 40.0), 21)
        assert rep.dim_res == 1 and not rep.mixing_like

    def test_distance_shrinks_with_reservoir(self):
        small = mixing_diagnostic(chain_scenario(3), (0.0, 40.0), 21)
        large = mixing_diagnostic(chain_scenario(6), (0.0, 40.0), 21)
        assert large.distance < small.distance
