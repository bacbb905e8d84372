"""Named residual checks over a scenario, grouped into suites.

Each check evaluates one operator-algebraic identity numerically and records
the residual against its tolerance.  The suites drive the ``verify`` command
and the acceptance tests; every check is a two-route computation (the
identity's two sides are built independently).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Callable

import numpy as np

from . import fcs as fcsmod
from .dynamics import Scenario, balance_check, delta_q_direct, delta_q_flux, dyson_cocycle, dyson_error_bound, exact_cocycle
from .linalg import (
    dagger,
    eig_hermitian,
    func_calc,
    hs_inner,
    hs_norm,
    op_norm,
    positive_sqrt,
    tensor,
)
from .modular import (
    cone_membership,
    equilibrium_vector,
    evolved_reservoir_weight,
    interaction_cocycle,
    liouvilleans,
    modular_pair,
    perturbed_gibbs_vector,
    relative_modular,
    standard_gns,
)
from .states import entropy, gibbs, gibbs_variational_check, kms_defect, measure, random_density, random_hermitian

SUITES = ("operator", "states", "modular", "fcs")


@dataclass(frozen=True)
class CheckResult:
    check_name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def as_record(self) -> dict:
        rec = asdict(self)
        rec["pass"] = self.passed
        return rec


def _result(name: str, residual: float, tol: float) -> CheckResult:
    return CheckResult(check_name=name, residual=float(residual), tolerance=float(tol))


# -- operator suite -----------------------------------------------------------


def suite_operator(scn: Scenario, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []

    worst = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 9))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        n2 = op_norm(g) ** 2
        worst = max(worst, abs(op_norm(dagger(g) @ g) - n2) / max(n2, 1e-30))
    out.append(_result("cstar_identity", worst, 1e-10))

    worst = 0.0
    for _ in range(20):
        a = random_hermitian(int(rng.integers(2, 7)), rng)
        dec = eig_hermitian(a)
        worst = max(worst, op_norm(dec.reconstruct() - a) / max(op_norm(a), 1e-30))
    out.append(_result("spectral_reconstruction", worst, 1e-12))

    worst = 0.0
    for _ in range(20):
        a = random_hermitian(4, rng)
        poly = lambda x: 2.0 * x**3 - x + 0.25
        mapped = np.sort(np.linalg.eigvalsh(func_calc(a, poly)))
        direct = np.sort([poly(x) for x in np.linalg.eigvalsh(a)])
        worst = max(worst, float(np.max(np.abs(mapped - direct))))
    out.append(_result("spectral_mapping", worst, 1e-9))

    worst = 0.0
    for _ in range(20):
        a = random_hermitian(5, rng)
        f = lambda x: x**2 + 1.0
        g2 = lambda x: np.exp(0.3 * x)
        prod = func_calc(a, lambda x: f(x) * g2(x))
        split = func_calc(a, f) @ func_calc(a, g2)
        worst = max(worst, op_norm(prod - split))
    out.append(_result("calculus_homomorphism", worst, 1e-10))

    return out


# -- states suite -------------------------------------------------------------


def suite_states(scn: Scenario, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    d = scn.dim_sys

    worst = 0.0
    for _ in range(25):
        s = entropy(random_density(d, rng))
        worst = max(worst, max(-s, s - np.log(d)))
    out.append(_result("entropy_bounds", worst, 1e-12))

    rep = gibbs_variational_check(scn.h_sys, scn.beta, trials=50, rng_seed=seed)
    out.append(_result("gibbs_variational_inequality", max(rep.max_violation, 0.0), 1e-10))
    out.append(_result("gibbs_variational_equality", abs(rep.equality_gap), 1e-10))

    rho_b = gibbs(scn.h_sys, scn.beta)
    pairs = [
        (random_hermitian(d, rng) + 0j, random_hermitian(d, rng) + 0j) for _ in range(100)
    ]
    out.append(_result("kms_defect_at_thermal", kms_defect(rho_b, scn.h_sys, scn.beta, pairs), 1e-10))

    res = measure(scn.rho_sys, scn.h_sys)
    out.append(_result("measurement_normalization", abs(res.outcomes.mass - 1.0), 1e-12))
    worst = 0.0
    for post in res.post_states:
        w = np.linalg.eigvalsh(post)
        worst = max(worst, max(-float(w[0]), abs(float(np.trace(post).real) - 1.0)))
    out.append(_result("post_state_validity", worst, 1e-12))

    return out


# -- modular suite ------------------------------------------------------------


def suite_modular(scn: Scenario, seed: int = 0, n_random: int = 50) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    d = scn.dim

    rho_ref = scn.rho_eq
    ms = modular_pair(rho_ref)
    rep, omega = standard_gns(rho_ref)

    def rand_mat() -> np.ndarray:
        return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))

    worst = 0.0
    for _ in range(10):
        a = rand_mat()
        lhs = hs_inner(omega, rep(a)(omega))
        worst = max(worst, abs(lhs - np.trace(rho_ref @ a)))
    out.append(_result("gns_trace_agreement", worst, 1e-12))

    worst = 0.0
    for _ in range(10):
        x, y = rand_mat(), rand_mat()
        worst = max(worst, abs(hs_inner(ms.conjugation(x), ms.conjugation(y)) - hs_inner(y, x)))
        worst = max(worst, hs_norm(ms.conjugation(ms.conjugation(x)) - x))
    out.append(_result("conjugation_antiunitary", worst, 1e-10))

    worst = 0.0
    for _ in range(10):
        x = rand_mat()
        # Delta = F S and Delta^(-1/2) = J Delta^(1/2) J, as maps.
        worst = max(worst, hs_norm(ms.commutant_star(ms.star(x)) - ms.delta(x)) / hs_norm(x))
        lhs = ms.conjugation(ms.delta_power(0.5, ms.conjugation(x)))
        worst = max(worst, hs_norm(lhs - ms.delta_power(-0.5, x)) / hs_norm(x))
    out.append(_result("modular_identities", worst, 1e-10))

    out.append(_result("vacuum_invariance", hs_norm(ms.delta(omega) - omega), 1e-10))

    worst = 0.0
    for _ in range(n_random):
        a = rand_mat()
        worst = max(worst, hs_norm(ms.star(a @ omega) - dagger(a) @ omega) / hs_norm(a))
    out.append(_result("star_operator_action", worst, 1e-10))

    # Conjugated observables commute with the algebra (they act from the right).
    worst = 0.0
    for _ in range(10):
        a, b, x = rand_mat(), rand_mat(), rand_mat()
        jaj = lambda y: ms.conjugation(a @ ms.conjugation(y))
        lhs = jaj(b @ x)
        rhs = b @ jaj(x)
        worst = max(worst, hs_norm(lhs - rhs) / hs_norm(x))
    out.append(_result("conjugated_commutant", worst, 1e-10))

    # Modular flow keeps observables acting from the left.
    worst = 0.0
    for _ in range(10):
        a, x = rand_mat(), rand_mat()
        t = float(rng.uniform(-2, 2))
        flowed = ms.delta_power(1j * t, a @ ms.delta_power(-1j * t, x))
        multiplier = ms.ref_power(1j * t) @ a @ ms.ref_power(-1j * t)
        worst = max(worst, hs_norm(flowed - multiplier @ x) / hs_norm(x))
    out.append(_result("modular_flow_stability", worst, 1e-9))

    # Equilibrium boundary condition from the modular operator.
    worst = 0.0
    for _ in range(20):
        a, b = rand_mat(), rand_mat()
        lhs = hs_inner(omega, a @ ms.delta(b @ omega))
        rhs = hs_inner(omega, b @ (a @ omega))
        worst = max(worst, abs(lhs - rhs))
    out.append(_result("kms_from_modular", worst, 1e-10))

    # Radon-Nikodym property of the relative modular operator.
    rel = relative_modular(scn.rho_init, rho_ref)
    worst = 0.0
    for _ in range(20):
        a = rand_mat()
        lhs = hs_inner(omega, rel.apply(a @ omega))
        worst = max(worst, abs(lhs - np.trace(scn.rho_init @ a)))
    out.append(_result("radon_nikodym", worst, 1e-10))

    # Natural cone: generated vectors are positive semidefinite matrices.
    ok = True
    for _ in range(20):
        a = rand_mat()
        vec = a @ omega @ dagger(a)  # A J A J applied to the reference vector
        ok = ok and cone_membership(vec, 1e-10)
    out.append(_result("cone_generation", 0.0 if ok else 1.0, 0.5))

    lv = liouvilleans(scn)
    worst = 0.0
    for _ in range(10):
        x = rand_mat()
        worst = max(worst, hs_norm(lv.coupled(x) - lv.coupled_decomposed(x)) / hs_norm(x))
    out.append(_result("coupled_liouvillean_formula", worst, 1e-12))

    out.append(_result("free_liouvillean_kills_equilibrium",
                       hs_norm(lv.free(equilibrium_vector(scn))), 1e-10))

    omega_lam = perturbed_gibbs_vector(scn)
    out.append(_result("coupled_liouvillean_kills_vector", hs_norm(lv.coupled(omega_lam)), 1e-10))
    out.append(_result("perturbed_vector_is_coupled_gibbs",
                       hs_norm(omega_lam - positive_sqrt(gibbs(scn.h_coupled, scn.beta))), 1e-10))

    ok = True
    for _ in range(20):
        a = rand_mat()
        vec = a @ omega @ dagger(a)
        t = float(rng.uniform(-3, 3))
        ok = ok and cone_membership(lv.exp_coupled(t, vec), 1e-10)
    out.append(_result("cone_preserved_by_flow", 0.0 if ok else 1.0, 0.5))

    t = 1.3
    gam = interaction_cocycle(scn, t)
    rel_t = relative_modular(evolved_reservoir_weight(scn, t),
                             tensor(np.eye(scn.dim_sys), scn.rho_res))
    worst = 0.0
    for _ in range(10):
        x = rand_mat()
        lhs = rel_t.apply(x)
        rhs = gam @ rel_t.rho_omega @ dagger(gam) @ x @ np.linalg.inv(rel_t.rho_omega)
        worst = max(worst, hs_norm(lhs - rhs) / hs_norm(x))
    out.append(_result("cocycle_conjugation", worst, 1e-10))

    return out


# -- fcs suite ----------------------------------------------------------------


def two_time_reservoir_oracle(scn: Scenario, t: float, merge_tol: float = 1e-8):
    """Reservoir FCS from the bare two-time protocol (independent route).

    Project onto clustered reservoir energy eigenspaces, evolve, project
    again; atoms at (first - second) reservoir energy.
    """
    from .states import AtomicMeasure

    dec = eig_hermitian(scn.h_res)
    i_sys = np.eye(scn.dim_sys)
    u = scn.unitary_coupled(t)
    evolved = [u @ tensor(i_sys, p) @ dagger(u) for p in dec.projectors]
    locs, wts = [], []
    for e1, p1 in zip(dec.eigenvalues, dec.projectors):
        p1f = tensor(i_sys, p1)
        start = p1f @ scn.rho_init @ p1f
        for e2, p2t in zip(dec.eigenvalues, evolved):
            locs.append(e1 - e2)
            wts.append(float(np.trace(start @ p2t).real))
    return AtomicMeasure.from_points(np.array(locs), np.array(wts), merge_tol=merge_tol)


def measure_distance(mu_a, mu_b) -> float:
    """Max location/weight discrepancy between two atom-merged measures."""
    if len(mu_a) != len(mu_b):
        return float("inf")
    if len(mu_a) == 0:
        return 0.0
    return max(
        float(np.max(np.abs(mu_a.locations - mu_b.locations))),
        float(np.max(np.abs(mu_a.weights - mu_b.weights))),
    )


def suite_fcs(scn: Scenario, seed: int = 0, t: float = 1.0, quad_tol: float = 1e-8) -> list[CheckResult]:
    out = []

    mu_modular = fcsmod.reservoir_fcs(scn, t).measure
    mu_oracle = two_time_reservoir_oracle(scn, t)
    out.append(_result("reservoir_fcs_two_route", measure_distance(mu_modular, mu_oracle), 1e-10))

    out.append(_result("probability_mass", abs(mu_modular.mass - 1.0), 1e-10))

    out.append(_result("mean_identity", fcsmod.mean_identity_check(scn, t, quad_tol), quad_tol + 1e-8))

    out.append(_result("exchange_balance", balance_check(scn, t), 1e-10 * scn.energy_scale))

    dq_direct = delta_q_direct(scn, t)
    dq_flux = delta_q_flux(scn, t, quad_tol)
    out.append(_result("flux_vs_direct",
                       max(abs(dq_direct[0] - dq_flux[0]), abs(dq_direct[1] - dq_flux[1])),
                       quad_tol + 1e-10))

    out.append(_result("operator_balance", fcsmod.operator_balance_check(scn, t, quad_tol),
                       quad_tol * scn.beta * scn.energy_scale * max(t, 1.0) + 1e-8))

    worst = 0.0
    variants = set()
    for s in (-1.0, 0.0, 0.7):
        res = fcsmod.half_line_identity_check(scn, t, s)
        worst = max(worst, res.residual)
        if res.passing:
            variants.add(res.passing)
    out.append(_result("half_line_identity", worst, 1e-8))

    grid = np.array([0.0, 0.25, 0.5, 0.75, 1.0]) + 1j * np.array([0.0, -1.0, 2.0, 0.5, 0.0])
    rep = fcsmod.strip_bounds_check(scn, t, grid)
    out.append(_result("strip_growth_bound", max(rep.max_violation, 0.0), 1e-12))

    gammas = fcsmod.default_gamma_grid(scn, 11)
    worst = 0.0
    for g in gammas:
        plus = fcsmod.reservoir_char(scn, t, 1j * g / scn.beta)
        minus = fcsmod.reservoir_char(scn, t, -1j * g / scn.beta)
        worst = max(worst, abs(np.conjugate(plus) - minus))
    out.append(_result("char_conjugate_symmetry", worst, 1e-12))

    atom_moments = fcsmod.reservoir_fcs(scn, t).moments
    deriv_moments = fcsmod.derivative_moments(scn, t)
    out.append(_result("moment_consistency", float(np.max(np.abs(atom_moments - deriv_moments))), 1e-6))

    trivial_cases = (
        ("uncoupled", scn.with_lam(0.0), t),
        ("instant", scn, 0.0),
    )
    for name, variant, tt in trivial_cases:
        for label, mu in (
            (f"system_delta_{name}", fcsmod.system_fcs(variant, tt).measure),
            (f"reservoir_delta_{name}", fcsmod.reservoir_fcs(variant, tt).measure),
        ):
            is_point_mass = len(mu) == 1 and abs(mu.locations[0]) < 1e-12
            out.append(_result(label, abs(mu.mass - 1.0) if is_point_mass else 1.0, 1e-12))

    k = 4
    err = op_norm(dyson_cocycle(scn, min(t, 1.0), k) - exact_cocycle(scn, min(t, 1.0)))
    bound = dyson_error_bound(scn, min(t, 1.0), k) + quad_tol
    out.append(_result("dyson_truncation_bound", max(err - bound, 0.0), 1e-12))

    return out


SUITE_BUILDERS: dict[str, Callable] = {
    "operator": suite_operator,
    "states": suite_states,
    "modular": suite_modular,
    "fcs": suite_fcs,
}


def run_suites(
    scn: Scenario, which: str = "all", seed: int = 0, quad_tol: float = 1e-8
) -> list[CheckResult]:
    """Run the selected suites against a scenario; 'all' runs everything."""
    names = SUITES if which == "all" else (which,)
    out = []
    for name in names:
        if name not in SUITE_BUILDERS:
            raise ValueError(f"unknown suite {name!r}; options: {('all',) + SUITES}")
        if name == "fcs":
            out.extend(suite_fcs(scn, seed=seed, quad_tol=quad_tol))
        else:
            out.extend(SUITE_BUILDERS[name](scn, seed=seed))
    return out
