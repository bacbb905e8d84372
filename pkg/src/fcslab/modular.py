"""The standard (Hilbert-Schmidt) representation and its modular toolbox.

Observables act by left multiplication on matrices carrying the trace inner
product <X, Y> = tr(X* Y); a state rho is represented by the vector
rho^(1/2).  In this representation the modular conjugation of any full-rank
positive reference is the plain adjoint X -> X*, the modular operator acts by
two-sided conjugation X -> rho X rho^(-1), and the natural positive cone is
exactly the set of positive semidefinite matrices.  Relative modular
operators X -> rho_eta X rho_omega^(-1) carry the non-commutative
Radon-Nikodym structure; Liouvilleans implement the dynamics as Hermitian
operators on this space.  Everything is realized as superoperator actions on
d x d matrices: nothing is materialized at size d^2 x d^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .dynamics import Scenario, exact_cocycle
from .linalg import (
    RankDeficientError,
    assert_hermitian,
    assert_square,
    dagger,
    herm_power,
    hs_inner,
    hs_norm,
    op_norm,
    positive_sqrt,
    tensor,
)

RANK_TOL = 1e-12


def left_mult(a: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Left multiplication X -> a X: the representation of an observable."""

    def act(x: np.ndarray) -> np.ndarray:
        return a @ x

    return act


def standard_gns(rho: np.ndarray) -> tuple[Callable, np.ndarray]:
    """Standard representation of a state: (left multiplication, rho^(1/2)).

    The vector Omega = rho^(1/2) satisfies <Omega, pi(A) Omega> = tr(rho A);
    pi is an exact homomorphism.  rho may be rank deficient (the vector is
    then not separating, but the identity above still holds).
    """
    omega = positive_sqrt(rho)
    return left_mult, omega


@dataclass(frozen=True, eq=False)
class ModularStructure:
    """Modular data of a full-rank positive reference in the standard rep.

    Actions: conjugation J X = X*, modular operator Delta X = r X r^(-1),
    fractional powers Delta^a X = r^a X r^(-a), the star operator
    S = J Delta^(1/2) (sending A Omega to A* Omega), and the commutant star
    operator F = J Delta^(-1/2), which acts as X -> r^(1/2) X* r^(-1/2).
    """

    rho_ref: np.ndarray

    @cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.rho_ref)

    @cached_property
    def omega(self) -> np.ndarray:
        """Reference vector rho_ref^(1/2)."""
        return positive_sqrt(self.rho_ref)

    def ref_power(self, alpha: complex) -> np.ndarray:
        """Principal power rho_ref^alpha as a matrix."""
        w, v = self._eig
        return (v * (w.astype(complex) ** alpha)) @ dagger(v)

    def conjugation(self, x: np.ndarray) -> np.ndarray:
        """Modular conjugation J: the adjoint map (antiunitary, J^2 = 1)."""
        return dagger(x)

    def delta(self, x: np.ndarray) -> np.ndarray:
        return self.rho_ref @ x @ np.linalg.inv(self.rho_ref)

    def delta_power(self, alpha: complex, x: np.ndarray) -> np.ndarray:
        """Delta^alpha X = r^alpha X r^(-alpha) through the eigenbasis."""
        return self.ref_power(alpha) @ x @ self.ref_power(-alpha)

    def delta_log(self, x: np.ndarray) -> np.ndarray:
        """log(Delta) X = (log r) X - X (log r)."""
        w, v = self._eig
        logr = (v * np.log(w)) @ dagger(v)
        return logr @ x - x @ logr

    def star(self, x: np.ndarray) -> np.ndarray:
        """S = J Delta^(1/2): maps A Omega to A* Omega."""
        return self.conjugation(self.delta_power(0.5, x))

    def commutant_star(self, x: np.ndarray) -> np.ndarray:
        """F = J Delta^(-1/2): acts as X -> r^(1/2) X* r^(-1/2)."""
        return self.conjugation(self.delta_power(-0.5, x))


def modular_pair(rho_ref: np.ndarray, rank_tol: float = RANK_TOL) -> ModularStructure:
    """Modular structure of a full-rank positive reference.

    A rank-deficient reference has no separating vector and is rejected (no
    silent regularization: an epsilon floor would corrupt FCS atoms).
    """
    assert_square(rho_ref)
    assert_hermitian(rho_ref, name="reference")
    w = np.linalg.eigvalsh(rho_ref)
    if w[0] <= rank_tol:
        raise RankDeficientError(
            f"reference is not full rank: min eigenvalue {w[0]:.3e} <= {rank_tol:.1e}"
        )
    return ModularStructure(rho_ref=rho_ref)


@dataclass(frozen=True, eq=False)
class RelativeModular:
    """Relative modular operator of a pair (eta, omega) of positive weights.

    Acts on the standard representation space as X -> rho_eta X rho_omega^(-1)
    with fractional powers X -> rho_eta^a X rho_omega^(-a); positive and
    self-adjoint in the trace inner product.  ``rho_eta`` may be a
    non-normalized weight and may be rank deficient (powers then require
    Re a > 0); ``rho_omega`` must be full rank.  For eta = omega this reduces
    to the plain modular operator.
    """

    rho_eta: np.ndarray
    rho_omega: np.ndarray
    rank_tol: float = RANK_TOL

    @cached_property
    def _eig_eta(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.rho_eta)

    @cached_property
    def _eig_omega(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.rho_omega)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.rho_eta @ x @ np.linalg.inv(self.rho_omega)

    def power(self, alpha: complex, x: np.ndarray) -> np.ndarray:
        if alpha == 0:
            return x.copy()
        left = herm_power(self.rho_eta, alpha, rank_tol=self.rank_tol)
        right = herm_power(self.rho_omega, -alpha, rank_tol=0.0)
        return left @ x @ right

    def log_apply(self, x: np.ndarray) -> np.ndarray:
        """log(Delta_rel) X = (log rho_eta) X - X (log rho_omega)."""
        we, ve = self._eig_eta
        wo, vo = self._eig_omega
        if we[0] <= self.rank_tol:
            raise RankDeficientError(
                f"log of relative modular operator with singular weight "
                f"(min eigenvalue {we[0]:.3e})"
            )
        log_eta = (ve * np.log(we)) @ dagger(ve)
        log_omega = (vo * np.log(wo)) @ dagger(vo)
        return log_eta @ x - x @ log_omega


def relative_modular(
    rho_eta: np.ndarray, rho_omega: np.ndarray, rank_tol: float = RANK_TOL
) -> RelativeModular:
    """Relative modular operator for a weight eta against a full-rank omega.

    Satisfies the Radon-Nikodym property
    <Omega_omega, Delta_rel pi(A) Omega_omega> = tr(rho_eta A).
    """
    assert_square(rho_eta)
    assert_square(rho_omega)
    assert_hermitian(rho_eta, name="rho_eta")
    assert_hermitian(rho_omega, name="rho_omega")
    if rho_eta.shape != rho_omega.shape:
        raise ValueError("weight dimensions differ")
    we = np.linalg.eigvalsh(rho_eta)
    if we[0] < -RANK_TOL:
        raise ValueError(f"rho_eta is not positive: eigenvalue {we[0]:.3e}")
    wo = np.linalg.eigvalsh(rho_omega)
    if wo[0] <= rank_tol:
        raise RankDeficientError(
            f"rho_omega is not full rank: min eigenvalue {wo[0]:.3e} <= {rank_tol:.1e}"
        )
    return RelativeModular(rho_eta=rho_eta, rho_omega=rho_omega, rank_tol=rank_tol)


def cone_membership(x: np.ndarray, tol: float = 1e-10) -> bool:
    """Test membership in the natural positive cone of the standard rep.

    The cone {A J A J Omega} closes to exactly the positive semidefinite
    matrices, so membership is Hermiticity plus positivity within ``tol``
    (relative to max(1, ||x||)).
    """
    assert_square(x)
    scale = max(1.0, op_norm(x))
    herm_defect = op_norm(x - dagger(x))
    if herm_defect > tol * scale:
        return False
    w = np.linalg.eigvalsh((x + dagger(x)) / 2)
    return bool(w[0] >= -tol * scale)


# -- scenario-level vectors and Liouvilleans ---------------------------------


def initial_vector(scn: Scenario) -> np.ndarray:
    """Vector representative of the initial state: rho_sys^(1/2) (x) rho_res^(1/2)."""
    return tensor(positive_sqrt(scn.rho_sys), positive_sqrt(scn.rho_res))


def equilibrium_vector(scn: Scenario) -> np.ndarray:
    """Vector representative of the uncoupled equilibrium state."""
    return tensor(positive_sqrt(scn.rho_sys_thermal), positive_sqrt(scn.rho_res))


def reservoir_weight_vector(scn: Scenario) -> np.ndarray:
    """Vector 1 (x) rho_res^(1/2) of the reservoir weight.

    Deliberately *not* normalized: its squared norm is d_S, which the
    half-line identity and the strip bound rely on.
    """
    return tensor(np.eye(scn.dim_sys), positive_sqrt(scn.rho_res))


def evolved_reservoir_weight(scn: Scenario, t: float) -> np.ndarray:
    """Weight operator of the reservoir state pulled back through the flow:
    e^{itH} (1 (x) rho_res) e^{-itH} with the coupled H."""
    u = scn.unitary_coupled(t)
    return u @ tensor(np.eye(scn.dim_sys), scn.rho_res) @ dagger(u)


@dataclass(frozen=True, eq=False)
class Liouvilleans:
    """The three generators of the standard dynamics on HS vectors.

    free:     X -> H_free X - X H_free        (annihilates the equilibrium vector)
    coupled:  X -> H_coupled X - X H_coupled  (annihilates the coupled one)
    half:     X -> H_coupled X - X (1 (x) H_R), the generator appearing in
              the half-line identity.
    All are Hermitian as operators in the trace inner product.
    """

    scn: Scenario

    def free(self, x: np.ndarray) -> np.ndarray:
        return self.scn.h_free @ x - x @ self.scn.h_free

    def coupled(self, x: np.ndarray) -> np.ndarray:
        return self.scn.h_coupled @ x - x @ self.scn.h_coupled

    def half(self, x: np.ndarray) -> np.ndarray:
        return self.scn.h_coupled @ x - x @ self.scn.h_res_full

    def exp_free(self, t: float, x: np.ndarray) -> np.ndarray:
        u = self.scn.unitary_free(t)
        return u @ x @ dagger(u)

    def exp_coupled(self, t: float, x: np.ndarray) -> np.ndarray:
        u = self.scn.unitary_coupled(t)
        return u @ x @ dagger(u)

    @cached_property
    def _eig_res_full(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.scn.h_res_full)

    def exp_half(self, s: float, x: np.ndarray) -> np.ndarray:
        """e^{is half} X = e^{isH_coupled} X e^{-is (1 (x) H_R)}."""
        w, v = self._eig_res_full
        right = (v * np.exp(-1j * s * w)) @ dagger(v)
        return self.scn.unitary_coupled(s) @ x @ right

    def coupled_decomposed(self, x: np.ndarray) -> np.ndarray:
        """free + lam pi(V) - lam J pi(V) J, for the identity check."""
        return self.free(x) + self.scn.lam * (self.scn.v @ x) - self.scn.lam * (x @ self.scn.v)


def liouvilleans(scn: Scenario) -> Liouvilleans:
    return Liouvilleans(scn=scn)


def perturbed_gibbs_vector(scn: Scenario) -> np.ndarray:
    """Normalized vector e^{-beta(L_free + lam pi(V))/2} Omega_eq.

    This is the cone representative of the coupled equilibrium state; it
    coincides with gibbs(H_coupled, beta)^(1/2).  The two exponentials are
    spectrum-shifted before assembly (the shifts cancel against the final
    normalization), so large beta * ||H|| is safe.
    """
    wl, vl = scn._eig_coupled
    w0, v0 = scn._eig_free
    # e^{-beta(L0 + lam pi(V))/2} X = e^{-beta Hc/2} X e^{+beta H0/2}
    left = (vl * np.exp(-scn.beta / 2 * (wl - wl.min()))) @ dagger(vl)
    right = (v0 * np.exp(scn.beta / 2 * (w0 - w0.max()))) @ dagger(v0)
    vec = left @ equilibrium_vector(scn) @ right
    return vec / hs_norm(vec)


def interaction_cocycle(scn: Scenario, t: float) -> np.ndarray:
    """The unitary intertwining the free and coupled dynamics on HS vectors.

    e^{it(L_free + lam pi(V))} e^{-it L_free} acts by left multiplication
    with e^{itH_coupled} e^{-itH_free}; that matrix is returned.  It
    conjugates the reservoir-weight modular operator into its pulled-back
    counterpart.
    """
    return exact_cocycle(scn, t)


@dataclass(frozen=True)
class MixingReport:
    """Ergodic-average distance of the coupled evolution from its rank-one limit."""

    distance: float
    window: tuple[float, float]
    grid: int
    n_vectors: int
    dim_res: int

    @property
    def mixing_like(self) -> bool:
        return self.distance < 0.1


def mixing_diagnostic(
    scn: Scenario,
    window: tuple[float, float],
    grid: int,
    n_vectors: int = 6,
    seed: int = 7,
) -> MixingReport:
    """Quantify how close the finite model is to a mixing system.

    Averages the matrix elements <X_i, e^{itL} X_j> of the coupled evolution
    over a time window against a fixed normalized test-vector set and reports
    the max deviation from the rank-one projector onto the coupled
    equilibrium vector.  Exact mixing would drive the distance to zero; at
    finite reservoir size it saturates, and it should shrink as the reservoir
    grows within a model family.
    """
    if grid < 2 and window[0] != window[1]:
        raise ValueError("grid must be >= 2 for a nondegenerate window")
    rng = np.random.default_rng(seed)
    d = scn.dim
    vecs = []
    for _ in range(n_vectors):
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        vecs.append(g / hs_norm(g))
    lv = liouvilleans(scn)
    omega_lam = perturbed_gibbs_vector(scn)
    times = (
        np.array([window[0]])
        if window[0] == window[1]
        else np.linspace(window[0], window[1], grid)
    )
    avg = np.zeros((n_vectors, n_vectors), dtype=complex)
    for t in times:
        evolved = [lv.exp_coupled(t, x) for x in vecs]
        for j, ex in enumerate(evolved):
            for i, xi in enumerate(vecs):
                avg[i, j] += hs_inner(xi, ex)
    avg /= len(times)
    target = np.array(
        [
            [hs_inner(xi, omega_lam) * hs_inner(omega_lam, xj) for xj in vecs]
            for xi in vecs
        ]
    )
    return MixingReport(
        distance=float(np.max(np.abs(avg - target))),
        window=window,
        grid=len(times),
        n_vectors=n_vectors,
        dim_res=scn.dim_res,
    )
