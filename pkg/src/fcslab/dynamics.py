"""Coupled system+reservoir models: Heisenberg dynamics, energy fluxes,
two-time energy bookkeeping, and truncated Dyson cocycles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad

from .linalg import (
    assert_hermitian,
    assert_square,
    dagger,
    expm_hermitian,
    op_norm,
    tensor,
)
from .states import assert_density, gibbs

DEFAULT_QUAD_TOL = 1e-8


class QuadratureError(RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True, eq=False)
class Scenario:
    """A confined system+reservoir model.

    Fields: the system Hamiltonian ``h_sys`` (dim d_S), reservoir Hamiltonian
    ``h_res`` (dim d_R), Hermitian coupling ``v`` on the product space,
    coupling strength ``lam``, inverse temperature ``beta > 0``, and the
    system's initial state ``rho_sys``.  The reservoir starts in its thermal
    state at ``beta``.  Instances are immutable; derived matrices are cached.
    """

    h_sys: np.ndarray
    h_res: np.ndarray
    v: np.ndarray
    lam: float
    beta: float
    rho_sys: np.ndarray

    def __post_init__(self):
        for name in ("h_sys", "h_res", "v", "rho_sys"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        assert_square(self.h_sys, "h_sys")
        assert_square(self.h_res, "h_res")
        assert_hermitian(self.h_sys, name="h_sys")
        assert_hermitian(self.h_res, name="h_res")
        assert_hermitian(self.v, name="v")
        assert_density(self.rho_sys, name="rho_sys")
        d = self.h_sys.shape[0] * self.h_res.shape[0]
        if self.v.shape != (d, d):
            raise ValueError(
                f"coupling dimension {self.v.shape[0]} != d_S*d_R = {d}"
            )
        if self.rho_sys.shape != self.h_sys.shape:
            raise ValueError("rho_sys dimension does not match h_sys")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive and finite, got {self.beta!r}")
        if not math.isfinite(self.lam):
            raise ValueError("lam must be finite")

    @property
    def dim_sys(self) -> int:
        return self.h_sys.shape[0]

    @property
    def dim_res(self) -> int:
        return self.h_res.shape[0]

    @property
    def dim(self) -> int:
        return self.dim_sys * self.dim_res

    @cached_property
    def h_sys_full(self) -> np.ndarray:
        return tensor(self.h_sys, np.eye(self.dim_res))

    @cached_property
    def h_res_full(self) -> np.ndarray:
        return tensor(np.eye(self.dim_sys), self.h_res)

    @cached_property
    def h_free(self) -> np.ndarray:
        """Uncoupled Hamiltonian H_S (x) 1 + 1 (x) H_R."""
        return self.h_sys_full + self.h_res_full

    @cached_property
    def h_coupled(self) -> np.ndarray:
        """H_free + lam * V."""
        return self.h_free + self.lam * self.v

    @cached_property
    def rho_res(self) -> np.ndarray:
        """Reservoir thermal state at beta."""
        return gibbs(self.h_res, self.beta)

    @cached_property
    def rho_sys_thermal(self) -> np.ndarray:
        """System thermal state at beta (equilibrium target)."""
        return gibbs(self.h_sys, self.beta)

    @cached_property
    def rho_init(self) -> np.ndarray:
        """Initial joint state rho_sys (x) rho_res."""
        return tensor(self.rho_sys, self.rho_res)

    @cached_property
    def rho_eq(self) -> np.ndarray:
        """Uncoupled equilibrium state gibbs(H_S) (x) gibbs(H_R)."""
        return tensor(self.rho_sys_thermal, self.rho_res)

    @cached_property
    def _eig_coupled(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.h_coupled)

    @cached_property
    def _eig_free(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.h_free)

    def unitary_coupled(self, t: float) -> np.ndarray:
        """exp(i t H_coupled)."""
        w, u = self._eig_coupled
        return (u * np.exp(1j * t * w)) @ dagger(u)

    def unitary_free(self, t: float) -> np.ndarray:
        """exp(i t H_free)."""
        w, u = self._eig_free
        return (u * np.exp(1j * t * w)) @ dagger(u)

    def evolve(self, a: np.ndarray, t: float) -> np.ndarray:
        """Coupled Heisenberg evolution e^{itH} a e^{-itH}."""
        u = self.unitary_coupled(t)
        return u @ a @ dagger(u)

    def expect(self, a: np.ndarray) -> float:
        """Expectation of a Hermitian observable in the initial state."""
        return float(np.trace(self.rho_init @ a).real)

    def with_lam(self, lam: float) -> "Scenario":
        return Scenario(self.h_sys, self.h_res, self.v, lam, self.beta, self.rho_sys)

    @property
    def energy_scale(self) -> float:
        return max(1.0, op_norm(self.h_free) + abs(self.lam) * op_norm(self.v))


def heisenberg(a: np.ndarray, h: np.ndarray, t: float) -> np.ndarray:
    """Heisenberg evolution e^{itH} a e^{-itH} of an observable.

    Unitary conjugation: preserves spectrum, Hermiticity and norm, and obeys
    the group law in t.
    """
    if a.shape != h.shape:
        raise ValueError("observable and Hamiltonian dimensions differ")
    u = expm_hermitian(h, 1j * t)
    return u @ a @ dagger(u)


@dataclass(frozen=True)
class FluxObservables:
    """Instantaneous energy currents phi = lam * i [H_component, V]."""

    phi_sys: np.ndarray
    phi_res: np.ndarray


def flux_observables(scn: Scenario) -> FluxObservables:
    """Energy flux observables of a scenario.

    phi_sys + phi_res = lam * i [H_free, V], the total-energy current into
    the coupling term.
    """
    phi_s = scn.lam * 1j * (scn.h_sys_full @ scn.v - scn.v @ scn.h_sys_full)
    phi_r = scn.lam * 1j * (scn.h_res_full @ scn.v - scn.v @ scn.h_res_full)
    return FluxObservables(phi_sys=phi_s, phi_res=phi_r)


def delta_q_direct(scn: Scenario, t: float) -> tuple[float, float]:
    """Two-time energy bookkeeping from expectation values.

    Returns (dq_sys, dq_res): the increase of the system energy and the
    decrease of the reservoir energy between times 0 and t,
    dq_sys = <tau^t(H_S)> - <H_S>, dq_res = <H_R> - <tau^t(H_R)>.
    """
    if t == 0.0:
        return 0.0, 0.0
    dq_s = scn.expect(scn.evolve(scn.h_sys_full, t)) - scn.expect(scn.h_sys_full)
    dq_r = scn.expect(scn.h_res_full) - scn.expect(scn.evolve(scn.h_res_full, t))
    return dq_s, dq_r


def _quad_expect_flux(scn: Scenario, phi: np.ndarray, t: float, quad_tol: float) -> float:
    if t == 0.0:
        return 0.0

    def integrand(s: float) -> float:
        return scn.expect(scn.evolve(phi, s))

    val, err = quad(integrand, 0.0, t, epsabs=quad_tol, epsrel=1e-13, limit=400)
    if err > quad_tol + 1e-14:
        raise QuadratureError(
            f"flux integral reached absolute error {err:.3e} > {quad_tol:.3e}", err
        )
    return float(val)


def delta_q_flux(
    scn: Scenario, t: float, quad_tol: float = DEFAULT_QUAD_TOL
) -> tuple[float, float]:
    """Two-time energy bookkeeping from time-integrated fluxes.

    dq_res = integral of <tau^s(phi_res)> over [0, t]; integrating the system
    flux gives the *decrease* of system energy, so dq_sys carries a minus
    sign.  Agrees with :func:`delta_q_direct` within the quadrature
    tolerance.
    """
    if quad_tol <= 0:
        raise ValueError("quad_tol must be positive")
    fl = flux_observables(scn)
    dq_s = -_quad_expect_flux(scn, fl.phi_sys, t, quad_tol)
    dq_r = _quad_expect_flux(scn, fl.phi_res, t, quad_tol)
    return dq_s, dq_r


def balance_check(scn: Scenario, t: float) -> float:
    """Residual of the exchanged-energy balance identity.

    |(dq_res - dq_sys) - lam * (<tau^t(V)> - <V>)| with both energies from
    :func:`delta_q_direct`; vanishes up to roundoff for every (lam, t).
    """
    dq_s, dq_r = delta_q_direct(scn, t)
    coupling_term = scn.lam * (scn.expect(scn.evolve(scn.v, t)) - scn.expect(scn.v))
    return abs((dq_r - dq_s) - coupling_term)


def exact_cocycle(scn: Scenario, t: float) -> np.ndarray:
    """Interaction-picture cocycle e^{itH_coupled} e^{-itH_free}."""
    return scn.unitary_coupled(t) @ scn.unitary_free(-t)


def dyson_error_bound(scn: Scenario, t: float, order: int) -> float:
    """Tail bound for the truncated Dyson series of the cocycle.

    (|lam| ||V|| |t|)^(order+1) * exp(|lam| ||V|| |t|) / (order+1)!.
    """
    x = abs(scn.lam) * op_norm(scn.v) * abs(t)
    return x ** (order + 1) * math.exp(x) / math.factorial(order + 1)


def _dyson_rk4(scn: Scenario, t: float, order: int, n_steps: int) -> np.ndarray:
    """Integrate the order-truncated cocycle hierarchy with fixed-step RK4.

    The exact cocycle solves dG/dt = i lam G W(t) with W(t) the freely
    evolved coupling; the order-k truncation is the k-th Picard iterate,
    i.e. the solution of the strictly triangular hierarchy
    dY_n/dt = i lam Y_{n-1} W(t), Y_0 = 1.
    """
    d = scn.dim
    w0, u0 = scn._eig_free

    def w_at(s: float) -> np.ndarray:
        u = (u0 * np.exp(1j * s * w0)) @ dagger(u0)
        return u @ scn.v @ dagger(u)

    y = [np.eye(d, dtype=complex)] + [np.zeros((d, d), dtype=complex) for _ in range(order)]
    h = t / n_steps

    def rhs(ys: list[np.ndarray], w: np.ndarray) -> list[np.ndarray]:
        return [np.zeros((d, d), dtype=complex)] + [
            1j * scn.lam * ys[n - 1] @ w for n in range(1, order + 1)
        ]

    s = 0.0
    for _ in range(n_steps):
        w1, w2, w3 = w_at(s), w_at(s + h / 2), w_at(s + h)
        k1 = rhs(y, w1)
        k2 = rhs([yi + h / 2 * ki for yi, ki in zip(y, k1)], w2)
        k3 = rhs([yi + h / 2 * ki for yi, ki in zip(y, k2)], w2)
        k4 = rhs([yi + h * ki for yi, ki in zip(y, k3)], w3)
        y = [
            yi + h / 6 * (a + 2 * b + 2 * c + d_)
            for yi, a, b, c, d_ in zip(y, k1, k2, k3, k4)
        ]
        s += h
    return sum(y[1:], start=y[0])


def dyson_cocycle(
    scn: Scenario,
    t: float,
    order: int,
    quad_tol: float = DEFAULT_QUAD_TOL,
    n_steps: int | None = None,
) -> np.ndarray:
    """Order-truncated Dyson expansion of the interaction-picture cocycle.

    The truncation error against :func:`exact_cocycle` is bounded by
    :func:`dyson_error_bound` plus the integration tolerance.  The hierarchy
    is integrated at two step sizes; if the Richardson estimate of the
    integration error exceeds ``quad_tol``, a QuadratureError is raised.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if t == 0.0 or scn.lam == 0.0 or order == 0:
        return np.eye(scn.dim, dtype=complex)
    if n_steps is None:
        n_steps = max(60, int(math.ceil(120 * abs(t))))
    coarse = _dyson_rk4(scn, t, order, n_steps)
    fine = _dyson_rk4(scn, t, order, 2 * n_steps)
    est = op_norm(fine - coarse) / 15.0
    if est > quad_tol:
        raise QuadratureError(
            f"cocycle integration error estimate {est:.3e} > {quad_tol:.3e}", est
        )
    return fine
