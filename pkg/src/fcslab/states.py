"""Density matrices, entropy, Gibbs equilibrium, projective measurement,
and atomic spectral measures of (observable, state) pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    assert_hermitian,
    assert_square,
    dagger,
    eig_hermitian,
    expm_hermitian,
    op_norm,
)

DENSITY_TOL = 1e-12
# Atoms closer than this are merged; lighter atoms are dropped as roundoff.
MERGE_TOL = 1e-8
WEIGHT_DROP_TOL = 1e-13


def assert_density(rho: np.ndarray, tol: float = DENSITY_TOL, name: str = "state") -> None:
    """Validate Hermiticity, positivity (>= -tol) and unit trace (within tol)."""
    assert_square(rho, name)
    assert_hermitian(rho, name=name)
    w = np.linalg.eigvalsh(rho)
    if w[0] < -tol:
        raise ValueError(f"{name} has negative eigenvalue {w[0]:.3e}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"{name} has trace {tr!r}, expected 1")


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def pure_state(psi: np.ndarray) -> np.ndarray:
    """Rank-one projector onto a (normalized) vector."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """G G*/tr(G G*) with iid complex standard normal G: full support a.s."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + dagger(g)) / 2
    norm = op_norm(h)
    return h * (scale / norm) if norm > 0 else h


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite positive point measure on the real line.

    Locations are strictly ascending and pairwise separated by more than
    ``merge_tol``; weights are nonnegative.  Construction through
    :meth:`from_points` merges nearby points (weight-averaged location, so
    the first moment is preserved exactly) and drops negligible weights.
    """

    locations: np.ndarray
    weights: np.ndarray
    merge_tol: float = MERGE_TOL

    @classmethod
    def from_points(
        cls,
        locations: np.ndarray,
        weights: np.ndarray,
        merge_tol: float = MERGE_TOL,
        drop_tol: float = WEIGHT_DROP_TOL,
    ) -> "AtomicMeasure":
        locations = np.asarray(locations, dtype=float).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        if locations.shape != weights.shape:
            raise ValueError("locations and weights must have equal length")
        if weights.size and weights.min() < -1e-12:
            raise ValueError(f"negative weight {weights.min():.3e}")
        weights = np.clip(weights, 0.0, None)
        order = np.argsort(locations)
        locations, weights = locations[order], weights[order]
        locs, wts = [], []
        i = 0
        while i < len(locations):
            j = i
            while j + 1 < len(locations) and locations[j + 1] - locations[j] <= merge_tol:
                j += 1
            w = weights[i : j + 1].sum()
            if w > drop_tol:
                x = (
                    float(np.dot(locations[i : j + 1], weights[i : j + 1]) / w)
                    if w > 0
                    else float(locations[i])
                )
                locs.append(x)
                wts.append(float(w))
            i = j + 1
        return cls(np.array(locs), np.array(wts), merge_tol)

    def __len__(self) -> int:
        return len(self.locations)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def mean(self) -> float:
        return float(np.dot(self.locations, self.weights))

    def moment(self, order: int) -> float:
        return float(np.dot(self.locations**order, self.weights))

    def char(self, gamma: np.ndarray | float) -> np.ndarray | complex:
        """Characteristic function: sum of w * exp(i gamma x)."""
        gamma = np.asarray(gamma, dtype=float)
        vals = np.exp(1j * np.multiply.outer(gamma, self.locations)) @ self.weights
        return complex(vals) if vals.ndim == 0 else vals

    def integrate(self, f) -> complex:
        return complex(sum(w * f(x) for x, w in zip(self.locations, self.weights)))


def point_mass(location: float = 0.0, weight: float = 1.0) -> AtomicMeasure:
    return AtomicMeasure(np.array([location]), np.array([weight]))


def gibbs(h: np.ndarray, beta: float) -> np.ndarray:
    """Thermal state exp(-beta h)/tr(exp(-beta h)).

    Exponents are shifted by their minimum before exponentiation, so the
    result is overflow-safe for any finite beta of either sign.
    """
    assert_square(h)
    assert_hermitian(h)
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    w, v = np.linalg.eigh(h)
    e = np.exp(-(beta * w - np.min(beta * w)))
    return (v * (e / e.sum())) @ dagger(v)


def entropy(rho: np.ndarray) -> float:
    """von Neumann entropy -tr(rho log rho), with 0 log 0 = 0."""
    assert_density(rho)
    w = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    nz = w > 0
    return float(-np.dot(w[nz], np.log(w[nz])))


@dataclass(frozen=True)
class VariationalReport:
    """Outcome of the Gibbs variational test log tr(e^A) = max(tr(rho A) + S)."""

    max_violation: float
    equality_gap: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.max_violation <= 1e-10 and abs(self.equality_gap) <= 1e-10


def gibbs_variational_check(
    h: np.ndarray, beta: float, trials: int, rng_seed: int = 0
) -> VariationalReport:
    """Check the variational identity behind the maximum-entropy principle.

    With A = -beta h, every state nu satisfies
    tr(nu A) + S(nu) <= log tr(e^A), with equality at the thermal state.
    Random states are drawn with :func:`random_density`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(rng_seed)
    a = -beta * h
    w = np.linalg.eigvalsh(a)
    log_z = float(np.log(np.sum(np.exp(w - w.max()))) + w.max())

    def functional(nu: np.ndarray) -> float:
        return float(np.trace(nu @ a).real) + entropy(nu)

    violations = [functional(random_density(h.shape[0], rng)) - log_z for _ in range(trials)]
    gap = functional(gibbs(h, beta)) - log_z
    return VariationalReport(max_violation=max(violations), equality_gap=gap, trials=trials)


@dataclass(frozen=True)
class MeasurementResult:
    """Projective measurement outcome law and conditional post states.

    ``post_states[k]`` is the normalized state after observing
    ``outcomes.locations[k]``; zero-probability outcomes are absent
    from ``outcomes`` and carry no post state.
    """

    outcomes: AtomicMeasure
    post_states: list = field(repr=False)

    @property
    def expectation(self) -> float:
        return self.outcomes.mean


def measure(
    rho: np.ndarray, a: np.ndarray, cluster_tol: float | None = None
) -> MeasurementResult:
    """Projective measurement of a Hermitian observable in a state.

    Outcome weight at eigenvalue x is tr(rho P_x); the conditional post state
    is P_x rho P_x / tr(rho P_x).  Degenerate eigenvalues (clustered) yield a
    single outcome.
    """
    assert_density(rho)
    if rho.shape != a.shape:
        raise ValueError(f"state dim {rho.shape[0]} != observable dim {a.shape[0]}")
    dec = eig_hermitian(a, cluster_tol)
    locs, wts, posts = [], [], []
    for lam, p in zip(dec.eigenvalues, dec.projectors):
        w = float(np.trace(rho @ p).real)
        if w > WEIGHT_DROP_TOL:
            locs.append(lam)
            wts.append(w)
            posts.append(p @ rho @ p / w)
    outcomes = AtomicMeasure(np.array(locs), np.array(wts))
    return MeasurementResult(outcomes=outcomes, post_states=posts)


def spectral_measure(
    a: np.ndarray, rho: np.ndarray, cluster_tol: float | None = None
) -> AtomicMeasure:
    """Spectral measure of the pair (observable, state).

    Atoms sit at the (clustered) eigenvalues of ``a`` with weights
    tr(rho P_x); integrating a polynomial against the measure reproduces
    tr(rho f(a)), which is cross-checked internally.
    """
    mu = measure(rho, a, cluster_tol).outcomes
    # Built-in consistency check against the functional calculus.
    dec = eig_hermitian(a, cluster_tol)
    quad = dec.apply(lambda x: x * x + 0.5 * x)
    lhs = mu.integrate(lambda x: x * x + 0.5 * x).real
    rhs = float(np.trace(rho @ quad).real)
    scale = max(1.0, op_norm(a) ** 2)
    if abs(lhs - rhs) > 1e-10 * scale:
        raise AssertionError(
            f"spectral measure inconsistent with functional calculus: "
            f"{lhs!r} vs {rhs!r}"
        )
    return mu


def kms_defect(
    rho: np.ndarray,
    h: np.ndarray,
    beta: float,
    pairs: list[tuple[np.ndarray, np.ndarray]],
) -> float:
    """Worst-case violation of the equilibrium boundary condition.

    Returns max over pairs (A, B) of
    |tr(rho A e^{-beta h} B e^{beta h}) - tr(rho B A)|.
    The defect vanishes exactly when rho is the thermal state of h at
    inverse temperature beta.
    """
    if not pairs:
        raise ValueError("at least one (A, B) pair is required")
    assert_density(rho)
    # Centering the spectrum keeps both exponentials bounded; the conjugation
    # e^{-beta h} B e^{beta h} is invariant under the shift.
    w = np.linalg.eigvalsh(h)
    h0 = h - np.eye(h.shape[0]) * ((w[0] + w[-1]) / 2)
    em = expm_hermitian(h0, -beta)
    ep = expm_hermitian(h0, beta)
    worst = 0.0
    for a, b in pairs:
        lhs = complex(np.trace(rho @ a @ em @ b @ ep))
        rhs = complex(np.trace(rho @ b @ a))
        worst = max(worst, abs(lhs - rhs))
    return worst
