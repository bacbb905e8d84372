"""Dense complex linear algebra on square matrices.

Everything downstream runs through the clustered Hermitian eigendecomposition
defined here: functional calculus, positive square roots, fractional powers
and unitary exponentials are all assembled in the eigenbasis, never by series
summation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Relative tolerance for accepting a matrix as Hermitian / positive.
HERMITICITY_RTOL = 1e-12
POSITIVITY_RTOL = 1e-12
# Default eigenvalue clustering: relative to the spectral norm.  FCS atom
# locations are energy differences, so spuriously split near-degenerate
# eigenvalues would fragment atoms.
CLUSTER_RTOL = 1e-9


class NonHermitianError(ValueError):
    """Input required to be Hermitian is not, beyond tolerance."""


class NotPositiveError(ValueError):
    """Input required to be positive semidefinite has a negative eigenvalue."""


class SpectrumDomainError(ValueError):
    """A scalar function is undefined at an eigenvalue of its argument."""


class RankDeficientError(ValueError):
    """An operator required to be full rank is (numerically) singular."""


def dagger(a: np.ndarray) -> np.ndarray:
    """Adjoint (conjugate transpose)."""
    return a.conj().T


def op_norm(a: np.ndarray) -> float:
    """Operator norm (largest singular value)."""
    return float(np.linalg.norm(a, 2))


def hs_norm(a: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(a))


def hs_inner(x: np.ndarray, y: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(x* y), antilinear in the first slot."""
    return complex(np.vdot(x, y))


def hermiticity_defect(a: np.ndarray) -> float:
    """Operator norm of (a - a*)."""
    return op_norm(a - dagger(a))


def assert_hermitian(a: np.ndarray, rtol: float = HERMITICITY_RTOL, name: str = "operator") -> None:
    """Raise NonHermitianError if ||a - a*|| > rtol * max(1, ||a||)."""
    defect = hermiticity_defect(a)
    scale = max(1.0, op_norm(a))
    if defect > rtol * scale:
        raise NonHermitianError(
            f"{name} is not Hermitian: asymmetry norm {defect:.3e} exceeds "
            f"{rtol:.1e} * {scale:.3e}"
        )


def assert_square(a: np.ndarray, name: str = "operator") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Clustered spectral resolution of a Hermitian matrix.

    ``eigenvalues`` are ascending cluster representatives (one per merged
    cluster); ``projectors[i]`` is the orthogonal projector onto the
    corresponding eigenspace.  The projectors are Hermitian, idempotent,
    mutually orthogonal and sum to the identity.
    """

    eigenvalues: np.ndarray
    projectors: list = field(repr=False)
    multiplicities: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue * projector."""
        out = np.zeros_like(self.projectors[0])
        for lam, p in zip(self.eigenvalues, self.projectors):
            out = out + lam * p
        return out

    def apply(self, f: Callable[[float], complex]) -> np.ndarray:
        """Assemble sum of f(eigenvalue) * projector, checking f's domain."""
        out = np.zeros(self.projectors[0].shape, dtype=complex)
        for lam, p in zip(self.eigenvalues, self.projectors):
            try:
                val = complex(f(float(lam)))
            except (ValueError, ZeroDivisionError, FloatingPointError, OverflowError) as exc:
                raise SpectrumDomainError(
                    f"function undefined at eigenvalue {lam!r}: {exc}"
                ) from exc
            if not np.isfinite(val):
                raise SpectrumDomainError(f"function not finite at eigenvalue {lam!r}")
            out += val * p
        return out


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Greedy chain clustering of sorted values: split where the gap > tol."""
    if len(values) == 0:
        return []
    splits = np.nonzero(np.diff(values) > tol)[0] + 1
    return np.split(np.arange(len(values)), splits)


def eig_hermitian(a: np.ndarray, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Clustered eigendecomposition of a Hermitian matrix.

    Eigenvalues lying within ``cluster_tol`` of each other (default
    1e-9 * ||a||) are merged into a single projector; the cluster
    representative is the mean of the merged eigenvalues.
    """
    assert_square(a)
    assert_hermitian(a)
    scale = op_norm(a)
    if cluster_tol is None:
        cluster_tol = CLUSTER_RTOL * max(scale, 1e-300)
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    w, v = np.linalg.eigh(a)
    eigenvalues, projectors, mults = [], [], []
    for idx in _cluster(w, cluster_tol):
        cols = v[:, idx]
        projectors.append(cols @ dagger(cols))
        eigenvalues.append(float(np.mean(w[idx])))
        mults.append(len(idx))
    return SpectralDecomposition(
        eigenvalues=np.array(eigenvalues),
        projectors=projectors,
        multiplicities=np.array(mults),
    )


def func_calc(
    a: np.ndarray,
    f: Callable[[float], complex],
    cluster_tol: float | None = None,
) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    Returns sum of f(eigenvalue) * projector.  The spectral mapping property
    holds: the spectrum of the result is f applied to the spectrum of ``a``.
    Raises SpectrumDomainError naming the offending eigenvalue if f is
    undefined there.
    """
    return eig_hermitian(a, cluster_tol).apply(f)


def positive_sqrt(a: np.ndarray) -> np.ndarray:
    """Unique positive square root of a positive semidefinite matrix.

    Eigenvalues in [-1e-12 * ||a||, 0) are clamped to zero (roundoff);
    anything more negative raises NotPositiveError.
    """
    assert_square(a)
    assert_hermitian(a)
    w, v = np.linalg.eigh(a)
    scale = max(abs(w[0]), abs(w[-1]), 0.0)
    floor = -POSITIVITY_RTOL * max(scale, 1e-300)
    if w[0] < floor:
        raise NotPositiveError(
            f"matrix is not positive: eigenvalue {w[0]:.6e} below tolerance {floor:.1e}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def abs_op(a: np.ndarray) -> np.ndarray:
    """Operator absolute value sqrt(a* a)."""
    assert_square(a)
    return positive_sqrt(dagger(a) @ a)


def herm_power(a: np.ndarray, alpha: complex, rank_tol: float = 0.0) -> np.ndarray:
    """Principal fractional power of a positive semidefinite matrix.

    Zero eigenvalues are mapped to zero, which is only valid for
    Re(alpha) > 0; powers with Re(alpha) <= 0 of a singular matrix raise
    RankDeficientError.  ``rank_tol`` treats eigenvalues at or below it as
    zero.
    """
    assert_square(a)
    assert_hermitian(a)
    w, v = np.linalg.eigh(a)
    scale = max(abs(w[-1]), 1e-300)
    if w[0] < -POSITIVITY_RTOL * scale:
        raise NotPositiveError(f"matrix is not positive: eigenvalue {w[0]:.6e}")
    w = np.clip(w, 0.0, None)
    zero = w <= rank_tol
    if np.any(zero) and alpha.real <= 0:
        raise RankDeficientError(
            f"power {alpha} of a singular matrix (min eigenvalue {w[0]:.3e})"
        )
    powered = np.zeros(len(w), dtype=complex)
    powered[~zero] = w[~zero].astype(complex) ** alpha
    return (v * powered) @ dagger(v)


def herm_log(a: np.ndarray) -> np.ndarray:
    """Matrix logarithm of a positive definite matrix via its eigenbasis."""
    assert_square(a)
    assert_hermitian(a)
    w, v = np.linalg.eigh(a)
    if w[0] <= 0:
        raise RankDeficientError(f"log of a non-definite matrix (min eigenvalue {w[0]:.3e})")
    return (v * np.log(w)) @ dagger(v)


def expm_hermitian(h: np.ndarray, z: complex = 1.0) -> np.ndarray:
    """exp(z * h) for Hermitian h, assembled in the eigenbasis.

    For purely imaginary z the result is unitary up to roundoff.
    """
    assert_square(h)
    assert_hermitian(h)
    w, v = np.linalg.eigh(h)
    return (v * np.exp(z * w)) @ dagger(v)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product in (system (x) reservoir) order."""
    out = np.asarray(ops[0], dtype=complex)
    for b in ops[1:]:
        out = np.kron(out, np.asarray(b, dtype=complex))
    return out


def partial_trace(x: np.ndarray, factor_dims: Sequence[int], which: int) -> np.ndarray:
    """Trace out tensor factor ``which`` (0-based) of a product-space matrix.

    ``factor_dims`` lists the local dimensions in Kronecker order; their
    product must equal the dimension of ``x``.
    """
    assert_square(x)
    dims = tuple(int(d) for d in factor_dims)
    n = len(dims)
    if int(np.prod(dims)) != x.shape[0]:
        raise ValueError(
            f"factor dims {dims} have product {int(np.prod(dims))}, "
            f"but matrix has dimension {x.shape[0]}"
        )
    if not 0 <= which < n:
        raise ValueError(f"subsystem index {which} out of range for {n} factors")
    t = x.reshape(dims + dims)
    t = np.trace(t, axis1=which, axis2=which + n)
    keep = int(np.prod([d for i, d in enumerate(dims) if i != which]))
    return t.reshape(keep, keep)


def commutator_gen(h: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Derivation generated by a Hermitian h: the map a -> i(h a - a h)."""
    assert_square(h)
    assert_hermitian(h)

    def gen(a: np.ndarray) -> np.ndarray:
        return 1j * (h @ a - a @ h)

    return gen


def norm_spectral_check(a: np.ndarray) -> tuple[float, float]:
    """(operator norm, spectral radius) of a square matrix.

    The two agree for normal matrices; a nilpotent matrix exhibits the gap.
    """
    assert_square(a)
    radius = float(np.max(np.abs(np.linalg.eigvals(a)))) if a.shape[0] else 0.0
    return op_norm(a), radius
