"""Dense complex linear algebra and entropy primitives for small matrices.

Everything here works on ``complex128`` numpy arrays of at most
:data:`MAX_ENTRIES` entries. Tolerances are absolute unless stated
otherwise and are exposed as module constants so that callers can refer
to them by name.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

MAX_ENTRIES = 256
HERMITIAN_TOL = 1e-9
CONDITION_CUTOFF = 1e10
CLAMP_WINDOW = 1e-12
SINGULAR_RATIO = 1e-12


class LinAlgToleranceError(ValueError):
    """Raised when an input violates a numerical precondition."""


class NotDiagonalizableError(LinAlgToleranceError):
    pass


class HermitianEigensystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class Eigendecomposition(NamedTuple):
    vectors: np.ndarray
    values: np.ndarray
    condition: float


class SolveResult(NamedTuple):
    solution: np.ndarray
    rank_deficient: bool
    condition: float


def as_matrix(M, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex array, enforcing the size limit."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if A.size > MAX_ENTRIES:
        raise ValueError(f"{name} has {A.size} entries; the limit is {MAX_ENTRIES}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def herm_eigensystem(M) -> HermitianEigensystem:
    """Eigen-decompose a Hermitian matrix, eigenvalues in descending order.

    Raises
    ------
    LinAlgToleranceError
        If ``||M - M^dagger||_F`` exceeds ``1e-9 * max(1, ||M||_F)``.
    """
    A = as_matrix(M, square=True)
    scale = max(1.0, np.linalg.norm(A))
    asym = np.linalg.norm(A - A.conj().T)
    if asym > HERMITIAN_TOL * scale:
        raise LinAlgToleranceError(
            f"matrix is not Hermitian: ||M - M^dagger||_F = {asym:.3e} "
            f"exceeds {HERMITIAN_TOL:.0e} * max(1, ||M||_F)"
        )
    w, v = np.linalg.eigh(hermitian_part(A))
    return HermitianEigensystem(w[::-1].copy(), v[:, ::-1].copy())


def herm_eigvals(M) -> np.ndarray:
    """Eigenvalues only, ascending; no Hermiticity check beyond symmetrization."""
    return np.linalg.eigvalsh(hermitian_part(np.asarray(M, dtype=np.complex128)))


def general_eigendecomposition(M) -> Eigendecomposition:
    """Diagonalize ``M = R diag(values) R^-1``.

    The condition number of the eigenvector matrix ``R`` is returned so that
    near-defective inputs can be detected; above :data:`CONDITION_CUTOFF`
    the matrix counts as not diagonalizable.
    """
    A = as_matrix(M, square=True)
    values, R = np.linalg.eig(A)
    cond = float(np.linalg.cond(R))
    if not np.isfinite(cond) or cond > CONDITION_CUTOFF:
        raise NotDiagonalizableError(
            f"not diagonalizable to tolerance (eigenvector condition number {cond:.3e})"
        )
    resid = np.linalg.norm(A - R @ np.diag(values) @ np.linalg.inv(R))
    if resid > 1e-8 * max(1.0, np.linalg.norm(A)):
        raise NotDiagonalizableError(
            f"not diagonalizable to tolerance (reconstruction residual {resid:.3e})"
        )
    return Eigendecomposition(R, values, cond)


def polar_decompose(A) -> tuple[np.ndarray, np.ndarray]:
    """Right polar decomposition ``A = U P`` of an invertible square matrix."""
    A = as_matrix(A, square=True)
    W, s, Vh = np.linalg.svd(A)
    if s[-1] < SINGULAR_RATIO * s[0] or s[0] == 0.0:
        raise LinAlgToleranceError("polar factor not unique: matrix is singular to tolerance")
    U = W @ Vh
    P = hermitian_part(dagger(Vh) @ np.diag(s) @ Vh)
    return U, P


def is_singular(A, ratio: float = SINGULAR_RATIO) -> bool:
    s = np.linalg.svd(np.asarray(A, dtype=np.complex128), compute_uv=False)
    return s[0] == 0.0 or s[-1] < ratio * s[0]


def psd_power(P, power: float) -> np.ndarray:
    """Matrix power of a positive definite Hermitian matrix."""
    w, v = np.linalg.eigh(hermitian_part(np.asarray(P, dtype=np.complex128)))
    if w[0] <= 0:
        raise LinAlgToleranceError("matrix is not positive definite")
    return (v * w**power) @ dagger(v)


def solve_or_pinv(M, B) -> SolveResult:
    """Return ``M^-1 B``, or the least-squares solution when ``M`` is ill-conditioned.

    The ``rank_deficient`` flag is set whenever the condition number of
    ``M`` exceeds :data:`CONDITION_CUTOFF` (or ``M`` is not square).
    """
    A = as_matrix(M, name="M")
    Bm = np.asarray(B, dtype=np.complex128)
    s = np.linalg.svd(A, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    if A.shape[0] == A.shape[1] and cond <= CONDITION_CUTOFF:
        return SolveResult(np.linalg.solve(A, Bm), False, cond)
    X = np.linalg.pinv(A, rcond=1.0 / CONDITION_CUTOFF) @ Bm
    return SolveResult(X, True, cond)


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits.

    Eigenvalues in ``[-1e-12, 0)`` are treated as zero; anything more
    negative means the input is not a state.
    """
    A = as_matrix(rho, square=True, name="rho")
    if abs(np.trace(A).real - 1.0) > 1e-9:
        raise LinAlgToleranceError(f"not a state: trace {np.trace(A).real!r} differs from 1")
    w = herm_eigensystem(A).eigenvalues
    if w[-1] < -CLAMP_WINDOW:
        raise LinAlgToleranceError(f"not a state: eigenvalue {w[-1]:.3e} < -{CLAMP_WINDOW:.0e}")
    return entropy_of_spectrum(w)


def entropy_of_spectrum(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def _xlog2x(x: float) -> float:
    return 0.0 if x <= 0.0 else x * math.log2(x)


def binary_entropy(x: float) -> float:
    """``h(x) = -x log2 x - (1-x) log2(1-x)`` with ``h(0) = h(1) = 0``."""
    x = float(x)
    if not (-CLAMP_WINDOW <= x <= 1.0 + CLAMP_WINDOW):
        raise ValueError(f"binary_entropy domain error: {x!r} not in [0, 1]")
    x = min(max(x, 0.0), 1.0)
    # both arguments derive from the larger one, so h(x) and h(1-x) agree bit for bit
    hi = max(x, 1.0 - x)
    return -(_xlog2x(1.0 - hi) + _xlog2x(hi))


def binary_entropy_array(x) -> np.ndarray:
    """Vectorized :func:`binary_entropy` for arrays already inside ``[0, 1]``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    hi = np.maximum(x, 1.0 - x)
    lo = 1.0 - hi
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(lo > 0, lo * np.log2(np.where(lo > 0, lo, 1.0)), 0.0)
        b = np.where(hi > 0, hi * np.log2(np.where(hi > 0, hi, 1.0)), 0.0)
    return -(a + b)


def partial_trace(M, subsystem: str, d_a: int, d_b: int) -> np.ndarray:
    """Trace out factor ``"A"`` or ``"B"`` of an operator on ``C^d_a (x) C^d_b``."""
    A = np.asarray(M, dtype=np.complex128)
    if A.shape != (d_a * d_b, d_a * d_b):
        raise ValueError(f"dimension mismatch: shape {A.shape} is not {d_a}*{d_b} square")
    T = A.reshape(d_a, d_b, d_a, d_b)
    if subsystem == "B":
        return np.einsum("ijkj->ik", T)
    if subsystem == "A":
        return np.einsum("ijil->jl", T)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
