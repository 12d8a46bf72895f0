"""Degradability and anti-degradability tests.

Two independent routes are provided:

* the transfer-matrix route, which builds the Jamiolkowski operator of the
  candidate degrading map ``Phi = T_c o T^-1`` (``T_c`` the conjugate
  channel) and checks its spectrum;
* the twisted-diagonal route for channels whose Kraus operators become
  simultaneously diagonal under ``A_i -> Y A_i X``, where positivity of a
  ``d x d`` Hermitian matrix ``H`` decides degradability.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg
from .channel import (
    ChannelError,
    JamiolkowskiOperator,
    QuantumChannel,
    conjugate,
    gamma,
    require_valid,
    transfer_matrix,
)

PSD_TOL = 1e-9
BOUNDARY_BAND = 1e-7
CONSISTENCY_TOL = 1e-8
OVERLAP_TOL = 1e-10

RANK_DEFICIENT = "rank-deficient"
NO_LINEAR_MAP = "no-linear-degrading-map"
NON_UNIQUE = "non-unique-completion"
NEAR_BOUNDARY = "near-boundary"
FALLBACK = "fallback:transfer-matrix"


class Verdict(str, enum.Enum):
    DEGRADABLE = "degradable"
    ANTI_DEGRADABLE = "anti-degradable"
    BOTH = "both"
    NEITHER = "neither"
    INCONCLUSIVE = "inconclusive"


class TwistError(ValueError):
    """The channel could not be brought to twisted-diagonal form."""


class HUndefinedError(ValueError):
    """Vanishing overlap between twisted-diagonal vectors."""


@dataclass(frozen=True)
class PhiResult:
    """Jamiolkowski operator of the candidate degrading map plus diagnostics."""

    operator: JamiolkowskiOperator
    flags: tuple[str, ...]
    consistent: bool
    condition: float


class DegradabilityTest(NamedTuple):
    holds: bool | None
    margin: float
    flags: tuple[str, ...] = ()

    @property
    def conclusive(self) -> bool:
        return self.holds is not None


@dataclass(frozen=True)
class DegradabilityReport:
    verdict: Verdict
    deg_margin: float
    antideg_margin: float
    condition_flags: list[str] = field(default_factory=list)
    degradable: bool | None = None
    antidegradable: bool | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "deg_margin": _finite_or_none(self.deg_margin),
            "antideg_margin": _finite_or_none(self.antideg_margin),
            "degradable": self.degradable,
            "antidegradable": self.antidegradable,
            "condition_flags": list(self.condition_flags),
            "notes": list(self.notes),
        }


def _finite_or_none(x: float):
    return float(x) if np.isfinite(x) else None


def phi_jamiolkowski(T: QuantumChannel) -> PhiResult:
    """Jamiolkowski operator of ``Phi = T_c o T^-1``.

    When the transfer matrix of ``T`` is ill-conditioned (or rectangular)
    the pseudo-inverse is used. In that case ``consistent`` records whether
    ``T_c`` vanishes on the kernel of ``T``; if it does not, no linear map
    ``Phi`` with ``Phi o T = T_c`` exists at all.
    """
    Tc = conjugate(T)
    M = transfer_matrix(T).matrix
    Mc = transfer_matrix(Tc).matrix
    # Phi^Gamma M = Mc  <=>  M^T Phi^T = Mc^T
    sol = linalg.solve_or_pinv(M.T, Mc.T)
    X = sol.solution.T
    flags: list[str] = []
    consistent = True
    if sol.rank_deficient:
        flags.append(RANK_DEFICIENT)
        resid = np.linalg.norm(X @ M - Mc)
        consistent = bool(resid <= CONSISTENCY_TOL * max(1.0, np.linalg.norm(Mc)))
        if not consistent:
            flags.append(NO_LINEAR_MAP)
    tau = gamma(X, T.d_env, T.d_out, to="jamiolkowski")
    tau = linalg.hermitian_part(tau)
    return PhiResult(JamiolkowskiOperator(T.d_env, T.d_out, tau), tuple(flags), consistent, sol.condition)


def _near_boundary(rel_eigs: np.ndarray, condition: float) -> bool:
    # tau_Phi has a structural kernel, so its smallest eigenvalue sits at
    # round-off level even deep inside the degradable region; only eigenvalues
    # that are small yet distinguishable from round-off mark fragility
    null_tol = max(1e-12, 100 * np.finfo(float).eps * condition)
    mags = np.abs(rel_eigs)
    return bool(np.any((mags > null_tol) & (mags < BOUNDARY_BAND)))


def is_degradable(T: QuantumChannel, tol: float = PSD_TOL) -> DegradabilityTest:
    """Check ``tau_Phi >= 0`` up to ``tol`` times its trace.

    ``holds`` is ``None`` when the answer depends on how the degrading map
    is completed off the range of ``T``.
    """
    require_valid(T)
    res = phi_jamiolkowski(T)
    tau = res.operator.matrix
    trace = float(np.trace(tau).real)
    w = linalg.herm_eigvals(tau)
    scale = trace if trace > 0 else max(1.0, float(np.abs(w).max()))
    margin = float(w[0] / scale)
    flags = list(res.flags)
    if _near_boundary(w / scale, res.condition):
        flags.append(NEAR_BOUNDARY)
    if not res.consistent:
        return DegradabilityTest(False, margin, tuple(flags))
    positive = margin >= -tol
    if RANK_DEFICIENT in res.flags:
        # the pseudo-inverse fixes Phi only on the range of T; a positive,
        # trace-preserving completion certifies degradability, anything else
        # leaves the question open
        if positive and abs(trace - T.d_out) <= 1e-6:
            return DegradabilityTest(True, margin, tuple(flags))
        flags.append(NON_UNIQUE)
        return DegradabilityTest(None, margin, tuple(flags))
    return DegradabilityTest(positive, margin, tuple(flags))


def is_antidegradable(T: QuantumChannel, tol: float = PSD_TOL) -> DegradabilityTest:
    return is_degradable(conjugate(T), tol)


def classify(T: QuantumChannel, tol: float = PSD_TOL) -> DegradabilityReport:
    deg = is_degradable(T, tol)
    anti = is_antidegradable(T, tol)
    flags = [f"deg:{f}" for f in deg.flags] + [f"antideg:{f}" for f in anti.flags]
    notes: list[str] = []
    if deg.holds is None or anti.holds is None:
        verdict = Verdict.INCONCLUSIVE
    elif deg.holds and anti.holds:
        verdict = Verdict.BOTH
        notes.append("channel and its conjugate are unitarily equivalent")
    elif deg.holds:
        verdict = Verdict.DEGRADABLE
    elif anti.holds:
        verdict = Verdict.ANTI_DEGRADABLE
    else:
        verdict = Verdict.NEITHER
    return DegradabilityReport(
        verdict=verdict,
        deg_margin=deg.margin,
        antideg_margin=anti.margin,
        condition_flags=flags,
        degradable=deg.holds,
        antidegradable=anti.holds,
        notes=notes,
    )


# --- twisted-diagonal criterion ----------------------------------------------


@dataclass(frozen=True)
class TwistedDiagonalForm:
    """``Y A_i X = diag(diagonals[:, i])`` for every Kraus operator ``A_i``.

    ``diagonals[l, i]`` is the ``l``-th diagonal entry of the ``i``-th
    transformed Kraus operator; ``psi[l]`` is row ``l`` normalized.
    """

    X: np.ndarray
    Y: np.ndarray
    diagonals: np.ndarray
    psi: np.ndarray
    residual: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class HMatrix:
    matrix: np.ndarray
    min_eigenvalue: float

    @property
    def margin(self) -> float:
        """Smallest eigenvalue relative to the trace (the trace is always positive)."""
        return self.min_eigenvalue / float(np.trace(self.matrix).real)


def _is_diagonal(A: np.ndarray) -> bool:
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off)) <= 1e-14 * max(1.0, float(np.linalg.norm(A)))


def _finish_form(kraus: np.ndarray, X: np.ndarray, Y: np.ndarray, flags) -> TwistedDiagonalForm:
    d = kraus.shape[1]
    transformed = np.einsum("ab,kbc,cd->kad", Y, kraus, X)
    diagonals = np.stack([np.diag(B) for B in transformed], axis=1)
    residual = 0.0
    for A, B in zip(kraus, transformed):
        err = np.linalg.norm(B - np.diag(np.diag(B))) / max(1.0, np.linalg.norm(A))
        residual = max(residual, float(err))
    if residual > 1e-8:
        raise TwistError(f"not twist-diagonalizable to tolerance (residual {residual:.3e})")
    norms = np.linalg.norm(diagonals, axis=1)
    if np.any(norms == 0):
        raise TwistError("a twisted-diagonal vector vanishes; the channel is not invertible")
    psi = diagonals / norms[:, None]
    assert psi.shape[0] == d
    return TwistedDiagonalForm(X, Y, diagonals, psi, residual, tuple(flags))


def twist_diagonalize(T: QuantumChannel) -> TwistedDiagonalForm:
    """Find invertible ``X, Y`` with every ``Y A_i X`` diagonal.

    Uses the polar decomposition ``A_1 = U_1 P_1``: with
    ``Y = R P_1^{-1/2} U_1^dagger`` and ``X = P_1^{-1/2} R^{-1}`` the first
    Kraus operator maps to the identity and ``R`` diagonalizes the rest.
    Already-diagonal Kraus lists return ``X = Y = 1``.

    Raises
    ------
    TwistError
        If no Kraus operator is invertible and perturbation does not help,
        or if the remaining part is defective (e.g. amplitude damping).
    """
    if T.d_in != T.d_out:
        raise TwistError("twisted-diagonal form needs a square channel")
    K = np.array(T.kraus)
    d = T.d_in
    if all(_is_diagonal(A) for A in K):
        return _finish_form(K, np.eye(d, dtype=complex), np.eye(d, dtype=complex), ())

    flags: list[str] = []
    pivot = next((i for i, A in enumerate(K) if not linalg.is_singular(A)), None)
    A1 = K[0] if pivot is None else K[pivot]
    if pivot is None:
        A1 = A1 + 1e-10 * np.linalg.norm(A1) * np.eye(d)
        pivot = 0
        flags.append("perturbed")
        if linalg.is_singular(A1):
            raise TwistError("all Kraus operators are singular; reorder Kraus operators or perturb")
    elif pivot != 0:
        flags.append("reordered")

    U1, P1 = linalg.polar_decompose(A1)
    Pm = linalg.psd_power(P1, -0.5)
    rest = [Pm @ U1.conj().T @ A @ Pm for i, A in enumerate(K) if i != pivot]
    if rest:
        # a fixed generic combination separates eigenvalues shared by single terms
        coeffs = np.exp(1j * (0.7 + 1.3 * np.arange(len(rest)))) / np.arange(1, len(rest) + 1)
        M = sum(c * B for c, B in zip(coeffs, rest))
        try:
            eig = linalg.general_eigendecomposition(M)
        except linalg.NotDiagonalizableError as exc:
            raise TwistError(f"not twist-diagonalizable to tolerance: {exc}") from exc
        V = eig.vectors
    else:
        V = np.eye(d, dtype=complex)
    Y = np.linalg.solve(V, Pm @ U1.conj().T)
    X = Pm @ V
    return _finish_form(K, X, Y, flags)


def h_matrix(f: TwistedDiagonalForm) -> HMatrix:
    """``H[k, l] = [(Y Y^dagger)^-1][k, l] / <psi_k|psi_l>``."""
    K = np.linalg.inv(f.Y @ f.Y.conj().T)
    G = f.psi.conj() @ f.psi.T
    if np.min(np.abs(G)) < OVERLAP_TOL:
        raise HUndefinedError("H undefined: vanishing overlap <psi_k|psi_l>; fall back to transfer-matrix criterion")
    H = K / G
    scale = max(1.0, float(np.linalg.norm(H)))
    if np.linalg.norm(H - H.conj().T) > 1e-9 * scale:
        raise HUndefinedError("H is not Hermitian to tolerance")
    H = linalg.hermitian_part(H)
    return HMatrix(H, float(linalg.herm_eigvals(H)[0]))


def psi_jamiolkowski_from_H(f: TwistedDiagonalForm, H: HMatrix) -> JamiolkowskiOperator:
    """``tau = sum_kl H[k, l] |psi_l><psi_k| (x) |l><k|`` on environment (x) system."""
    d, d_env = f.psi.shape
    V = np.zeros((d_env * d, d), dtype=complex)
    for l in range(d):
        V[:, l] = np.kron(f.psi[l], np.eye(d)[l])
    tau = V @ H.matrix.T @ V.conj().T
    return JamiolkowskiOperator(d_env, d, tau)


def psi_jamiolkowski_direct(T: QuantumChannel, f: TwistedDiagonalForm) -> JamiolkowskiOperator:
    """Jamiolkowski operator of ``T_c o T_X o (T_Y o T o T_X)^-1`` from transfer matrices."""
    M = transfer_matrix(T).matrix
    Mc = transfer_matrix(conjugate(T)).matrix
    SX = np.kron(f.X, f.X.conj())
    SY = np.kron(f.Y, f.Y.conj())
    psi_transfer = Mc @ SX @ np.linalg.inv(SY @ M @ SX)
    return JamiolkowskiOperator(T.d_env, T.d_in, gamma(psi_transfer, T.d_env, T.d_in, to="jamiolkowski"))


def is_degradable_via_H(T: QuantumChannel, tol: float = PSD_TOL) -> DegradabilityTest:
    """Degradability from the sign of the smallest eigenvalue of ``H``.

    Falls back to :func:`is_degradable` (flagged) when the channel has no
    twisted-diagonal form or ``H`` is undefined.
    """
    require_valid(T)
    try:
        f = twist_diagonalize(T)
        H = h_matrix(f)
    except (TwistError, HUndefinedError, linalg.LinAlgToleranceError) as exc:
        res = is_degradable(T, tol)
        return DegradabilityTest(res.holds, res.margin, (FALLBACK, str(exc)) + res.flags)
    margin = H.margin
    flags = list(f.flags)
    if abs(margin) < BOUNDARY_BAND:
        flags.append(NEAR_BOUNDARY)
    return DegradabilityTest(margin >= -tol, margin, tuple(flags))


__all__ = [
    "ChannelError",
    "DegradabilityReport",
    "DegradabilityTest",
    "HMatrix",
    "HUndefinedError",
    "PhiResult",
    "TwistError",
    "TwistedDiagonalForm",
    "Verdict",
    "classify",
    "h_matrix",
    "is_antidegradable",
    "is_degradable",
    "is_degradable_via_H",
    "phi_jamiolkowski",
    "psi_jamiolkowski_direct",
    "psi_jamiolkowski_from_H",
    "twist_diagonalize",
]
