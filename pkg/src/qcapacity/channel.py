"""Channel representations: Kraus form, conjugate channel, Jamiolkowski
operator, transfer matrix, composition and mixtures.

Vectorization is row-major throughout: ``vec(rho)[a*d + b] = rho[a, b]``.
With this choice ``vec(A rho B) = kron(A, B.T) vec(rho)`` and the transfer
matrix of a channel acts as ``vec(T(rho)) = transfer @ vec(rho)``.

The Jamiolkowski operator lives on ``output (x) input`` and uses the
unnormalized maximally entangled operator ``omega = sum_ij |ii><jj|``, so
its trace equals the input dimension of a trace-preserving map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .linalg import herm_eigvals

TP_TOL = 1e-9
CP_TOL = 1e-10


class ChannelError(ValueError):
    """Raised for malformed channels or mismatched dimensions."""


@dataclass(frozen=True)
class NormalFormParams:
    """Angles of the two-Kraus qubit normal form (radians)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("normal-form angles must be finite")


class QuantumChannel:
    """A linear map given by an ordered Kraus list.

    The list is kept exactly as supplied; its length is the represented
    environment dimension ``d_env``. Construction only checks shapes, so
    that non-trace-preserving lists can still be inspected with
    :func:`validate`.
    """

    __slots__ = ("_kraus",)

    def __init__(self, kraus: Iterable):
        ops = [np.array(A, dtype=np.complex128) for A in kraus]
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2:
            raise ChannelError(f"Kraus operators must be matrices, got shape {shape}")
        for A in ops:
            if A.shape != shape:
                raise ChannelError(f"Kraus operators differ in shape: {A.shape} vs {shape}")
            if not np.all(np.isfinite(A)):
                raise ChannelError("Kraus operators contain NaN or Inf entries")
        stack = np.stack(ops)
        stack.setflags(write=False)
        self._kraus = stack

    @property
    def kraus(self) -> np.ndarray:
        """Read-only array of shape ``(d_env, d_out, d_in)``."""
        return self._kraus

    @property
    def d_env(self) -> int:
        return self._kraus.shape[0]

    @property
    def d_out(self) -> int:
        return self._kraus.shape[1]

    @property
    def d_in(self) -> int:
        return self._kraus.shape[2]

    def __len__(self) -> int:
        return self.d_env

    def __iter__(self):
        return iter(self._kraus)

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self) -> str:
        return f"QuantumChannel(d_in={self.d_in}, d_out={self.d_out}, d_env={self.d_env})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantumChannel):
            return NotImplemented
        return self._kraus.shape == other._kraus.shape and bool(np.all(self._kraus == other._kraus))

    __hash__ = None


@dataclass(frozen=True)
class JamiolkowskiOperator:
    d_out: int
    d_in: int
    matrix: np.ndarray


@dataclass(frozen=True)
class TransferMatrix:
    d_out: int
    d_in: int
    matrix: np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    cp_margin: float
    tp_residual: float
    cp_tol: float = CP_TOL
    tp_tol: float = TP_TOL

    @property
    def completely_positive(self) -> bool:
        return self.cp_margin >= -self.cp_tol

    @property
    def trace_preserving(self) -> bool:
        return self.tp_residual <= self.tp_tol

    @property
    def ok(self) -> bool:
        return self.completely_positive and self.trace_preserving

    def describe(self) -> str:
        parts = []
        if not self.trace_preserving:
            parts.append(f"not trace preserving: TP residual {self.tp_residual:.6g} > {self.tp_tol:.0e}")
        if not self.completely_positive:
            parts.append(f"not completely positive: CP margin {self.cp_margin:.6g}")
        return "; ".join(parts) or "valid channel"


def identity_channel(d: int = 2) -> QuantumChannel:
    return QuantumChannel([np.eye(d)])


def unitary_channel(U) -> QuantumChannel:
    return QuantumChannel([U])


def apply(T: QuantumChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (T.d_in, T.d_in):
        raise ChannelError(f"input has shape {rho.shape}, channel expects {(T.d_in, T.d_in)}")
    K = T.kraus
    return np.einsum("kab,bc,kdc->ad", K, rho, K.conj())


def apply_adjoint(T: QuantumChannel, X) -> np.ndarray:
    """Heisenberg-picture action ``sum_i A_i^dagger X A_i``."""
    X = np.asarray(X, dtype=np.complex128)
    K = T.kraus
    return np.einsum("kba,bc,kcd->ad", K.conj(), X, K)


def conjugate(T: QuantumChannel) -> QuantumChannel:
    """Complementary channel via the index rule ``(Ac_i)[k, l] = A_k[i, l]``."""
    return QuantumChannel(T.kraus.transpose(1, 0, 2))


def jamiolkowski(T: QuantumChannel) -> JamiolkowskiOperator:
    vecs = T.kraus.reshape(T.d_env, T.d_out * T.d_in)
    tau = vecs.T @ vecs.conj()
    return JamiolkowskiOperator(T.d_out, T.d_in, tau)


def gamma(matrix, d_out: int, d_in: int, *, to: str) -> np.ndarray:
    """Entry permutation ``<ij|G|kl> = <ik|tau|jl>`` between the two representations.

    ``to="transfer"`` maps a ``(d_out*d_in)`` square operator to a
    ``d_out**2 x d_in**2`` transfer matrix; ``to="jamiolkowski"`` goes back.
    """
    M = np.asarray(matrix)
    if to == "transfer":
        if M.shape != (d_out * d_in, d_out * d_in):
            raise ChannelError(f"dimension mismatch: {M.shape} vs {d_out}x{d_in} bipartite operator")
        return M.reshape(d_out, d_in, d_out, d_in).transpose(0, 2, 1, 3).reshape(d_out**2, d_in**2)
    if to == "jamiolkowski":
        if M.shape != (d_out**2, d_in**2):
            raise ChannelError(f"dimension mismatch: {M.shape} vs transfer {d_out**2}x{d_in**2}")
        return M.reshape(d_out, d_out, d_in, d_in).transpose(0, 2, 1, 3).reshape(d_out * d_in, d_out * d_in)
    raise ValueError(f"unknown target representation {to!r}")


def involution_gamma(tau: JamiolkowskiOperator) -> TransferMatrix:
    return TransferMatrix(tau.d_out, tau.d_in, gamma(tau.matrix, tau.d_out, tau.d_in, to="transfer"))


def involution_gamma_inverse(M: TransferMatrix) -> JamiolkowskiOperator:
    return JamiolkowskiOperator(M.d_out, M.d_in, gamma(M.matrix, M.d_out, M.d_in, to="jamiolkowski"))


def transfer_matrix(T: QuantumChannel) -> TransferMatrix:
    return involution_gamma(jamiolkowski(T))


def compose(T1: QuantumChannel, T2: QuantumChannel) -> QuantumChannel:
    """The channel ``T1 o T2`` (apply ``T2`` first)."""
    if T2.d_out != T1.d_in:
        raise ChannelError(f"cannot compose: inner output {T2.d_out} != outer input {T1.d_in}")
    return QuantumChannel([A @ B for A in T1.kraus for B in T2.kraus])


def from_normal_form(p: NormalFormParams | tuple[float, float]) -> QuantumChannel:
    """Two-Kraus qubit channel ``A1 = diag(cos a, cos b)``, ``A2 = [[0, sin b], [sin a, 0]]``."""
    if not isinstance(p, NormalFormParams):
        p = NormalFormParams(*p)
    ca, cb = math.cos(p.alpha), math.cos(p.beta)
    sa, sb = math.sin(p.alpha), math.sin(p.beta)
    A1 = np.array([[ca, 0.0], [0.0, cb]], dtype=np.complex128)
    A2 = np.array([[0.0, sb], [sa, 0.0]], dtype=np.complex128)
    return QuantumChannel([A1, A2])


def from_isometry(V, d_env: int) -> QuantumChannel:
    """Split an isometry ``C^d_in -> C^d_out (x) C^d_env`` into Kraus operators.

    Rows of ``V`` are indexed ``(system, environment)`` with the
    environment index running fastest.
    """
    V = np.asarray(V, dtype=np.complex128)
    rows, d_in = V.shape
    if d_env < 1 or rows % d_env:
        raise ChannelError(f"{rows} rows cannot be split over an environment of dimension {d_env}")
    resid = np.linalg.norm(V.conj().T @ V - np.eye(d_in))
    if resid > TP_TOL:
        raise ChannelError(f"not an isometry: ||V^dagger V - 1||_F = {resid:.3e}")
    d_out = rows // d_env
    T = QuantumChannel(V.reshape(d_out, d_env, d_in).transpose(1, 0, 2))
    report = validate(T)
    if not report.ok:
        raise ChannelError(report.describe())
    return T


def stack_isometry(T: QuantumChannel) -> np.ndarray:
    """Inverse of :func:`from_isometry`."""
    return T.kraus.transpose(1, 0, 2).reshape(T.d_out * T.d_env, T.d_in)


def kraus_rank(T: QuantumChannel, rel_tol: float = 1e-9) -> int:
    tau = jamiolkowski(T).matrix
    w = herm_eigvals(tau)
    return int(np.sum(w > rel_tol * np.trace(tau).real))


def convex_mixture(terms: Sequence[tuple[float, QuantumChannel]]) -> QuantumChannel:
    if not terms:
        raise ChannelError("empty mixture")
    weights = np.array([float(w) for w, _ in terms])
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ChannelError(f"mixture weights must be nonnegative and sum to 1, got {weights.tolist()}")
    shape = (terms[0][1].d_out, terms[0][1].d_in)
    ops = []
    for w, T in terms:
        if (T.d_out, T.d_in) != shape:
            raise ChannelError(f"mixture terms have different dimensions: {(T.d_out, T.d_in)} vs {shape}")
        ops.extend(math.sqrt(w) * A for A in T.kraus)
    return QuantumChannel(ops)


def validate(T: QuantumChannel) -> ValidationReport:
    K = T.kraus
    gram = np.einsum("kba,kbc->ac", K.conj(), K)
    tp = float(np.linalg.norm(gram - np.eye(T.d_in)))
    cp = float(herm_eigvals(jamiolkowski(T).matrix)[0])
    return ValidationReport(cp_margin=cp, tp_residual=tp)


def require_valid(T: QuantumChannel) -> QuantumChannel:
    report = validate(T)
    if not report.ok:
        raise ChannelError(report.describe())
    return T


# --- JSON interchange -------------------------------------------------------


def _encode_matrix(A: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def _decode_matrix(rows) -> np.ndarray:
    try:
        return np.array([[complex(float(re), float(im)) for re, im in row] for row in rows], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ChannelError(f"malformed matrix entry: {exc}") from exc


def channel_to_dict(T: QuantumChannel) -> dict:
    return {"d_in": T.d_in, "d_out": T.d_out, "kraus": [_encode_matrix(A) for A in T.kraus]}


def channel_from_dict(data: dict) -> QuantumChannel:
    try:
        d_in, d_out, kraus = int(data["d_in"]), int(data["d_out"]), data["kraus"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelError(f"channel object needs integer d_in, d_out and a kraus list: {exc}") from exc
    if not isinstance(kraus, list):
        raise ChannelError("'kraus' must be a list of matrices")
    T = QuantumChannel([_decode_matrix(m) for m in kraus])
    if (T.d_out, T.d_in) != (d_out, d_in):
        raise ChannelError(f"declared dimensions {(d_out, d_in)} disagree with Kraus shape {(T.d_out, T.d_in)}")
    return T


def dumps_channel(T: QuantumChannel) -> str:
    # float repr is the shortest string that round-trips bit-exactly
    return json.dumps(channel_to_dict(T))


def loads_channel(text: str) -> QuantumChannel:
    return channel_from_dict(json.loads(text))


def save_channel(T: QuantumChannel, path) -> None:
    Path(path).write_text(dumps_channel(T) + "\n", encoding="utf-8")


def load_channel(path) -> QuantumChannel:
    return loads_channel(Path(path).read_text(encoding="utf-8"))
