"""Channels built from isometries into output (x) environment.

A realization is an isometry ``U: C^dX -> C^nA (x) C^nB`` with
``Phi(X) = tr_B U X U^*``.  The counterexample channel sends the standard
basis of ``C^(n^2-1)`` onto an orthonormal basis of range(Q), so every
orthonormal input basis lands on a basis of range(Q).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bipartite import Q_projector, as_rows, gen_Q_basis, random_Q_basis
from .linalg import DEFAULT_TOL, ToleranceConfig, frob, orthonormal_complete, partial_trace_B
from .measurement import (
    DistinguishabilityReport,
    Partition,
    RankOneSeparableMeasurement,
    check_perfect,
    greedy_partition,
    overlap_matrix,
    sample_one_round_measurement,
)
from .serialize import decode_matrix, encode_matrix

CHOI_AGREEMENT = 1e-10
SAME_CHANNEL = 1e-8
RECOVERY_RESIDUAL = 1e-8


class ChannelMismatch(ValueError):
    pass


class RecoveryError(RuntimeError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"environment unitary recovery failed (residual {residual:.3e})")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    U: np.ndarray
    d_X: int
    n_A: int
    n_B: int

    def __post_init__(self):
        U = np.asarray(self.U, dtype=complex)
        if U.shape != (self.n_A * self.n_B, self.d_X):
            raise ValueError(f"isometry has shape {U.shape}, expected {(self.n_A * self.n_B, self.d_X)}")
        if frob(U.conj().T @ U - np.eye(self.d_X)) >= DEFAULT_TOL.equality_atol:
            raise ValueError("U is not an isometry")
        object.__setattr__(self, "U", U)

    @classmethod
    def from_isometry(cls, U, n_A: int, n_B: int) -> ChannelRealization:
        U = np.asarray(U, dtype=complex)
        return cls(U, U.shape[1], n_A, n_B)

    def rotate_environment(self, W) -> ChannelRealization:
        """Realization ``(I (x) W) U`` of the same channel."""
        return ChannelRealization(np.kron(np.eye(self.n_A), W) @ self.U, self.d_X, self.n_A, self.n_B)

    def to_json(self) -> dict:
        return {"dX": self.d_X, "nA": self.n_A, "nB": self.n_B, "U": encode_matrix(self.U)}

    @classmethod
    def from_json(cls, obj) -> ChannelRealization:
        try:
            return cls(decode_matrix(obj["U"]), int(obj["dX"]), int(obj["nA"]), int(obj["nB"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed realization: {exc}") from None


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    J: np.ndarray

    def is_hermitian(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return frob(self.J - self.J.conj().T) < tol.equality_atol

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.J + self.J.conj().T) / 2).min())

    def is_psd(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return self.is_hermitian(tol) and self.min_eigenvalue() >= tol.psd_eig_floor

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.J))

    def to_json(self) -> dict:
        return {"J": encode_matrix(self.J)}


def build_counterexample_channel(n: int, basis="canonical") -> ChannelRealization:
    """Isometry whose columns are an orthonormal basis of range(Q).

    ``basis`` is ``"canonical"`` for :func:`gen_Q_basis` or an integer seed
    for :func:`random_Q_basis`.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if n == 2:
        warnings.warn("n = 2: the channel exists but is not a counterexample (that needs n >= 3)", stacklevel=2)
    if isinstance(basis, str):
        if basis != "canonical":
            raise ValueError(f"unknown basis choice {basis!r}")
        rows = gen_Q_basis(n)
    else:
        rows = random_Q_basis(n, basis)
    return ChannelRealization(rows.T.copy(), n * n - 1, n, n)


def apply_channel(r: ChannelRealization, X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.shape != (r.d_X, r.d_X):
        raise ValueError(f"input of shape {X.shape} does not match d_X = {r.d_X}")
    return partial_trace_B(r.U @ X @ r.U.conj().T, r.n_A, r.n_B)


def choi_sum_formula(r: ChannelRealization) -> np.ndarray:
    """``J = sum_ij Phi(E_ij) (x) E_ij`` evaluated one matrix unit at a time."""
    d = r.d_X
    J = np.zeros((r.n_A * d, r.n_A * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = 1.0
            J += np.kron(apply_channel(r, E), E)
    return J


def choi_purification(r: ChannelRealization) -> np.ndarray:
    """``J = tr_Z vec(U) vec(U)^*`` with ``vec(U)`` in output (x) environment (x) input."""
    a = r.U.reshape(r.n_A, r.n_B, r.d_X)
    J = np.einsum("yzx,wzv->yxwv", a, a.conj())
    d = r.n_A * r.d_X
    return J.reshape(d, d)


def choi(r: ChannelRealization) -> ChoiMatrix:
    J1 = choi_sum_formula(r)
    J2 = choi_purification(r)
    gap = frob(J1 - J2)
    if gap >= CHOI_AGREEMENT:
        raise RuntimeError(f"Choi formulas disagree by {gap:.3e}")
    return ChoiMatrix(J1)


def _environment_map(r: ChannelRealization) -> np.ndarray:
    """Reindex ``U`` as ``K[z, (y, x)] = U[(y, z), x]``, so ``(I (x) W) U`` becomes ``W K``."""
    return r.U.reshape(r.n_A, r.n_B, r.d_X).transpose(1, 0, 2).reshape(r.n_B, r.n_A * r.d_X)


def recover_environment_unitary(A: ChannelRealization, B: ChannelRealization, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Unitary ``W`` on the environment with ``A = (I (x) W) B``.

    Solved on range(K_B) by least squares, then completed unitarily on the
    orthocomplement (deterministic but not unique there).
    """
    if (A.d_X, A.n_A, A.n_B) != (B.d_X, B.n_A, B.n_B):
        raise ValueError("realizations have different dimensions")
    gap = frob(choi_purification(A) - choi_purification(B))
    if gap >= SAME_CHANNEL:
        raise ChannelMismatch(f"realizations describe different channels (Choi gap {gap:.3e})")
    KA, KB = _environment_map(A), _environment_map(B)
    Ub, s, Vh = np.linalg.svd(KB, full_matrices=False)
    rank = int(np.sum(s > tol.independence_rtol * s[0])) if s.size and s[0] > 0 else 0
    # K_A = W K_B  =>  W restricted to range(K_B) is K_A V S^-1 U_b^*
    images = KA @ Vh[:rank].conj().T / s[:rank]
    W = images @ Ub[:, :rank].conj().T
    if rank < A.n_B:
        src = orthonormal_complete(Ub[:, :rank].T, A.n_B, tol)[rank:]
        # the images are orthonormal up to roundoff; QR keeps the completion well posed
        q, _ = np.linalg.qr(images)
        dst = orthonormal_complete(q.T, A.n_B, tol)[rank:]
        W = W + dst.T @ src.conj()
    residual = frob(A.U - np.kron(np.eye(A.n_A), W) @ B.U)
    unitarity = frob(W.conj().T @ W - np.eye(A.n_B))
    if residual >= RECOVERY_RESIDUAL or unitarity >= RECOVERY_RESIDUAL:
        raise RecoveryError(max(residual, unitarity))
    return W


def lift_basis(r: ChannelRealization, input_basis) -> np.ndarray:
    X = as_rows(input_basis)
    if X.shape[1] != r.d_X:
        raise ValueError(f"input basis vectors have dimension {X.shape[1]}, expected {r.d_X}")
    return X @ r.U.T


def corrected_capacity_witness(
    r: ChannelRealization,
    input_basis,
    m: RankOneSeparableMeasurement,
    p: Partition,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> DistinguishabilityReport:
    """Check whether ``m`` with partition ``p`` perfectly distinguishes ``{U x_i}``."""
    X = as_rows(input_basis)
    if frob(X.conj() @ X.T - np.eye(X.shape[0])) >= tol.equality_atol:
        raise ValueError("input basis is not orthonormal")
    return check_perfect(lift_basis(r, X), m, p, tol)


@dataclass(frozen=True)
class WitnessSweep:
    samples: int
    perfect_hits: int
    best_min_diagonal: float
    best_mean_diagonal: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def witness_sweep(r: ChannelRealization, input_basis, measurement_seeds, tol: ToleranceConfig = DEFAULT_TOL) -> WitnessSweep:
    """Sampled one-round measurements with greedy partitions against the lifted basis."""
    if r.n_A != r.n_B:
        raise ValueError("sampled measurements need n_A == n_B")
    lifted = lift_basis(r, input_basis)
    hits, best_min, best_mean, count = 0, 0.0, 0.0, 0
    for seed in measurement_seeds:
        m = sample_one_round_measurement(r.n_A, seed)
        p = greedy_partition(overlap_matrix(lifted, m))
        rep = corrected_capacity_witness(r, input_basis, m, p, tol)
        hits += rep.perfect
        best_min = max(best_min, rep.min_diagonal)
        best_mean = max(best_mean, rep.mean_diagonal)
        count += 1
    return WitnessSweep(count, hits, best_min, best_mean)


def in_Q(r: ChannelRealization) -> float:
    """``||Q U - U||_F``; zero when the range of ``U`` lies in range(Q)."""
    if r.n_A != r.n_B:
        raise ValueError("range(Q) needs n_A == n_B")
    return frob(Q_projector(r.n_A) @ r.U - r.U)
