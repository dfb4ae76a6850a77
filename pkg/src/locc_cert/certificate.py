"""Non-commutation certificates and the range(Q) falsification harness.

For a rank-one separable measurement with product vectors
``w_i = a_i (x) conj(b_i)`` let ``K_i = Q w_i w_i^* Q``.  A perfectly
distinguishable basis of range(Q), completed by the maximally entangled
vector, would diagonalize every ``K_i`` at once, so all of them would
commute.  For ``n >= 3`` some pair never does; :func:`find_noncommuting_pair`
exhibits it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bipartite import Q_projector, as_rows, maxent_vector, random_Q_basis
from .linalg import DEFAULT_TOL, ToleranceConfig, frob
from .measurement import (
    Partition,
    RankOneSeparableMeasurement,
    best_partition,
    check_perfect,
    overlap_matrix,
    sample_one_round_measurement,
)
from .parallel import thread_cap
from .serialize import encode_complex

CERT_THRESHOLD = 1e-6


class NoCertificateError(RuntimeError):
    def __init__(self, max_value: float):
        self.max_value = max_value
        super().__init__(f"no pair with normalized commutator above threshold (max {max_value:.3e})")


@dataclass(frozen=True)
class Certificate:
    i: int
    j: int
    alpha_ij: complex
    commutator_norm: float

    def to_json(self) -> dict:
        return {"i": self.i, "j": self.j, "alpha": encode_complex(self.alpha_ij), "commutator_norm": self.commutator_norm}


@dataclass(frozen=True)
class IdentityReport:
    sum_sq_overlaps: float
    map_residual: float
    n: int
    violation: bool

    def to_json(self) -> dict:
        return {
            "sum_sq_overlaps": self.sum_sq_overlaps,
            "map_residual": self.map_residual,
            "n": self.n,
            "violation": self.violation,
        }


def alpha_scalar(a_i, b_i, a_j, b_j, n: int) -> complex:
    """``<a_i,a_j><b_j,b_i> - <a_i,b_i><b_j,a_j>/n`` with ``<x,y> = x^* y``."""
    ip = np.vdot
    return ip(a_i, a_j) * ip(b_j, b_i) - ip(a_i, b_i) * ip(b_j, a_j) / n


def alpha(m: RankOneSeparableMeasurement, i: int, j: int) -> complex:
    N = len(m)
    if not (0 <= i < N and 0 <= j < N):
        raise IndexError(f"outcome index out of range for {N} outcomes")
    return complex(alpha_scalar(m.alice[i], m.bob[i], m.alice[j], m.bob[j], m.n))


def alpha_matrix_form(m: RankOneSeparableMeasurement, i: int, j: int) -> complex:
    W = m.product_vectors()
    return complex(W[i].conj() @ Q_projector(m.n) @ W[j])


def identity_report(m: RankOneSeparableMeasurement, tol: ToleranceConfig = DEFAULT_TOL) -> IdentityReport:
    """Check ``sum_i <a_i,b_i> a_i b_i^* = I`` and its trace ``sum_i |<a_i,b_i>|^2 = n``."""
    n = m.n
    overlaps = np.einsum("ia,ia->i", m.alice.conj(), m.bob)
    M = np.einsum("i,ia,ib->ab", overlaps, m.alice, m.bob.conj())
    total = float(np.sum(np.abs(overlaps) ** 2))
    resid = frob(M - np.eye(n))
    return IdentityReport(
        sum_sq_overlaps=total,
        map_residual=resid,
        n=n,
        violation=bool(abs(total - n) >= 1e-8 or resid >= tol.equality_atol),
    )


def compressed_operators(m: RankOneSeparableMeasurement) -> np.ndarray:
    """``K_i = Q (a_i a_i^* (x) conj(b_i) b_i^T) Q`` for every outcome."""
    Q = Q_projector(m.n)
    return np.einsum("ab,ibc,cd->iad", Q, m.operators(), Q)


def commutator_norms(m: RankOneSeparableMeasurement) -> np.ndarray:
    """``||K_i K_j - K_j K_i||_F / (||K_i||_F ||K_j||_F)``; zero on the diagonal."""
    K = compressed_operators(m)
    prod = np.einsum("iab,jbc->ijac", K, K)
    comm = prod - prod.transpose(1, 0, 2, 3)
    num = np.linalg.norm(comm, axis=(2, 3))
    norms = np.linalg.norm(K, axis=(1, 2))
    den = np.outer(norms, norms)
    out = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    np.fill_diagonal(out, 0.0)
    return out


def pairwise_independent(m: RankOneSeparableMeasurement, rtol: float) -> bool:
    W = m.product_vectors()
    G = W.conj() @ W.T
    d = G.diagonal().real
    lam_max = (d[:, None] + d[None, :]) / 2 + np.sqrt(((d[:, None] - d[None, :]) / 2) ** 2 + np.abs(G) ** 2)
    det = np.clip(d[:, None] * d[None, :] - np.abs(G) ** 2, 0.0, None)
    lam_min = np.divide(det, lam_max, out=np.zeros_like(det), where=lam_max > 0)
    ratio = np.sqrt(np.divide(lam_min, lam_max, out=np.zeros_like(det), where=lam_max > 0))
    np.fill_diagonal(ratio, np.inf)
    return bool(ratio.min() >= rtol)


def find_noncommuting_pair(
    m: RankOneSeparableMeasurement,
    tol: ToleranceConfig = DEFAULT_TOL,
    threshold: float = CERT_THRESHOLD,
) -> Certificate:
    """Scan all outcome pairs and return the one with the largest normalized commutator.

    Requires ``n >= 3`` and pairwise linearly independent product vectors
    (run :func:`merge_proportional` first).
    """
    if m.n < 3:
        raise ValueError("non-commutation certificate requires n >= 3")
    if len(m) < 2:
        raise NoCertificateError(0.0)
    if not pairwise_independent(m, tol.independence_rtol):
        raise ValueError("product vectors are not pairwise independent; merge proportional outcomes first")
    norms = commutator_norms(m)
    i, j = np.unravel_index(int(np.argmax(norms)), norms.shape)
    i, j = int(min(i, j)), int(max(i, j))
    best = float(norms[i, j])
    if not best > threshold:
        raise NoCertificateError(best)
    return Certificate(i=i, j=j, alpha_ij=alpha(m, i, j), commutator_norm=best)


@dataclass(frozen=True, eq=False)
class DiagonalizationReport:
    """How far the completed basis ``{u_1..u_m, v}`` is from diagonalizing each ``K_i``.

    ``offdiag[i]`` is the largest ``|u_k^* K_i u_l|`` over ``k != l``;
    ``v_entries[i]`` the largest entry in the row/column of ``v``;
    ``orthogonality[i]`` the largest ``|<u_k, w_i>|`` over classes ``k`` not
    containing ``i``.  A perfect measurement would make all three vanish.
    """

    offdiag: np.ndarray
    v_entries: np.ndarray
    orthogonality: np.ndarray
    product_norms: np.ndarray

    @property
    def max_offdiag(self) -> float:
        return float(self.offdiag.max(initial=0.0))

    @property
    def max_v_entry(self) -> float:
        return float(self.v_entries.max(initial=0.0))


def diagonalization_report(
    basis, m: RankOneSeparableMeasurement, p: Partition, tol: ToleranceConfig = DEFAULT_TOL
) -> DiagonalizationReport:
    U = as_rows(basis)
    n = m.n
    if U.shape[1] != n * n:
        raise ValueError("basis dimension does not match the measurement")
    Q = Q_projector(n)
    if frob(U @ Q.T - U) >= tol.equality_atol:
        raise ValueError("basis vectors are not inside range(Q)")
    if len(p) != U.shape[0] or p.n_outcomes != len(m):
        raise ValueError("partition does not match basis and measurement")
    F = np.vstack([U, maxent_vector(n)])
    K = compressed_operators(m)
    G = np.einsum("ka,iab,lb->ikl", F.conj(), K, F)
    mu = U.shape[0]
    off = np.abs(G[:, :mu, :mu])
    off[:, np.arange(mu), np.arange(mu)] = 0.0
    v_entries = np.maximum(np.abs(G[:, mu, :]).max(axis=1), np.abs(G[:, :, mu]).max(axis=1))
    W = m.product_vectors()
    ov = np.abs(U.conj() @ W.T)  # (mu, N)
    outside = p.indicator().T == 0
    orth = np.where(outside, ov, 0.0).max(axis=0)
    return DiagonalizationReport(
        offdiag=off.reshape(len(m), -1).max(axis=1),
        v_entries=v_entries,
        orthogonality=orth,
        product_norms=np.linalg.norm(W, axis=1),
    )


@dataclass(frozen=True)
class HarnessRecord:
    basis_seed: int | None
    measurement_seed: int | None
    min_diagonal: float
    mean_diagonal: float
    perfect: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class HarnessSummary:
    n: int
    samples: int
    perfect_hits: int
    min_best_diagonal: float
    max_best_diagonal: float
    records: list = field(default_factory=list, repr=False)

    def to_json(self, with_records: bool = True) -> dict:
        out = {
            "n": self.n,
            "samples": self.samples,
            "perfect_hits": self.perfect_hits,
            "min_best_diagonal": self.min_best_diagonal,
            "max_best_diagonal": self.max_best_diagonal,
        }
        if with_records:
            out["records"] = [r.to_json() for r in self.records]
        return out


def _evaluate(basis, meas, tol, cap, basis_seed=None, measurement_seed=None) -> HarnessRecord:
    p = best_partition(overlap_matrix(basis, meas), cap)
    rep = check_perfect(basis, meas, p, tol)
    return HarnessRecord(basis_seed, measurement_seed, rep.min_diagonal, rep.mean_diagonal, rep.perfect)


def _summarize(n, records) -> HarnessSummary:
    mins = [r.min_diagonal for r in records]
    return HarnessSummary(
        n=n,
        samples=len(records),
        perfect_hits=sum(r.perfect for r in records),
        min_best_diagonal=float(min(mins)) if mins else float("nan"),
        max_best_diagonal=float(max(mins)) if mins else float("nan"),
        records=records,
    )


def harness_on_basis(basis, measurements, tol: ToleranceConfig = DEFAULT_TOL, cap: int = 10**6) -> HarnessSummary:
    """Control mode: run the perfect-distinguishability check for an arbitrary basis.

    No theorem is assumed here, so perfect hits are allowed and merely counted.
    """
    U = as_rows(basis)
    n = int(round(np.sqrt(U.shape[1])))
    records = [_evaluate(U, meas, tol, cap) for meas in measurements]
    return _summarize(n, records)


def theorem_harness(
    n: int,
    basis_seeds,
    measurement_seeds,
    tol: ToleranceConfig = DEFAULT_TOL,
    cap: int = 10**6,
    threads: int | None = None,
) -> HarnessSummary:
    """Try every (random basis of range(Q), sampled one-round measurement) combination.

    Partitions are exhaustive when ``m^N <= cap`` and greedy otherwise.  Any
    perfect hit would contradict the impossibility result and signals a bug;
    it is counted in ``perfect_hits`` rather than raised.
    """
    if n < 3:
        raise ValueError("range(Q) has no distinguishable basis only for n >= 3; use harness_on_basis for controls")
    basis_seeds = list(basis_seeds)
    measurement_seeds = list(measurement_seeds)
    measurements = [sample_one_round_measurement(n, s) for s in measurement_seeds]

    def run(bseed):
        U = random_Q_basis(n, bseed)
        return [_evaluate(U, meas, tol, cap, bseed, mseed) for mseed, meas in zip(measurement_seeds, measurements)]

    workers = thread_cap() if threads is None else max(1, threads)
    if workers == 1:
        chunks = [run(b) for b in basis_seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(run, basis_seeds))
    return _summarize(n, [r for chunk in chunks for r in chunk])
