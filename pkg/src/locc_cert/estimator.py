"""Stochastic search over one-round LOCC measurements.

Every candidate is a conditional local measurement (Alice measures a basis,
Bob measures a basis chosen from her outcome), so each reported success
probability is achievable by LOCC and is a lower bound on the optimum.
Partitions are the greedy argmax assignment, which is optimal for the mean
success probability of a fixed measurement.

Candidates alternate between two proposal families.  Even trials are
"adapted": Alice diagonalizes a randomly weighted mixture of the basis
states' reductions, and Bob does the same for his conditional states.  Odd
trials are Haar random.  Every trial that sets a new record is hill-climbed
by small random rotations of Alice's basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .bipartite import as_rows
from .linalg import DEFAULT_TOL, ToleranceConfig, is_orthonormal, random_unitary
from .measurement import (
    Partition,
    RankOneSeparableMeasurement,
    check_perfect,
    greedy_partition,
    one_round_measurement,
    overlap_matrix,
)


@dataclass(frozen=True)
class SearchConfig:
    refine_steps: int = 200
    step_size: float = 0.05
    cooling: float = 0.9
    cool_every: int = 20


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_probability: float
    best_measurement: RankOneSeparableMeasurement
    best_partition: Partition
    trials: int
    seed: int

    def to_json(self) -> dict:
        return {
            "best_probability": self.best_probability,
            "trials": self.trials,
            "seed": self.seed,
            "best_measurement": self.best_measurement.to_json(),
            "best_partition": self.best_partition.to_json(),
        }


def success_probability(U: np.ndarray, m: RankOneSeparableMeasurement) -> tuple[float, Partition]:
    O = overlap_matrix(U, m)
    p = greedy_partition(O)
    return float(O.max(axis=0).sum() / U.shape[0]), p


def _random_hermitian(n: int, rng) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = (G + G.conj().T) / 2
    return H / np.linalg.norm(H, 2)


def _eigenbasis_rows(M) -> np.ndarray:
    _, V = np.linalg.eigh(M)
    return V.T


def _adapted(U: np.ndarray, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    C = U.reshape(-1, n, n)  # coefficient matrices
    w = rng.random(C.shape[0])
    rho_a = np.einsum("k,kab,kcb->ac", w, C, C.conj())
    A = _eigenbasis_rows(rho_a)
    Bs = []
    for a in A:
        # Bob's conditional (unnormalized) states (a^* (x) I) u_k = C_k^T conj(a)
        psi = np.einsum("kab,a->kb", C, a.conj())
        w2 = rng.random(C.shape[0])
        Bs.append(_eigenbasis_rows(np.einsum("k,ka,kb->ab", w2, psi, psi.conj())))
    return A, np.array(Bs)


def _haar(n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    A = random_unitary(n, rng).T
    Bs = np.array([random_unitary(n, rng).T for _ in range(n)])
    return A, Bs


def _refine(U, A, Bs, value, rng, cfg: SearchConfig):
    n = A.shape[0]
    step = cfg.step_size
    for k in range(cfg.refine_steps):
        if k and k % cfg.cool_every == 0:
            step *= cfg.cooling
        R = expm(1j * step * _random_hermitian(n, rng))
        A_new = A @ R.T
        cand, _ = success_probability(U, one_round_measurement(A_new, Bs))
        if cand > value:
            A, value = A_new, cand
    return A, value


def estimate_success(
    basis,
    trials: int,
    seed: int,
    config: SearchConfig = SearchConfig(),
    tol: ToleranceConfig = DEFAULT_TOL,
) -> SearchResult:
    """Best mean success probability found for distinguishing ``basis`` by one-round LOCC.

    Trial ``t`` draws from ``SeedSequence([seed, t])``, and each trial only
    depends on its own seed and the running best, so results are
    reproducible and nondecreasing in ``trials``.
    """
    U = as_rows(basis)
    if U.shape[0] == 0:
        raise ValueError("empty basis")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not is_orthonormal(U, tol.equality_atol):
        raise ValueError("basis is not orthonormal")
    n = math.isqrt(U.shape[1])
    if n * n != U.shape[1]:
        raise ValueError("basis vectors must live in C^n (x) C^n")

    best = (-1.0, None, None)
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        A, Bs = _adapted(U, n, rng) if t % 2 == 0 else _haar(n, rng)
        value, _ = success_probability(U, one_round_measurement(A, Bs))
        if value > best[0]:
            if config.refine_steps > 0:
                A, value = _refine(U, A, Bs, value, np.random.default_rng([seed, t, 1]), config)
            best = (value, A, Bs)
    _, A, Bs = best
    meas = one_round_measurement(A, Bs)
    _, part = success_probability(U, meas)
    # report the value recomputed from the stored measurement
    rep = check_perfect(U, meas, part, tol)
    return SearchResult(
        best_probability=float(min(1.0, rep.mean_diagonal)),
        best_measurement=meas,
        best_partition=part,
        trials=trials,
        seed=seed,
    )
