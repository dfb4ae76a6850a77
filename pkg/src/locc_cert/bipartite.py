"""Maximally entangled state, the projectors P and Q, and bases of range(Q)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, ToleranceConfig, random_unitary, schmidt_coefficients, unvec, vec
from .serialize import decode_matrix, encode_matrix


@dataclass(frozen=True)
class BipartiteSpace:
    n_A: int
    n_B: int

    def __post_init__(self):
        if self.n_A < 1 or self.n_B < 1:
            raise ValueError("local dimensions must be positive")

    @property
    def dim(self) -> int:
        return self.n_A * self.n_B

    def require_square(self) -> int:
        if self.n_A != self.n_B:
            raise ValueError(f"construction needs n_A == n_B, got {self.n_A}, {self.n_B}")
        return self.n_A


@dataclass(frozen=True, eq=False)
class BipartiteVector:
    """A vector of ``C^n_A (x) C^n_B`` held as its coefficient matrix (``u = vec(coeff)``)."""

    coeff: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=complex)
        if c.ndim != 2:
            raise ValueError("coefficient matrix must be 2-dimensional")
        object.__setattr__(self, "coeff", c)

    @classmethod
    def from_vector(cls, u, n_A: int, n_B: int | None = None) -> BipartiteVector:
        return cls(unvec(u, n_A, n_A if n_B is None else n_B))

    @property
    def space(self) -> BipartiteSpace:
        return BipartiteSpace(*self.coeff.shape)

    @property
    def vector(self) -> np.ndarray:
        return vec(self.coeff)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeff))

    def is_state(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        return abs(self.norm() - 1.0) < tol.equality_atol

    def schmidt_rank(self, tol: ToleranceConfig = DEFAULT_TOL) -> int:
        s = schmidt_coefficients(self.vector, self.coeff.shape)
        return int(np.sum(s > tol.independence_rtol * s[0])) if s[0] > 0 else 0

    def to_json(self) -> dict:
        return {"nA": self.coeff.shape[0], "nB": self.coeff.shape[1], "coeff": encode_matrix(self.coeff)}

    @classmethod
    def from_json(cls, obj) -> BipartiteVector:
        c = decode_matrix(obj["coeff"])
        if c.shape != (int(obj["nA"]), int(obj["nB"])):
            raise ValueError("coefficient matrix does not match declared dimensions")
        return cls(c)


def as_vector(u) -> np.ndarray:
    if isinstance(u, BipartiteVector):
        return u.vector
    return np.asarray(u, dtype=complex).reshape(-1)


def as_rows(basis) -> np.ndarray:
    """Stack a sequence of vectors (arrays or BipartiteVectors) as rows."""
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        return basis.astype(complex, copy=False)
    rows = [as_vector(u) for u in basis]
    if not rows:
        raise ValueError("empty collection of vectors")
    return np.array(rows)


def maxent_vector(n: int) -> np.ndarray:
    """``vec(I)/sqrt(n)``."""
    return vec(np.eye(n)) / math.sqrt(n)


@dataclass(frozen=True, eq=False)
class MaxEntProjectors:
    n: int
    P: np.ndarray
    Q: np.ndarray
    v: BipartiteVector


def make_projectors(n: int) -> MaxEntProjectors:
    if n < 1:
        raise ValueError("n must be at least 1")
    v = maxent_vector(n)
    P = np.outer(v, v.conj())
    Q = np.eye(n * n) - P
    return MaxEntProjectors(n=n, P=P, Q=Q, v=BipartiteVector.from_vector(v, n))


def Q_projector(n: int) -> np.ndarray:
    return make_projectors(n).Q


def traceless_matrix_basis(n: int) -> list[np.ndarray]:
    """Orthonormal basis of traceless n x n matrices.

    Off-diagonal units ``E_ij`` (row-major over i != j) come first, followed
    by the normalized diagonal combinations ``(E_11 + ... + E_kk - k E_{k+1,k+1}) / sqrt(k(k+1))``.
    """
    mats = []
    for i in range(n):
        for j in range(n):
            if i != j:
                E = np.zeros((n, n), dtype=complex)
                E[i, j] = 1.0
                mats.append(E)
    for k in range(1, n):
        D = np.zeros((n, n), dtype=complex)
        D[np.arange(k), np.arange(k)] = 1.0
        D[k, k] = -k
        mats.append(D / math.sqrt(k * (k + 1)))
    return mats


def gen_Q_basis(n: int) -> np.ndarray:
    """Canonical orthonormal basis of range(Q), one vector per row (shape ``(n^2-1, n^2)``)."""
    if n < 2:
        raise ValueError("range(Q) basis requires n >= 2")
    return np.array([vec(M) for M in traceless_matrix_basis(n)])


def random_Q_basis(n: int, seed) -> np.ndarray:
    """``gen_Q_basis(n)`` rotated by a seeded Haar-random unitary on range(Q)."""
    G = gen_Q_basis(n)
    R = random_unitary(G.shape[0], np.random.default_rng(seed))
    return R.T @ G
