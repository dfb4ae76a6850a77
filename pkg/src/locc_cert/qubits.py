"""Distinguishable bases for subspaces of C^2 (x) C^2.

Every subspace of two qubits has a basis that LOCC can perfectly
distinguish.  The only nontrivial case is dimension 3: if ``u`` spans the
complement and ``u = s1 x1(x)y1 + s2 x2(x)y2``, then ``x1(x)y2`` and
``x2(x)y1`` are orthogonal to ``u`` and to each other, and a third vector
completes them to a basis with two product members.  The distinguishing
protocol for such sets is not implemented; only that structural hypothesis
is checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DEFAULT_TOL, ToleranceConfig, frob, is_orthonormal, orthonormal_complete, schmidt_coefficients, schmidt_decompose
from .serialize import encode_vector

PRODUCT_THRESHOLD = 1e-10


def is_product(u, threshold: float = PRODUCT_THRESHOLD) -> bool:
    s = schmidt_coefficients(u, (2, 2))
    return bool(s[1] < threshold)


@dataclass(frozen=True, eq=False)
class TaggedBasis:
    vectors: np.ndarray
    product_flags: tuple[bool, ...]

    def to_json(self) -> dict:
        return {
            "vectors": [encode_vector(v) for v in self.vectors],
            "product_flags": list(self.product_flags),
        }


def _tag(vectors) -> TaggedBasis:
    V = np.asarray(vectors, dtype=complex).reshape(-1, 4)
    return TaggedBasis(V, tuple(is_product(v) for v in V))


def _as_subspace(subspace, tol) -> np.ndarray:
    S = np.asarray(subspace, dtype=complex)
    if S.size == 0:
        return np.zeros((0, 4), dtype=complex)
    S = np.atleast_2d(S)
    if S.shape[1] != 4:
        raise ValueError(f"vectors must live in C^2 (x) C^2 (dimension 4), got {S.shape[1]}")
    if S.shape[0] > 4:
        raise ValueError("more than 4 vectors in a 4-dimensional space")
    if not is_orthonormal(S, tol.equality_atol):
        raise ValueError("input vectors are not orthonormal")
    return S


def distinguishable_basis_2x2(subspace, tol: ToleranceConfig = DEFAULT_TOL) -> TaggedBasis:
    S = _as_subspace(subspace, tol)
    m = S.shape[0]
    if m <= 2:
        return _tag(S)
    if m == 4:
        return _tag(np.eye(4, dtype=complex))
    u = orthonormal_complete(S, 4, tol)[3]
    _, X, Y = schmidt_decompose(u, (2, 2), tol)
    p1 = np.kron(X[0], Y[1])
    p2 = np.kron(X[1], Y[0])
    v = orthonormal_complete(np.array([u, p1, p2]), 4, tol)[3]
    return _tag(np.array([v, p1, p2]))


@dataclass(frozen=True)
class ConstructionReport:
    orthonormality_residual: float
    span_residual: float
    product_count: int
    product_check: bool | None  # None when not applicable (m != 3)
    ok: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def verify_construction(subspace, basis: TaggedBasis, tol: ToleranceConfig = DEFAULT_TOL) -> ConstructionReport:
    S = np.asarray(subspace, dtype=complex).reshape(-1, 4)
    B = np.asarray(basis.vectors, dtype=complex).reshape(-1, 4)
    m = B.shape[0]
    orth = frob(B.conj() @ B.T - np.eye(m)) if m else 0.0
    if S.shape[0] != m:
        span = float("inf")
    elif m == 0:
        span = 0.0
    else:
        # each input vector must be reproduced by its projection onto the output span
        proj = (S @ B.T.conj()) @ B
        span = frob(proj - S)
    count = sum(is_product(v) for v in B)
    product_check = count >= 2 if m == 3 else None
    ok = orth < tol.equality_atol and span < tol.equality_atol and product_check is not False
    return ConstructionReport(orth, span, count, product_check, bool(ok))
