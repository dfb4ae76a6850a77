"""Dense complex linear algebra and the vec calculus.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  The vec map is
row-major: ``vec(E_ij) = e_i (x) e_j``, so ``vec(M)[i*m + j] == M[i, j]`` and

    (A (x) B^T) vec(X) == vec(A X B).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by every module.

    ``equality_atol`` is on the Frobenius-norm scale, ``independence_rtol``
    is a ratio of singular values, and ``psd_eig_floor`` is the smallest
    eigenvalue still accepted as positive semidefinite.
    """

    equality_atol: float = 1e-9
    independence_rtol: float = 1e-8
    psd_eig_floor: float = -1e-10

    def __post_init__(self):
        for name in ("equality_atol", "independence_rtol", "psd_eig_floor"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.equality_atol <= 0:
            raise ValueError("equality_atol must be positive")
        if self.independence_rtol < 0:
            raise ValueError("independence_rtol must be nonnegative")


DEFAULT_TOL = ToleranceConfig()


def unit_vector(i: int, dim: int) -> np.ndarray:
    """Standard basis vector ``e_i`` (0-based)."""
    if not 0 <= i < dim:
        raise IndexError(f"index {i} out of range for dimension {dim}")
    e = np.zeros(dim, dtype=complex)
    e[i] = 1.0
    return e


def matrix_unit(i: int, j: int, n: int, m: int | None = None) -> np.ndarray:
    """Matrix unit ``E_ij = e_i e_j^*`` of shape ``(n, m)``."""
    m = n if m is None else m
    return np.outer(unit_vector(i, n), unit_vector(j, m).conj())


def vec(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"vec expects a matrix, got shape {M.shape}")
    return M.reshape(-1).copy()


def unvec(v, n: int, m: int) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size != n * m:
        raise ValueError(f"cannot reshape vector of shape {v.shape} into {n}x{m}")
    return v.reshape(n, m).copy()


def frob(M) -> float:
    return float(np.linalg.norm(M))


def _normalize_phase(x: np.ndarray, atol: float) -> complex:
    """Phase ``p`` with ``|p| = 1`` making the first entry of ``x`` above ``atol`` real positive."""
    big = np.flatnonzero(np.abs(x) > atol)
    if big.size == 0:
        return 1.0 + 0j
    z = x[big[0]]
    return np.conj(z) / abs(z)


def schmidt_decompose(u, dims: tuple[int, int] | None = None, tol: ToleranceConfig = DEFAULT_TOL):
    """Schmidt decomposition ``u = sum_k s_k x_k (x) y_k``.

    Returns ``(s, X, Y)`` where ``s`` is descending, and the rows of ``X``
    and ``Y`` are the left and right Schmidt vectors.  Each left vector has
    its first significant entry real positive; right vectors belonging to a
    vanishing coefficient are normalized the same way.  Within a group of
    equal coefficients the left vectors are sorted lexicographically
    (descending) by their real and imaginary parts.
    """
    u = np.asarray(u, dtype=complex).reshape(-1)
    if dims is None:
        n = math.isqrt(u.size)
        if n * n != u.size:
            raise ValueError("dims required for a non-square bipartite vector")
        dims = (n, n)
    n_a, n_b = dims
    if not np.any(np.abs(u) > 0):
        raise ValueError("cannot Schmidt-decompose the zero vector")
    C = unvec(u, n_a, n_b)
    U, s, Vh = np.linalg.svd(C)
    k = min(n_a, n_b)
    X = U[:, :k].T.copy()
    Y = Vh[:k, :].copy()
    atol = tol.equality_atol
    for r in range(k):
        p = _normalize_phase(X[r], atol)
        X[r] *= p
        if s[r] > atol:
            Y[r] *= np.conj(p)
        else:
            Y[r] *= _normalize_phase(Y[r], atol)

    # canonical order inside degenerate blocks
    order = []
    start = 0
    while start < k:
        stop = start + 1
        while stop < k and abs(s[stop] - s[start]) <= atol:
            stop += 1
        block = list(range(start, stop))
        block.sort(
            key=lambda r: tuple(np.round(np.column_stack([X[r].real, X[r].imag]).ravel(), 12)),
            reverse=True,
        )
        order.extend(block)
        start = stop
    return s[:k].copy(), X[order], Y[order]


def schmidt_coefficients(u, dims: tuple[int, int] | None = None) -> np.ndarray:
    u = np.asarray(u, dtype=complex).reshape(-1)
    if dims is None:
        n = math.isqrt(u.size)
        dims = (n, n)
    return np.linalg.svd(unvec(u, *dims), compute_uv=False)


def partial_trace_B(M, n_a: int, n_b: int) -> np.ndarray:
    """Trace out the second tensor factor of an operator on ``C^n_a (x) C^n_b``."""
    M = np.asarray(M, dtype=complex)
    d = n_a * n_b
    if M.shape != (d, d):
        raise ValueError(f"operator of shape {M.shape} does not act on {n_a}x{n_b}")
    return np.einsum("ijkj->ik", M.reshape(n_a, n_b, n_a, n_b))


def gram(vectors) -> np.ndarray:
    V = np.asarray(vectors, dtype=complex)
    return V.conj() @ V.T


def is_orthonormal(vectors, atol: float) -> bool:
    V = np.asarray(vectors, dtype=complex)
    if V.shape[0] == 0:
        return True
    return frob(gram(V) - np.eye(V.shape[0])) < atol


def orthonormal_complete(S, dim: int, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Extend the orthonormal rows of ``S`` to an orthonormal basis of ``C^dim``.

    New vectors come from Gram-Schmidt over the standard basis, always taking
    the candidate with the largest residual (lowest index on ties), so the
    output is deterministic.
    """
    S = np.asarray(S, dtype=complex).reshape(-1, dim) if np.size(S) else np.zeros((0, dim), complex)
    if S.shape[0] > dim:
        raise ValueError("more vectors than the dimension")
    if not is_orthonormal(S, tol.equality_atol):
        raise ValueError("input vectors are not orthonormal")
    basis = [row for row in S]
    candidates = np.eye(dim, dtype=complex)
    while len(basis) < dim:
        B = np.array(basis).reshape(-1, dim)
        # two passes of projection for stability
        R = candidates - (candidates @ B.T.conj()) @ B
        R = R - (R @ B.T.conj()) @ B
        norms = np.linalg.norm(R, axis=1)
        best = int(np.argmax(np.round(norms, 12)))
        basis.append(R[best] / norms[best])
    return np.array(basis)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    diag = np.diag(R)
    return Qm * (diag / np.abs(diag))


def random_isometry(d_out: int, d_in: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(d_out, rng)[:, :d_in]


def random_psd(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    return G @ G.conj().T


def singular_rank(M, rtol: float) -> int:
    s = np.linalg.svd(np.atleast_2d(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))
