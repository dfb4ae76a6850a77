"""Separable and rank-one separable measurements.

A rank-one separable measurement is stored as two arrays of row vectors
``a_i`` (Alice) and ``b_i`` (Bob).  Outcome ``i`` has POVM element

    a_i a_i^* (x) conj(b_i) b_i^T  ==  w_i w_i^*,   w_i = a_i (x) conj(b_i),

so Bob's factor uses the *conjugated* convention.  Acting on ``vec(M)`` the
element gives ``vec(a_i a_i^* M b_i b_i^*)``.  Mixing this up with the plain
``b b^*`` convention silently corrupts every alpha value downstream.

POVM weights live in the norms of ``a_i`` and ``b_i``.  Outcome indices are
0-based in Python and 1-based in JSON.
"""

from __future__ import annotations

import itertools
from dataclasses import InitVar, dataclass, field

import numpy as np

from .bipartite import as_rows
from .linalg import DEFAULT_TOL, ToleranceConfig, frob, random_unitary
from .serialize import decode_vector, encode_vector

EIG_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class RankOneSeparableMeasurement:
    alice: np.ndarray
    bob: np.ndarray
    check: InitVar[bool] = True
    tol: InitVar[ToleranceConfig] = DEFAULT_TOL

    def __post_init__(self, check, tol):
        a = np.atleast_2d(np.asarray(self.alice, dtype=complex))
        b = np.atleast_2d(np.asarray(self.bob, dtype=complex))
        if a.shape[0] == 0:
            raise ValueError("measurement needs at least one outcome")
        if a.shape != b.shape:
            raise ValueError(f"Alice/Bob vector arrays differ in shape: {a.shape} vs {b.shape}")
        object.__setattr__(self, "alice", a)
        object.__setattr__(self, "bob", b)
        if check:
            r = self.completeness_residual()
            if not r < tol.equality_atol:
                raise ValueError(f"elements do not sum to the identity (residual {r:.3e})")

    @classmethod
    def from_pairs(cls, pairs, **kwargs) -> RankOneSeparableMeasurement:
        pairs = list(pairs)
        if not pairs:
            raise ValueError("measurement needs at least one outcome")
        dims = {(len(a), len(b)) for a, b in pairs}
        if len(dims) != 1:
            raise ValueError(f"inconsistent pair dimensions {sorted(dims)}")
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]), **kwargs)

    @property
    def n(self) -> int:
        return self.alice.shape[1]

    @property
    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.alice, self.bob))

    def __len__(self) -> int:
        return self.alice.shape[0]

    def product_vectors(self) -> np.ndarray:
        """Rows ``w_i = a_i (x) conj(b_i)``."""
        return np.einsum("ia,ib->iab", self.alice, self.bob.conj()).reshape(len(self), -1)

    def operators(self) -> np.ndarray:
        W = self.product_vectors()
        return np.einsum("ia,ib->iab", W, W.conj())

    def total(self) -> np.ndarray:
        W = self.product_vectors()
        return W.T @ W.conj()

    def completeness_residual(self) -> float:
        return frob(self.total() - np.eye(self.n * self.n))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "pairs": [{"a": encode_vector(a), "b": encode_vector(b)} for a, b in self.pairs],
        }

    @classmethod
    def from_json(cls, obj, **kwargs) -> RankOneSeparableMeasurement:
        try:
            pairs = [(decode_vector(p["a"]), decode_vector(p["b"])) for p in obj["pairs"]]
            n = int(obj["n"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed measurement: {exc}") from None
        if any(len(a) != n or len(b) != n for a, b in pairs):
            raise ValueError("pair vectors do not match declared n")
        return cls.from_pairs(pairs, **kwargs)


@dataclass(frozen=True, eq=False)
class SeparableMeasurement:
    """POVM with elements ``A_i (x) B_i`` for PSD local operators."""

    elements: tuple
    tol: InitVar[ToleranceConfig] = DEFAULT_TOL

    def __post_init__(self, tol):
        els = tuple((np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)) for A, B in self.elements)
        if not els:
            raise ValueError("measurement needs at least one outcome")
        for k, (A, B) in enumerate(els):
            for name, X in (("A", A), ("B", B)):
                if X.ndim != 2 or X.shape[0] != X.shape[1]:
                    raise ValueError(f"{name}_{k} is not square")
                if frob(X - X.conj().T) > tol.equality_atol:
                    raise ValueError(f"{name}_{k} is not Hermitian")
                if np.linalg.eigvalsh(X).min() < tol.psd_eig_floor:
                    raise ValueError(f"{name}_{k} is not positive semidefinite")
        object.__setattr__(self, "elements", els)
        r = self.completeness_residual()
        if not r < tol.equality_atol:
            raise ValueError(f"elements do not sum to the identity (residual {r:.3e})")

    def __len__(self) -> int:
        return len(self.elements)

    def operators(self) -> np.ndarray:
        return np.array([np.kron(A, B) for A, B in self.elements])

    def completeness_residual(self) -> float:
        ops = self.operators()
        return frob(ops.sum(axis=0) - np.eye(ops.shape[1]))


@dataclass(frozen=True)
class Partition:
    """Disjoint outcome classes ``S_1, ..., S_m`` (0-based outcome indices).

    Classes may be empty; together they must cover ``0..N-1`` exactly.
    """

    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        classes = tuple(tuple(int(i) for i in c) for c in self.classes)
        flat = [i for c in classes for i in c]
        if len(flat) != len(set(flat)):
            raise ValueError("partition classes overlap")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("partition classes must cover 0..N-1 exactly")
        object.__setattr__(self, "classes", classes)

    @property
    def n_outcomes(self) -> int:
        return sum(len(c) for c in self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def labels(self) -> np.ndarray:
        out = np.empty(self.n_outcomes, dtype=int)
        for k, c in enumerate(self.classes):
            out[list(c)] = k
        return out

    def indicator(self) -> np.ndarray:
        """``(N, m)`` 0/1 matrix with entry (i, k) set when outcome i belongs to class k."""
        ind = np.zeros((self.n_outcomes, len(self)))
        ind[np.arange(self.n_outcomes), self.labels()] = 1.0
        return ind

    @classmethod
    def from_labels(cls, labels, m: int) -> Partition:
        labels = [int(x) for x in labels]
        if any(not 0 <= x < m for x in labels):
            raise ValueError("label out of range")
        return cls(tuple(tuple(i for i, x in enumerate(labels) if x == k) for k in range(m)))

    @classmethod
    def single(cls, N: int) -> Partition:
        return cls((tuple(range(N)),))

    def to_json(self) -> dict:
        return {"classes": [[i + 1 for i in c] for c in self.classes]}

    @classmethod
    def from_json(cls, obj) -> Partition:
        try:
            return cls(tuple(tuple(int(i) - 1 for i in c) for c in obj["classes"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed partition: {exc}") from None


@dataclass(frozen=True, eq=False)
class DistinguishabilityReport:
    confusion: np.ndarray
    perfect: bool
    max_off_diagonal: float
    min_diagonal: float
    # |<u_k, w_i>|^2 for outcomes i outside class k; None for non-rank-one input
    cross_overlaps: np.ndarray | None = field(default=None)

    @property
    def mean_diagonal(self) -> float:
        return float(np.mean(np.diag(self.confusion)))

    @property
    def max_cross_overlap(self) -> float | None:
        if self.cross_overlaps is None:
            return None
        return float(self.cross_overlaps.max(initial=0.0))

    def to_json(self) -> dict:
        out = {
            "confusion": self.confusion.tolist(),
            "perfect": self.perfect,
            "max_off_diagonal": self.max_off_diagonal,
            "min_diagonal": self.min_diagonal,
            "mean_diagonal": self.mean_diagonal,
        }
        if self.cross_overlaps is not None:
            out["max_cross_overlap"] = self.max_cross_overlap
        return out


def validate(m: RankOneSeparableMeasurement) -> float:
    """Frobenius norm of ``sum_i element_i - I``; accept when below ``equality_atol``."""
    return m.completeness_residual()


def refine_to_rank_one(m: SeparableMeasurement, p: Partition | None = None):
    """Split every ``A_i (x) B_i`` into rank-one fragments via eigendecompositions.

    Eigenvalues below ``1e-12`` times the largest one of each factor are
    dropped.  Fragments of outcome ``i`` inherit the class of ``i``.
    """
    p = Partition.single(len(m)) if p is None else p
    if p.n_outcomes != len(m):
        raise ValueError("partition does not match the number of outcomes")
    labels = p.labels()
    alice, bob, frag_labels = [], [], []
    for i, (A, B) in enumerate(m.elements):
        lam, X = np.linalg.eigh(A)
        mu, Y = np.linalg.eigh(B)
        if lam.min() < -1e-10 * max(1.0, lam.max()) or mu.min() < -1e-10 * max(1.0, mu.max()):
            raise ValueError(f"element {i} is not positive semidefinite")
        keep_a = lam > EIG_CUTOFF * lam.max() if lam.max() > 0 else np.zeros_like(lam, bool)
        keep_b = mu > EIG_CUTOFF * mu.max() if mu.max() > 0 else np.zeros_like(mu, bool)
        for s in np.flatnonzero(keep_a):
            for t in np.flatnonzero(keep_b):
                alice.append(np.sqrt(lam[s]) * X[:, s])
                # conj(b) b^T = mu y y^*  requires  b = sqrt(mu) conj(y)
                bob.append(np.sqrt(mu[t]) * Y[:, t].conj())
                frag_labels.append(labels[i])
    meas = RankOneSeparableMeasurement(np.array(alice), np.array(bob))
    return meas, Partition.from_labels(frag_labels, len(p))


class MergeConflict(ValueError):
    """Proportional outcomes sit in different classes; merging would change the partition semantics."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(f"proportional outcomes in different classes: {self.pairs}")


def _proportional(w_i: np.ndarray, w_j: np.ndarray, rtol: float) -> bool:
    s = np.linalg.svd(np.column_stack([w_i, w_j]), compute_uv=False)
    return s[0] == 0 or s[1] < rtol * s[0]


def merge_proportional(m: RankOneSeparableMeasurement, p: Partition | None = None, tol: ToleranceConfig = DEFAULT_TOL):
    """Merge outcomes whose product vectors are proportional and share a class.

    With ``p=None`` every outcome is treated as one class.  A merged group is
    replaced by a single pair whose element equals the sum of the group's
    elements.  Raises :class:`MergeConflict` if proportional outcomes lie in
    different classes.
    """
    p = Partition.single(len(m)) if p is None else p
    if p.n_outcomes != len(m):
        raise ValueError("partition does not match the number of outcomes")
    W = m.product_vectors()
    labels = p.labels()
    N = len(m)
    parent = list(range(N))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    conflicts = []
    for i, j in itertools.combinations(range(N), 2):
        if _proportional(W[i], W[j], tol.independence_rtol):
            if labels[i] != labels[j]:
                conflicts.append((i, j))
            else:
                parent[find(j)] = find(i)
    if conflicts:
        raise MergeConflict(conflicts)

    groups: dict[int, list[int]] = {}
    for i in range(N):
        groups.setdefault(find(i), []).append(i)
    alice, bob, new_labels = [], [], []
    for members in sorted(groups.values(), key=min):
        lead = max(members, key=lambda i: np.linalg.norm(W[i]))
        weight = sum(np.linalg.norm(W[i]) ** 2 for i in members)
        lead_norm = np.linalg.norm(W[lead])
        scale = np.sqrt(weight) / lead_norm if lead_norm > 0 else 0.0
        alice.append(scale * m.alice[lead])
        bob.append(m.bob[lead])
        new_labels.append(labels[members[0]])
    merged = RankOneSeparableMeasurement(np.array(alice), np.array(bob), check=False)
    return merged, Partition.from_labels(new_labels, len(p))


def overlap_matrix(basis, m: RankOneSeparableMeasurement) -> np.ndarray:
    """``O[k, i] = |<u_k, w_i>|^2 = u_k^* element_i u_k``."""
    U = as_rows(basis)
    return np.abs(U.conj() @ m.product_vectors().T) ** 2


def confusion_from_overlaps(O: np.ndarray, p: Partition) -> np.ndarray:
    return O @ p.indicator()


def _report(C: np.ndarray, tol: ToleranceConfig, cross=None) -> DistinguishabilityReport:
    m = C.shape[0]
    off = C - np.diag(np.diag(C))
    return DistinguishabilityReport(
        confusion=C,
        perfect=bool(np.max(np.abs(C - np.eye(m))) < tol.equality_atol),
        max_off_diagonal=float(np.max(np.abs(off))) if m > 1 else 0.0,
        min_diagonal=float(np.min(np.diag(C))),
        cross_overlaps=cross,
    )


def check_perfect(basis, m, p: Partition, tol: ToleranceConfig = DEFAULT_TOL) -> DistinguishabilityReport:
    """Confusion matrix ``C[k, l] = u_k^* (sum_{i in S_l} element_i) u_k`` and the perfect flag.

    Accepts a :class:`RankOneSeparableMeasurement` or a
    :class:`SeparableMeasurement`; only the former reports the cross-class
    overlaps ``|<u_k, a_i (x) conj(b_i)>|^2`` for ``i`` outside ``S_k``.
    """
    U = as_rows(basis)
    if len(p) != U.shape[0]:
        raise ValueError(f"partition has {len(p)} classes but the basis has {U.shape[0]} vectors")
    if p.n_outcomes != len(m):
        raise ValueError("partition does not match the number of outcomes")
    if isinstance(m, RankOneSeparableMeasurement):
        O = overlap_matrix(U, m)
        C = confusion_from_overlaps(O, p)
        cross = np.where(p.indicator().T > 0, 0.0, O)
        return _report(C, tol, cross)
    ops = m.operators()
    probs = np.einsum("ka,iab,kb->ki", U.conj(), ops, U).real
    return _report(probs @ p.indicator(), tol)


def greedy_partition(O: np.ndarray) -> Partition:
    """Assign each outcome to the basis vector it overlaps most (optimal for mean success)."""
    m = O.shape[0]
    return Partition.from_labels(np.argmax(O, axis=0), m)


def exhaustive_partition(O: np.ndarray, chunk: int = 1 << 16) -> Partition:
    """Partition maximizing the minimum diagonal entry (mean diagonal breaks ties).

    Enumerates all ``m^N`` labelings; callers cap the size.
    """
    m, N = O.shape
    total = m**N
    best_key, best_labels = None, None
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        labels = np.stack(np.unravel_index(idx, (m,) * N), axis=1) if N else np.zeros((idx.size, 0), int)
        diag = np.zeros((idx.size, m))
        for i in range(N):
            diag[np.arange(idx.size), labels[:, i]] += O[labels[:, i], i]
        mins = diag.min(axis=1)
        means = diag.mean(axis=1)
        k = int(np.lexsort((-means, -mins))[0])
        key = (mins[k], means[k])
        if best_key is None or key > best_key:
            best_key, best_labels = key, labels[k]
    return Partition.from_labels(best_labels, m)


def best_partition(O: np.ndarray, cap: int = 10**6) -> Partition:
    """Exhaustive search when ``m^N <= cap``, greedy argmax assignment otherwise."""
    m, N = O.shape
    if m**N <= cap:
        return exhaustive_partition(O)
    return greedy_partition(O)


def all_partitions(N: int, m: int):
    for labels in itertools.product(range(m), repeat=N):
        yield Partition.from_labels(labels, m)


def one_round_measurement(alice_basis, bob_bases, tol: ToleranceConfig = DEFAULT_TOL) -> RankOneSeparableMeasurement:
    """Alice measures the orthonormal rows of ``alice_basis``; on outcome ``s`` Bob
    measures the orthonormal rows of ``bob_bases[s]``.

    Bob projecting onto ``c`` corresponds to the pair vector ``b = conj(c)``.
    """
    A = np.asarray(alice_basis, dtype=complex)
    Bs = np.asarray(bob_bases, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n) or Bs.shape != (n, n, n):
        raise ValueError("expected an n x n Alice basis and n Bob bases of shape n x n")
    alice = np.repeat(A, n, axis=0)
    bob = Bs.reshape(n * n, n).conj()
    return RankOneSeparableMeasurement(alice, bob, tol=tol)


def local_bases_measurement(n: int) -> RankOneSeparableMeasurement:
    """Both parties measure the standard basis: pairs ``(e_s, e_t)``."""
    I = np.eye(n, dtype=complex)
    return one_round_measurement(I, np.broadcast_to(I, (n, n, n)))


def sample_one_round_measurement(n: int, seed) -> RankOneSeparableMeasurement:
    """Random one-round LOCC measurement: Haar-random Alice basis, then an
    independent Haar-random Bob basis for each of her outcomes.

    ``N = n^2`` outcomes; deterministic per ``seed``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    A = random_unitary(n, rng).T
    Bs = np.array([random_unitary(n, rng).T for _ in range(n)])
    return one_round_measurement(A, Bs)
