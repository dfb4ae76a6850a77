import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import crandn, haar_basis_rows, seeds
from locc_cert.linalg import random_psd, random_unitary
from locc_cert.measurement import (
    MergeConflict,
    Partition,
    RankOneSeparableMeasurement,
    SeparableMeasurement,
    all_partitions,
    best_partition,
    check_perfect,
    exhaustive_partition,
    greedy_partition,
    local_bases_measurement,
    merge_proportional,
    one_round_measurement,
    overlap_matrix,
    refine_to_rank_one,
    sample_one_round_measurement,
    validate,
)


def direct_sum(pairs):
    """Sum of a a^* (x) conj(b) b^T from explicit Kronecker products."""
    return sum(np.kron(np.outer(a, a.conj()), np.outer(b.conj(), b)) for a, b in pairs)


def bell_basis():
    e = np.eye(2)
    k = np.kron
    return np.array([
        (k(e[0], e[0]) + k(e[1], e[1])) / np.sqrt(2),
        (k(e[0], e[0]) - k(e[1], e[1])) / np.sqrt(2),
        (k(e[0], e[1]) + k(e[1], e[0])) / np.sqrt(2),
        (k(e[0], e[1]) - k(e[1], e[0])) / np.sqrt(2),
    ])


class TestValidate:
    def test_local_bases(self):
        assert validate(local_bases_measurement(2)) < 1e-14

    def test_missing_element(self):
        pairs = local_bases_measurement(2).pairs[:-1]
        m = RankOneSeparableMeasurement.from_pairs(pairs, check=False)
        assert abs(validate(m) - 1.0) < 1e-14

    def test_construction_rejects_incomplete(self):
        pairs = local_bases_measurement(2).pairs[:-1]
        with pytest.raises(ValueError):
            RankOneSeparableMeasurement.from_pairs(pairs)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            RankOneSeparableMeasurement.from_pairs([(np.ones(2), np.ones(2)), (np.ones(3), np.ones(3))])

    @given(seeds, st.integers(2, 4))
    def test_sampled(self, seed, n):
        m = sample_one_round_measurement(n, seed)
        assert len(m) == n * n
        assert np.linalg.norm(direct_sum(m.pairs) - np.eye(n * n)) < 1e-10
        assert validate(m) < 1e-10

    def test_element_action_on_vec(self, rng):
        # element i maps vec(M) to vec(a a^* M b b^*)
        m = sample_one_round_measurement(3, 4)
        M = crandn(rng, 3, 3)
        for (a, b), E in zip(m.pairs, m.operators()):
            expected = (np.outer(a, a.conj()) @ M @ np.outer(b, b.conj())).reshape(-1)
            assert np.linalg.norm(E @ M.reshape(-1) - expected) < 1e-12

    def test_json_roundtrip(self):
        m = sample_one_round_measurement(3, 9)
        m2 = RankOneSeparableMeasurement.from_json(m.to_json())
        assert np.array_equal(m.alice, m2.alice) and np.array_equal(m.bob, m2.bob)


class TestSampler:
    def test_deterministic(self):
        a, b = sample_one_round_measurement(3, 1), sample_one_round_measurement(3, 1)
        assert np.array_equal(a.alice, b.alice) and np.array_equal(a.bob, b.bob)

    def test_seeds_differ(self):
        a, b = sample_one_round_measurement(2, 1), sample_one_round_measurement(2, 2)
        assert not np.allclose(a.alice, b.alice)

    def test_equal_bob_bases_give_product_measurement(self, rng):
        n = 3
        A, B = haar_basis_rows(rng, n), haar_basis_rows(rng, n)
        m = one_round_measurement(A, np.broadcast_to(B, (n, n, n)))
        expected = [np.kron(np.outer(a, a.conj()), np.outer(c, c.conj())) for a in A for c in B]
        assert_allclose(m.operators(), np.array(expected), atol=1e-12)

    def test_rejects_n1(self):
        with pytest.raises(ValueError):
            sample_one_round_measurement(1, 0)


class TestPartition:
    def test_cover_and_disjoint(self):
        with pytest.raises(ValueError):
            Partition(((0, 1), (1,)))
        with pytest.raises(ValueError):
            Partition(((0, 2),))
        p = Partition(((1,), (), (0, 2)))
        assert list(p.labels()) == [2, 0, 2]

    def test_json_is_one_based(self):
        p = Partition(((1,), (0, 2)))
        assert p.to_json() == {"classes": [[2], [1, 3]]}
        assert Partition.from_json(p.to_json()) == p


class TestRefine:
    def test_identity_element(self):
        sm = SeparableMeasurement(((np.eye(2), np.eye(2)),))
        m, p = refine_to_rank_one(sm)
        assert len(m) == 4
        got = {(int(np.argmax(np.abs(a))), int(np.argmax(np.abs(b)))) for a, b in m.pairs}
        assert got == {(0, 0), (0, 1), (1, 0), (1, 1)}
        for a, b in m.pairs:
            assert abs(np.linalg.norm(a) - 1) < 1e-12 and abs(np.linalg.norm(b) - 1) < 1e-12

    def test_rank_one_input_unchanged(self):
        m0 = sample_one_round_measurement(2, 3)
        sm = SeparableMeasurement(tuple((np.outer(a, a.conj()), np.outer(b.conj(), b)) for a, b in m0.pairs))
        m1, _ = refine_to_rank_one(sm)
        assert len(m1) == len(m0)
        assert_allclose(m1.operators(), m0.operators(), atol=1e-12)

    def test_random_psd_reconstruction(self, rng):
        n = 3
        A = random_psd(n, rng)
        A /= np.linalg.eigvalsh(A).max() * 1.1
        B = random_psd(n, rng, rank=2)
        B /= np.linalg.eigvalsh(B).max() * 1.1
        I = np.eye(n)
        els = ((A, B), (A, I - B), (I - A, B), (I - A, I - B))
        sm = SeparableMeasurement(els)
        p = Partition(((0, 2), (1, 3)))
        m, q = refine_to_rank_one(sm, p)
        ops = m.operators()
        labels = q.labels()
        # fragments are emitted in outcome order; regroup by source outcome
        start = 0
        for i, (Ai, Bi) in enumerate(els):
            count = np.linalg.matrix_rank(Ai) * np.linalg.matrix_rank(Bi)
            frag = ops[start : start + count].sum(axis=0)
            assert np.linalg.norm(frag - np.kron(Ai, Bi)) < 1e-10
            assert set(labels[start : start + count]) == {p.labels()[i]}
            start += count
        assert start == len(m)

    def test_refined_confusion_matches(self, rng):
        n = 2
        A = random_psd(n, rng)
        A /= np.linalg.eigvalsh(A).max() * 1.5
        I = np.eye(n)
        sm = SeparableMeasurement(((A, I), (I - A, I)))
        basis = haar_basis_rows(rng, 4)[:2]
        p = Partition(((0,), (1,)))
        m, q = refine_to_rank_one(sm, p)
        c1 = check_perfect(basis, sm, p).confusion
        c2 = check_perfect(basis, m, q).confusion
        assert np.max(np.abs(c1 - c2)) < 1e-10

    def test_rejects_non_psd(self):
        with pytest.raises(ValueError):
            SeparableMeasurement(((np.diag([2.0, -1.0]), np.eye(2)),))


class TestMerge:
    def test_duplicate_pair(self):
        e = np.eye(2)
        h = 1 / np.sqrt(2)
        pairs = [(h * e[0], e[0]), (h * e[0], e[0]), (e[0], e[1]), (e[1], e[0]), (e[1], e[1])]
        m = RankOneSeparableMeasurement.from_pairs(pairs)
        merged, p = merge_proportional(m)
        assert len(merged) == 4
        assert_allclose(merged.alice[0], e[0], atol=1e-15)
        assert_allclose(merged.bob[0], e[0], atol=1e-15)

    def test_no_proportional_pairs(self):
        m = sample_one_round_measurement(3, 2)
        merged, p = merge_proportional(m)
        assert np.array_equal(merged.alice, m.alice) and np.array_equal(merged.bob, m.bob)

    def test_randomized_duplicates(self, rng):
        m = sample_one_round_measurement(3, 5)
        alice, bob, labels = [], [], []
        for i, (a, b) in enumerate(m.pairs):
            t = rng.uniform(0.1, 0.9)
            phase = np.exp(2j * np.pi * rng.random())
            alice += [np.sqrt(t) * a, np.sqrt(1 - t) * phase * a]
            bob += [b, b]
            labels += [i % 3, i % 3]
        split = RankOneSeparableMeasurement(np.array(alice), np.array(bob))
        merged, p = merge_proportional(split, Partition.from_labels(labels, 3))
        assert len(merged) == 9
        assert np.linalg.norm(merged.total() - split.total()) < 1e-12
        assert list(p.labels()) == [i % 3 for i in range(9)]

    def test_conflict(self):
        e = np.eye(2)
        h = 1 / np.sqrt(2)
        pairs = [(h * e[0], e[0]), (h * e[0], e[0]), (e[0], e[1]), (e[1], e[0]), (e[1], e[1])]
        m = RankOneSeparableMeasurement.from_pairs(pairs)
        with pytest.raises(MergeConflict) as info:
            merge_proportional(m, Partition(((0, 2, 3, 4), (1,))))
        assert info.value.pairs == [(0, 1)]


class TestCheckPerfect:
    def test_product_basis(self):
        basis = np.eye(4)
        m = local_bases_measurement(2)
        p = Partition(((0,), (1,), (2,), (3,)))
        rep = check_perfect(basis, m, p)
        # direct evaluation oracle: u_k^* (a a^* (x) conj(b) b^T) u_k
        C = np.array([[basis[k].conj() @ E @ basis[k] for E in m.operators()] for k in range(4)]).real
        assert_allclose(rep.confusion, C, atol=1e-15)
        assert rep.perfect
        assert rep.max_cross_overlap == 0.0

    def test_bell_basis_all_partitions(self):
        basis = bell_basis()
        m = local_bases_measurement(2)
        count = 0
        for p in all_partitions(4, 4):
            assert not check_perfect(basis, m, p).perfect
            count += 1
        assert count == 4**4

    def test_trivial_measurement(self, rng):
        sm = SeparableMeasurement(((np.eye(3), np.eye(3)),))
        m, p = refine_to_rank_one(sm)
        basis = haar_basis_rows(rng, 9)[:1]
        rep = check_perfect(basis, m, p)
        assert abs(rep.confusion[0, 0] - 1) < 1e-12
        basis = haar_basis_rows(rng, 9)[:3]
        p3 = Partition((tuple(range(9)), (), ()))
        rep = check_perfect(basis, m, p3)
        assert_allclose(rep.confusion.sum(axis=1), 1, atol=1e-12)
        assert not rep.perfect

    def test_class_count_mismatch(self):
        with pytest.raises(ValueError):
            check_perfect(np.eye(4)[:2], local_bases_measurement(2), Partition.single(4))

    @settings(max_examples=40)
    @given(seeds, st.integers(2, 3))
    def test_rows_sum_to_one(self, seed, n):
        rng = np.random.default_rng(seed)
        m = sample_one_round_measurement(n, seed)
        basis = random_unitary(n * n, rng).T[: n + 1]
        labels = rng.integers(0, basis.shape[0], size=len(m))
        rep = check_perfect(basis, m, Partition.from_labels(labels, basis.shape[0]))
        assert np.max(np.abs(rep.confusion.sum(axis=1) - 1)) < 1e-10


class TestPartitionSearch:
    def test_greedy_is_argmax(self, rng):
        O = rng.random((3, 5))
        assert list(greedy_partition(O).labels()) == list(np.argmax(O, axis=0))

    def test_exhaustive_maximizes_min_diagonal(self, rng):
        O = rng.random((3, 5))
        best = max(
            (np.diag(O @ p.indicator()).min() for p in all_partitions(5, 3)),
        )
        got = exhaustive_partition(O)
        assert abs(np.diag(O @ got.indicator()).min() - best) < 1e-15

    def test_best_partition_finds_perfect_for_product_basis(self):
        m = local_bases_measurement(2)
        p = best_partition(overlap_matrix(np.eye(4), m))
        assert check_perfect(np.eye(4), m, p).perfect
