import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn, seeds
from locc_cert.bipartite import Q_projector, gen_Q_basis, random_Q_basis
from locc_cert.certificate import (
    NoCertificateError,
    alpha,
    alpha_matrix_form,
    compressed_operators,
    diagonalization_report,
    find_noncommuting_pair,
    harness_on_basis,
    identity_report,
    theorem_harness,
)
from locc_cert.measurement import (
    Partition,
    RankOneSeparableMeasurement,
    greedy_partition,
    local_bases_measurement,
    merge_proportional,
    overlap_matrix,
    sample_one_round_measurement,
)


def loose(pairs):
    return RankOneSeparableMeasurement.from_pairs(pairs, check=False)


class TestAlpha:
    def test_e1_everywhere(self):
        e1 = np.eye(3)[0]
        m = loose([(e1, e1)])
        assert abs(alpha(m, 0, 0) - 2 / 3) < 1e-15

    def test_orthogonal_alice(self, rng):
        a_i, a_j = np.eye(3)[0] * 0.7, np.eye(3)[1] * 1.3
        b_i, b_j = crandn(rng, 3), crandn(rng, 3)
        m = loose([(a_i, b_i), (a_j, b_j)])
        expected = -np.vdot(a_i, b_i) * np.vdot(b_j, a_j) / 3
        assert abs(alpha(m, 0, 1) - expected) < 1e-14

    def test_index_error(self):
        with pytest.raises(IndexError):
            alpha(local_bases_measurement(3), 0, 9)

    @settings(max_examples=1000, deadline=None)
    @given(seeds, st.integers(2, 4))
    def test_scalar_vs_matrix_form(self, seed, n):
        rng = np.random.default_rng(seed)
        m = loose([(crandn(rng, n), crandn(rng, n)) for _ in range(2)])
        for i, j in itertools.product(range(2), repeat=2):
            a, b = alpha(m, i, j), alpha_matrix_form(m, i, j)
            assert abs(a - b) < 1e-12 * max(1.0, abs(b))


class TestIdentityReport:
    def test_local_bases_n3(self):
        rep = identity_report(local_bases_measurement(3))
        # sum_{s,t} |<e_s, e_t>|^2 = n
        assert abs(rep.sum_sq_overlaps - 3) < 1e-12
        assert rep.map_residual < 1e-12 and not rep.violation

    @pytest.mark.parametrize("seed", range(10))
    def test_sampled_n2(self, seed):
        rep = identity_report(sample_one_round_measurement(2, seed))
        assert abs(rep.sum_sq_overlaps - 2) < 1e-8

    def test_missing_element_flagged(self):
        m = loose(local_bases_measurement(2).pairs[:-1])
        rep = identity_report(m)
        assert rep.map_residual >= 0.5 and rep.violation


def scan_oracle(m):
    """Exhaustive pair scan with explicit Q-compressions."""
    Q = Q_projector(m.n)
    K = [Q @ E @ Q for E in m.operators()]
    best = 0.0
    for i, j in itertools.combinations(range(len(K)), 2):
        c = np.linalg.norm(K[i] @ K[j] - K[j] @ K[i]) / (np.linalg.norm(K[i]) * np.linalg.norm(K[j]))
        best = max(best, c)
    return best


class TestNoncommutingPair:
    def test_local_bases_n3(self):
        m = local_bases_measurement(3)
        cert = find_noncommuting_pair(m)
        assert cert.commutator_norm > 1e-6
        assert abs(cert.commutator_norm - scan_oracle(m)) < 1e-12
        assert cert.i != cert.j
        assert abs(cert.alpha_ij) > 0

    def test_sampled_n3_sweep(self):
        for seed in range(200):
            m, _ = merge_proportional(sample_one_round_measurement(3, seed))
            assert find_noncommuting_pair(m).commutator_norm > 1e-6

    def test_rejects_n2(self):
        with pytest.raises(ValueError, match="n >= 3"):
            find_noncommuting_pair(local_bases_measurement(2))

    def test_rejects_dependent_pairs(self):
        e = np.eye(3)
        pairs = [(e[0] / np.sqrt(2), e[0]), (e[0] / np.sqrt(2), e[0])] + [
            (e[s], e[t]) for s in range(3) for t in range(3) if (s, t) != (0, 0)
        ]
        m = RankOneSeparableMeasurement.from_pairs(pairs)
        with pytest.raises(ValueError, match="merge"):
            find_noncommuting_pair(m)
        merged, _ = merge_proportional(m)
        assert find_noncommuting_pair(merged).commutator_norm > 1e-6

    def test_threshold_error_carries_max(self):
        with pytest.raises(NoCertificateError) as info:
            find_noncommuting_pair(local_bases_measurement(3), threshold=10.0)
        assert 0 < info.value.max_value < 10

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.sampled_from([3, 4]))
    def test_product_identity(self, seed, n):
        m = sample_one_round_measurement(n, seed)
        K = compressed_operators(m)
        W = m.product_vectors()
        Q = Q_projector(n)
        for i, j in [(0, 1), (2, n * n - 1), (1, n)]:
            rhs = alpha(m, i, j) * Q @ np.outer(W[i], W[j].conj()) @ Q
            assert np.linalg.norm(K[i] @ K[j] - rhs) < 1e-10

    @pytest.mark.parametrize("n", [3, 4])
    def test_some_alpha_nonzero(self, n):
        for seed in range(20):
            m = sample_one_round_measurement(n, seed)
            vals = [abs(alpha(m, i, j)) for i, j in itertools.permutations(range(len(m)), 2)]
            assert max(vals) > 1e-8


class TestDiagonalization:
    def test_v_entries_vanish(self):
        for seed in range(5):
            m = sample_one_round_measurement(3, seed)
            basis = random_Q_basis(3, seed)
            p = greedy_partition(overlap_matrix(basis, m))
            assert diagonalization_report(basis, m, p).max_v_entry < 1e-10

    def test_canonical_basis_fails(self, rng):
        basis = gen_Q_basis(3)
        m = local_bases_measurement(3)
        parts = [greedy_partition(overlap_matrix(basis, m))]
        parts += [Partition.from_labels(rng.integers(0, 8, size=9), 8) for _ in range(50)]
        for p in parts:
            assert diagonalization_report(basis, m, p).max_offdiag > 1e-3

    def test_offdiag_bounded_by_orthogonality(self):
        # |u_k^* K_i u_l| <= max_{k: i not in S_k} |<u_k, w_i>| * ||w_i||
        for seed in range(30):
            m = sample_one_round_measurement(3, seed)
            basis = random_Q_basis(3, 100 + seed)
            p = greedy_partition(overlap_matrix(basis, m))
            rep = diagonalization_report(basis, m, p)
            assert np.all(rep.offdiag <= rep.orthogonality * rep.product_norms + 1e-12)

    def test_rejects_basis_outside_Q(self):
        basis = np.eye(9)[:8]
        m = local_bases_measurement(3)
        with pytest.raises(ValueError, match="range"):
            diagonalization_report(basis, m, greedy_partition(overlap_matrix(basis, m)))


class TestHarness:
    def test_small_sweep_has_no_hits(self):
        s = theorem_harness(3, range(3), range(60), threads=1)
        assert s.samples == 180
        assert s.perfect_hits == 0
        assert s.max_best_diagonal < 1

    def test_threaded_matches_serial(self):
        a = theorem_harness(3, range(4), range(10), threads=1)
        b = theorem_harness(3, range(4), range(10), threads=3)
        assert a.to_json() == b.to_json()

    def test_rejects_n2(self):
        with pytest.raises(ValueError):
            theorem_harness(2, range(1), range(1))

    def test_control_product_basis_n3(self):
        s = harness_on_basis(np.eye(9), [local_bases_measurement(3)])
        assert s.perfect_hits == 1

    def test_control_Q_basis_n2(self):
        # for two qubits range(Q) does have a distinguishable basis
        s = harness_on_basis(gen_Q_basis(2), [local_bases_measurement(2)])
        assert s.perfect_hits == 1
