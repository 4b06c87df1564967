import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from linearvc import lvcf
from linearvc.matching import MatchedPairs, cosine_distance, gather_targets, match_frames


def brute_force_match(source, target, k):
    """Independent exhaustive scan with (distance, index) tie-break.

    Distances use the library's unit-row arithmetic (BLAS products are not
    position-stable at the ulp level, so exact index comparison requires a
    shared float pipeline); selection is the plain full scan.
    """
    m = len(target)
    norms = np.linalg.norm(target, axis=1, keepdims=True)
    tgt_unit = target / np.where(norms < 1e-12, 1.0, norms)
    tgt_unit[norms[:, 0] < 1e-12] = 0.0
    src_idx, tgt_idx, dists = [], [], []
    for i, row in enumerate(source):
        n = np.linalg.norm(row)
        unit = row / n if n >= 1e-12 else np.zeros_like(row)
        d = np.clip(1.0 - np.einsum("ij,ij->i", np.tile(unit, (m, 1)), tgt_unit), 0.0, 2.0)
        order = sorted(range(m), key=lambda j: (d[j], j))[:k]
        src_idx += [i] * k
        tgt_idx += order
        dists += [d[j] for j in order]
    return np.array(src_idx), np.array(tgt_idx), np.array(dists)


class TestCosineDistance:
    def test_identical_direction(self):
        assert cosine_distance([1.0, 0.0], [1.0, 0.0]) == 0.0

    def test_antipodal(self):
        assert cosine_distance([1.0, 0.0], [-1.0, 0.0]) == pytest.approx(2.0)

    def test_hand_computed_45_degrees(self):
        got = cosine_distance([1.0, 0.0], [1.0, 1.0])
        assert got == pytest.approx(1.0 - 1.0 / np.sqrt(2.0), abs=1e-12)

    def test_zero_norm_returns_one(self):
        assert cosine_distance([0.0, 0.0], [1.0, 2.0]) == 1.0
        assert cosine_distance([1.0, 2.0], [1e-13, 0.0]) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            cosine_distance([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_symmetry(self, rng):
        for _ in range(50):
            a = rng.standard_normal(6)
            b = rng.standard_normal(6)
            assert abs(cosine_distance(a, b) - cosine_distance(b, a)) <= 1e-9


class TestMatchFrames:
    def test_self_match_distinct_rows(self, rng):
        source = rng.standard_normal((20, 5))
        pairs = match_frames(source, source, k=1)
        np.testing.assert_array_equal(pairs.target_indices, np.arange(20))
        np.testing.assert_allclose(pairs.distances, 0.0, atol=1e-12)

    def test_enumerated_single_neighbour(self):
        source = np.array([[1.0, 0.0]])
        target = np.array([[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
        pairs = match_frames(source, target, k=1)
        assert pairs.target_indices.tolist() == [2]
        assert pairs.distances[0] == pytest.approx(0.0, abs=1e-12)

    def test_enumerated_two_neighbours(self):
        source = np.array([[1.0, 0.0]])
        target = np.array([[0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
        pairs = match_frames(source, target, k=2)
        assert pairs.target_indices.tolist() == [2, 1]
        assert pairs.source_indices.tolist() == [0, 0]
        np.testing.assert_allclose(
            pairs.distances, [0.0, 1.0 - 1.0 / np.sqrt(2.0)], atol=1e-12
        )

    def test_tie_break_lowest_index(self):
        source = np.array([[2.0, 0.0]])
        target = np.array([[0.0, 1.0], [1.0, 0.0], [3.0, 0.0], [1.0, 0.0]])
        pairs = match_frames(source, target, k=3)
        # rows 1, 2 and 3 all have distance 0; lowest indices first
        assert pairs.target_indices.tolist() == [1, 2, 3]

    @pytest.mark.parametrize("case", range(10))
    def test_brute_force_equivalence(self, rng, case):
        n = int(rng.integers(1, 120))
        m = int(rng.integers(1, 150))
        d = int(rng.integers(1, 64))
        source = rng.standard_normal((n, d))
        target = rng.standard_normal((m, d))
        if m >= 4:  # plant exact duplicates to exercise the tie-break
            target[m - 1] = target[0]
            target[m // 2] = target[1]
        if case % 3 == 0:
            source[0] = 0.0  # zero-norm frame
        k = int(rng.integers(1, min(m, 4) + 1))
        pairs = match_frames(source, target, k=k)
        src_o, tgt_o, dist_o = brute_force_match(source, target, k)
        np.testing.assert_array_equal(pairs.source_indices, src_o)
        np.testing.assert_array_equal(pairs.target_indices, tgt_o)
        np.testing.assert_allclose(pairs.distances, dist_o, atol=1e-9)

    def test_distances_recomputable_from_rows(self, rng):
        source = rng.standard_normal((30, 8))
        target = rng.standard_normal((40, 8))
        pairs = match_frames(source, target, k=2)
        for s, t, d in zip(pairs.source_indices, pairs.target_indices, pairs.distances):
            assert abs(d - cosine_distance(source[s], target[t])) <= 1e-6

    def test_blocking_does_not_change_output(self, rng, monkeypatch):
        # shrinking the source-row block size must not affect any result
        source = rng.standard_normal((53, 10))
        target = rng.standard_normal((70, 10))
        baseline = match_frames(source, target, k=2)
        monkeypatch.setattr("linearvc.matching._BLOCK_ROWS", 7)
        blocked = match_frames(source, target, k=2)
        np.testing.assert_array_equal(blocked.target_indices, baseline.target_indices)
        np.testing.assert_array_equal(blocked.distances, baseline.distances)

    def test_deterministic_across_thread_counts(self, rng):
        source = rng.standard_normal((200, 32))
        target = rng.standard_normal((250, 32))
        baseline = match_frames(source, target, k=3)
        for limit in (1, 2):
            with threadpool_limits(limits=limit):
                again = match_frames(source, target, k=3)
            np.testing.assert_array_equal(again.target_indices, baseline.target_indices)
            np.testing.assert_array_equal(again.distances, baseline.distances)

    def test_k_out_of_range(self, rng):
        source = rng.standard_normal((3, 2))
        with pytest.raises(ValueError):
            match_frames(source, source, k=0)
        with pytest.raises(ValueError):
            match_frames(source, source, k=4)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            match_frames(rng.standard_normal((3, 2)), rng.standard_normal((3, 5)))


class TestGatherTargets:
    def test_self_match_identity(self, rng):
        source = rng.standard_normal((15, 4))
        pairs = match_frames(source, source, k=1)
        np.testing.assert_array_equal(gather_targets(pairs, source, k=1), source)

    def test_mean_of_two_rows(self):
        target = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        pairs = MatchedPairs(
            np.array([0, 0]), np.array([1, 3]), np.zeros(2)
        )
        np.testing.assert_array_equal(gather_targets(pairs, target, k=2), [[2.0, 2.0]])

    def test_random_against_brute_force(self, rng):
        source = rng.standard_normal((20, 4))
        target = rng.standard_normal((25, 4))
        k = 3
        pairs = match_frames(source, target, k=k)
        got = gather_targets(pairs, target, k=k)
        expected = np.array([
            target[pairs.target_indices[i * k : (i + 1) * k]].mean(axis=0)
            for i in range(20)
        ])
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_index_out_of_range(self, rng):
        target = rng.standard_normal((5, 2))
        pairs = MatchedPairs(np.array([0]), np.array([9]), np.zeros(1))
        with pytest.raises(ValueError):
            gather_targets(pairs, target, k=1)


class TestExport:
    def test_pairs_roundtrip_through_lvcf(self, tmp_path, rng):
        source = rng.standard_normal((12, 6))
        target = rng.standard_normal((9, 6))
        pairs = match_frames(source, target, k=1)
        path = tmp_path / "pairs.lvcf"
        lvcf.write_matrix(pairs.to_matrix(), path)
        back = lvcf.read_matrix(path)
        assert back.shape == (12, 3)
        np.testing.assert_array_equal(back[:, 0], pairs.source_indices)
        np.testing.assert_array_equal(back[:, 1], pairs.target_indices)
