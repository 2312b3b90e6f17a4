import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emtpd.core import DataError, Individual
from emtpd.sorting import (
    crowding_distance,
    dominates,
    environmental_selection,
    fast_nondominated_sort,
    nondominated_levels,
    select_indices,
)
from oracles import brute_force_fronts, reference_crowding, reference_survival


def _inds(F):
    return [Individual(genotype=np.zeros(1), objectives=np.asarray(f, dtype=float)) for f in F]


class TestDominance:
    def test_basic(self):
        assert dominates(np.array([0, 0]), np.array([1, 1]))
        assert dominates(np.array([0, 1]), np.array([1, 1]))
        assert not dominates(np.array([1, 1]), np.array([1, 1]))
        assert not dominates(np.array([0, 1]), np.array([1, 0]))


class TestSort:
    def test_mutual(self):
        assert fast_nondominated_sort(np.array([[0.0, 1.0], [1.0, 0.0]])) == [[0, 1]]

    def test_strict(self):
        assert fast_nondominated_sort(np.array([[0.0, 0.0], [1.0, 1.0]])) == [[0], [1]]

    def test_individuals(self):
        assert fast_nondominated_sort(_inds([[1, 1], [0, 0]])) == [[1], [0]]

    def test_duplicates_share_front(self):
        assert fast_nondominated_sort(np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]])) == [[0, 1], [2]]

    def test_mixed_lengths(self):
        with pytest.raises(DataError):
            fast_nondominated_sort(_inds([[1, 1], [0, 0, 0]]))

    def test_empty(self):
        assert fast_nondominated_sort(np.empty((0, 2))) == []

    def test_oracle_50_three_objective(self):
        F = np.random.default_rng(0).random((50, 3))
        assert fast_nondominated_sort(F) == brute_force_fronts(F.tolist())

    def test_beyond_one_chunk(self):
        rng = np.random.default_rng(1)
        F = rng.integers(0, 5, size=(700, 2)).astype(float)
        assert fast_nondominated_sort(F) == brute_force_fronts(F.tolist())

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 64), st.integers(1, 5), st.integers(0, 2**32 - 1), st.booleans())
    def test_matches_oracle(self, n, m, seed, discrete):
        rng = np.random.default_rng(seed)
        F = rng.integers(0, 4, size=(n, m)).astype(float) if discrete else rng.random((n, m))
        assert fast_nondominated_sort(F) == brute_force_fronts(F.tolist())


class TestCrowding:
    def test_pair(self):
        assert np.all(np.isinf(crowding_distance(np.array([[0.0, 1.0], [1.0, 0.0]]))))

    def test_single(self):
        assert np.isinf(crowding_distance(np.array([[0.3, 0.3]]))[0])

    def test_collinear(self):
        cd = crowding_distance(np.array([[0.0, 2.0], [1.0, 1.0], [2.0, 0.0]]))
        assert cd[1] == pytest.approx(2.0)
        assert np.isinf(cd[0]) and np.isinf(cd[2])

    def test_identical(self):
        cd = crowding_distance(np.ones((5, 3)))
        assert np.isinf(cd[0]) and np.isinf(cd[-1])
        np.testing.assert_array_equal(cd[1:-1], 0.0)

    @settings(max_examples=40)
    @given(st.integers(3, 30), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_matches_reference(self, n, m, seed):
        F = np.random.default_rng(seed).random((n, m))
        np.testing.assert_allclose(crowding_distance(F), reference_crowding(F.tolist()))


class TestSelection:
    def test_parents_dominate(self):
        parents = _inds([[0, 1], [1, 0], [0.5, 0.5]])
        offspring = _inds([[2, 2], [3, 3], [4, 4]])
        out = environmental_selection(parents, offspring, 3)
        assert {id(x) for x in out} == {id(x) for x in parents}
        assert all(x.rank == 0 for x in out)

    def test_offspring_dominate(self):
        parents = _inds([[2, 2], [3, 3], [4, 4]])
        offspring = _inds([[0, 1], [1, 0], [0.5, 0.5]])
        out = environmental_selection(parents, offspring, 3)
        assert {id(x) for x in out} == {id(x) for x in offspring}

    def test_oracle_union_of_20(self):
        F = np.random.default_rng(2).random((20, 2))
        idx, _, _ = select_indices(F, 10)
        assert idx.tolist() == reference_survival(F.tolist(), 10)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 32), st.integers(1, 5), st.integers(0, 2**32 - 1), st.booleans())
    def test_matches_oracle(self, half, m, seed, discrete):
        rng = np.random.default_rng(seed)
        F = rng.integers(0, 4, size=(2 * half, m)).astype(float) if discrete else rng.random((2 * half, m))
        idx, rank, _ = select_indices(F, half)
        assert idx.tolist() == reference_survival(F.tolist(), half)
        assert len(idx) == half
        assert np.all(np.diff(rank) >= 0)

    def test_marks_rank_and_crowding(self):
        out = environmental_selection(_inds([[0, 1], [1, 0]]), _inds([[2, 2], [0.5, 0.5]]), 2)
        assert all(x.rank is not None and x.crowding is not None for x in out)


def test_levels_consistent_with_sort():
    F = np.random.default_rng(3).random((100, 4))
    levels = nondominated_levels(F)
    for k, front in enumerate(fast_nondominated_sort(F)):
        assert np.all(levels[front] == k)
