import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emtpd.core import MultiTaskProblem, TaskDefinition
from emtpd.metrics import (
    IndicatorError,
    ReferenceSet,
    classify_similarity,
    igd,
    igd_plus,
    rank_by_levels,
    similarity,
)
from emtpd.problems import toy_problem


def _loop_igd(Z, A, plus=False):
    total = 0.0
    for z in Z:
        best = math.inf
        for a in A:
            diff = [max(ai - zi, 0.0) if plus else ai - zi for ai, zi in zip(a, z)]
            best = min(best, math.sqrt(sum(d * d for d in diff)))
        total += best
    return total / len(Z)


class TestIndicators:
    def test_hand_examples(self):
        Z = np.array([[0.0, 1.0], [1.0, 0.0]])
        A = np.array([[0.5, 0.5]])
        assert igd(Z, A) == pytest.approx(math.sqrt(0.5))
        assert igd_plus(Z, A) == pytest.approx(0.5)

    def test_exact_match(self):
        Z = np.random.default_rng(0).random((20, 3))
        assert igd(Z, Z) == 0.0
        assert igd_plus(Z, Z) == 0.0

    def test_dominating_point(self):
        Z = np.random.default_rng(1).random((20, 3)) + 1.0
        assert igd_plus(Z, np.zeros((1, 3))) == 0.0
        assert igd(Z, np.zeros((1, 3))) > 0.0

    def test_reference_set_object(self):
        ref = ReferenceSet(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert len(ref) == 2
        assert igd(ref, np.array([[0.0, 1.0]])) == pytest.approx(math.sqrt(2) / 2)

    def test_errors(self):
        with pytest.raises(IndicatorError):
            igd(np.zeros((2, 2)), np.empty((0, 2)))
        with pytest.raises(IndicatorError):
            igd_plus(np.zeros((2, 2)), np.zeros((1, 3)))
        with pytest.raises(IndicatorError):
            ReferenceSet(np.empty((0, 2)))

    def test_from_file(self, tmp_path):
        path = tmp_path / "ref.txt"
        path.write_text("0 1\n1 0\n")
        ref = ReferenceSet.from_file(path)
        assert ref.source == "file"
        np.testing.assert_array_equal(ref.points, [[0, 1], [1, 0]])

    def test_loop_oracle(self):
        rng = np.random.default_rng(2)
        Z, A = rng.random((30, 4)), rng.random((12, 4))
        assert igd(Z, A) == pytest.approx(_loop_igd(Z, A), rel=1e-12)
        assert igd_plus(Z, A) == pytest.approx(_loop_igd(Z, A, plus=True), rel=1e-12)

    def test_chunked_reference(self):
        rng = np.random.default_rng(3)
        Z, A = rng.random((2500, 2)), rng.random((7, 2))
        assert igd(Z, A) == pytest.approx(_loop_igd(Z, A), rel=1e-10)

    @settings(max_examples=100)
    @given(st.integers(1, 20), st.integers(1, 20), st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_plus_bounded_and_monotone(self, nz, na, m, seed):
        rng = np.random.default_rng(seed)
        Z, A, B = rng.random((nz, m)), rng.random((na, m)), rng.random((na, m))
        assert igd_plus(Z, A) <= igd(Z, A) + 1e-12
        assert igd(Z, np.vstack([A, B])) <= igd(Z, A) + 1e-12
        assert igd_plus(Z, np.vstack([A, B])) <= igd_plus(Z, A) + 1e-12


def _linear_problem(sign):
    def task(s):
        return TaskDefinition(
            native_dim=2,
            n_objectives=1,
            lower_bounds=np.zeros(2),
            upper_bounds=np.ones(2),
            evaluator=lambda X: (s * X[:, :1]),
        )

    return MultiTaskProblem(task(1.0), task(sign))


class TestSimilarity:
    def test_identical(self):
        assert similarity(_linear_problem(1.0), 200, np.random.default_rng(0)) == pytest.approx(1.0)

    def test_reversed(self):
        assert similarity(_linear_problem(-1.0), 200, np.random.default_rng(0)) == pytest.approx(-1.0)

    def test_too_small(self):
        with pytest.raises(ValueError):
            similarity(_linear_problem(1.0), 9, np.random.default_rng(0))

    def test_symmetric(self):
        p = toy_problem(0.4)
        q = MultiTaskProblem(p.task2, p.task1)
        assert similarity(p, 500, np.random.default_rng(1)) == similarity(q, 500, np.random.default_rng(1))

    def test_toy_offset_ordering(self):
        sims = [similarity(toy_problem(o), 2000, np.random.default_rng(2)) for o in (0.0, 0.4, 0.8)]
        assert sims[0] == pytest.approx(1.0)
        assert sims[0] > sims[1] > sims[2]

    def test_rank_rule(self):
        F = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.4, 0.4]])
        # front 0: row 1; front 1: rows 2, 3, 4 ordered by normalised sum then index; front 2: row 0
        assert rank_by_levels(F).tolist() == [4, 0, 2, 3, 1]

    def test_pluggable_rule(self):
        def by_first(F):
            return np.argsort(np.argsort(F[:, 0]))

        assert similarity(_linear_problem(1.0), 100, np.random.default_rng(0), rank_rule=by_first) == pytest.approx(1.0)


class TestBands:
    def test_examples(self):
        assert classify_similarity(0.9) == "HS"
        assert classify_similarity(0.5) == "MS"
        assert classify_similarity(1 / 3) == "LS"
        assert classify_similarity(2 / 3) == "MS"
        assert classify_similarity(1.0) == "HS"
        assert classify_similarity(np.nextafter(1 / 3, 1)) == "MS"
        assert classify_similarity(np.nextafter(2 / 3, 1)) == "HS"

    def test_nonpositive_flagged(self):
        with pytest.warns(RuntimeWarning):
            assert classify_similarity(0.0) == "LS"
        with pytest.warns(RuntimeWarning):
            assert classify_similarity(-1.0) == "LS"

    @given(st.floats(-1, 1))
    def test_total(self, sim):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            assert classify_similarity(sim) in {"LS", "MS", "HS"}
