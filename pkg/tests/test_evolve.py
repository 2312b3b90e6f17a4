import numpy as np
import pytest

from emtpd.core import ConfigurationError, ModelKind, MultiTaskProblem, RunConfig, TaskDefinition, TransferStrategy
from emtpd.evolve import RunError, run, sbx_crossover, single_task_baseline
from emtpd.problems import build_mtmaop, toy_problem
from emtpd.sorting import nondominated_levels

SMALL = dict(population_size=20, max_generations=10, max_evaluations=10**6, ref_points=500)


def _mutually_nondominated(F):
    return np.all(nondominated_levels(F) == 0)


class TestRun:
    def test_zero_generations(self):
        p = toy_problem(0.2)
        res = run(p, RunConfig(max_generations=0, **{k: v for k, v in SMALL.items() if k != "max_generations"}))
        assert res.trace == []
        assert res.evaluations == 20
        rng = np.random.default_rng(0)
        X = rng.random((20, p.unified_dim))
        for t, task in enumerate(p.tasks):
            F = task.evaluate(X[t::2])
            front = F[nondominated_levels(F) == 0]
            np.testing.assert_array_equal(np.sort(res.archive_objectives[t], axis=0), np.sort(front, axis=0))

    def test_evaluation_count(self):
        res = run(toy_problem(0.2), RunConfig(**SMALL))
        assert res.evaluations == 20 + 10 * 20
        assert [r.evaluations for r in res.trace if r.task == 2][-1] == res.evaluations

    def test_budget_binds_mid_generation(self):
        cfg = RunConfig(population_size=20, max_generations=100, max_evaluations=35, ref_points=200)
        res = run(toy_problem(0.2), cfg)
        # generation 1 grants task 1 its 10 children and task 2 only the 5 left
        assert res.evaluations == 35
        assert [(r.generation, r.task, r.evaluations) for r in res.trace] == [(1, 1, 30), (1, 2, 35)]

    def test_budget_below_population(self):
        with pytest.raises(ConfigurationError):
            run(toy_problem(0.2), RunConfig(population_size=20, max_evaluations=10))

    def test_deterministic(self):
        a = run(toy_problem(0.4), RunConfig(seed=3, **SMALL))
        b = run(toy_problem(0.4), RunConfig(seed=3, **SMALL))
        assert [r.as_tuple() for r in a.trace] == [r.as_tuple() for r in b.trace]
        for x, y in zip(a.archive_objectives, b.archive_objectives):
            np.testing.assert_array_equal(x, y)

    def test_seed_matters(self):
        a = run(toy_problem(0.4), RunConfig(seed=3, **SMALL))
        b = run(toy_problem(0.4), RunConfig(seed=4, **SMALL))
        assert [r.as_tuple() for r in a.trace] != [r.as_tuple() for r in b.trace]

    def test_archives_nondominated(self):
        res = run(build_mtmaop("MaF-LS1", 3), RunConfig(**SMALL))
        for F in res.archive_objectives:
            assert F.shape[0] >= 1
            assert _mutually_nondominated(F)

    def test_trace_shape(self):
        res = run(toy_problem(0.0), RunConfig(**SMALL))
        assert len(res.trace) == 20
        assert [(r.generation, r.task) for r in res.trace[:4]] == [(1, 1), (1, 2), (2, 1), (2, 2)]
        for r in res.trace:
            assert np.isfinite(r.indicator) and r.indicator >= 0
            assert 0.0 <= r.mean_w <= 1.0 and r.d1 >= 0

    @pytest.mark.parametrize("strategy", list(TransferStrategy))
    def test_every_strategy(self, strategy):
        res = run(toy_problem(0.4), RunConfig(transfer_strategy=strategy, **SMALL))
        assert len(res.trace) == 20

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_every_model(self, kind):
        res = run(build_mtmaop("MaF-MS1", 3), RunConfig(model_kind=kind, **SMALL), indicator="igd+")
        assert len(res.trace) == 20
        assert np.isfinite(res.average_errors()).all()

    def test_indicator_override(self):
        res = run(toy_problem(0.0), RunConfig(indicator="igd+", **SMALL), indicator="igd")
        assert res.indicator == "igd+"

    def test_evaluator_failure(self):
        def broken(X):
            raise RuntimeError("boom")

        bad = TaskDefinition(2, 2, np.zeros(2), np.ones(2), broken, name="bad")
        with pytest.raises(RunError, match="bad"):
            run(MultiTaskProblem(bad, bad), RunConfig(**SMALL))

    def test_non_finite_objectives(self):
        task = TaskDefinition(2, 2, np.zeros(2), np.ones(2), lambda X: np.full((len(X), 2), np.nan), name="nan")
        with pytest.raises(RunError):
            run(MultiTaskProblem(task, task), RunConfig(**SMALL))

    def test_final_models_recorded(self):
        res = run(toy_problem(0.0), RunConfig(**SMALL))
        assert [m["kind"] for m in res.final_models] == ["Gaussian", "Gaussian"]
        assert res.to_dict()["generations"] == 10


class TestBaseline:
    def test_budget_split(self):
        cfg = RunConfig(population_size=20, max_generations=1000, max_evaluations=100, ref_points=200)
        res = single_task_baseline(toy_problem(0.0).task1, cfg)
        assert res.evaluations == 50
        assert res.baseline

    def test_deterministic(self):
        task = toy_problem(0.0).task1
        a = single_task_baseline(task, RunConfig(seed=1, **SMALL))
        b = single_task_baseline(task, RunConfig(seed=1, **SMALL))
        assert [repr(r.as_tuple()) for r in a.trace] == [repr(r.as_tuple()) for r in b.trace]

    def test_archive(self):
        res = single_task_baseline(toy_problem(0.0).task1, RunConfig(**SMALL))
        assert _mutually_nondominated(res.archive_objectives[0])
        assert res.evaluations == 10 + 10 * 10

    @pytest.mark.slow
    def test_igd_improves_over_generations(self):
        cfg = dict(population_size=40, max_generations=60, max_evaluations=10**6, ref_points=500)
        traces = []
        for seed in range(5):
            res = single_task_baseline(toy_problem(0.0).task1, RunConfig(seed=seed, **cfg))
            traces.append([r.indicator for r in res.trace])
        med = np.median(np.array(traces), axis=0)
        checkpoints = med[[0, 9, 19, 39, 59]]
        assert np.all(np.diff(checkpoints) <= 0)
        assert checkpoints[-1] < checkpoints[0]


class TestSBX:
    def test_bounds_and_identity(self):
        rng = np.random.default_rng(0)
        p1, p2 = rng.random((100, 5)), rng.random((100, 5))
        c1, c2 = sbx_crossover(p1, p2, 20.0, rng)
        assert np.all((c1 >= 0) & (c1 <= 1)) and np.all((c2 >= 0) & (c2 <= 1))
        same = rng.random((10, 3))
        c1, c2 = sbx_crossover(same, same, 20.0, rng)
        np.testing.assert_allclose(c1, same)
        np.testing.assert_allclose(c2, same)

    def test_preserves_mean(self):
        rng = np.random.default_rng(1)
        p1, p2 = 0.3 + 0.4 * rng.random((1000, 4)), 0.3 + 0.4 * rng.random((1000, 4))
        c1, c2 = sbx_crossover(p1, p2, 20.0, rng)
        np.testing.assert_allclose(c1 + c2, p1 + p2, atol=1e-12)
