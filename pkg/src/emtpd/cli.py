"""Experiment runner.

A plan is a list of entries (problem, objectives, model, strategy, seed,
setting overrides) read from a JSON file, from flags, or both; flags win.
Every run writes a JSON summary, a per-generation CSV trace and one
plain-text archive per task into the output directory.

Plan file layout::

    {
      "output_dir": "results",
      "repetitions": 3,
      "defaults": {"scale_factor": 0.01},
      "entries": [
        {"problem": "MaF-HS2", "objectives": 10, "model": "Gaussian",
         "strategy": "PD", "seed": 1, "overrides": {"max_generations": 50}}
      ]
    }
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TextIO

import numpy as np

from .core import ConfigurationError, ModelKind, RunConfig, TransferStrategy
from .evolve import TRACE_COLUMNS, RunResult, run, single_task_baseline
from .metrics import classify_similarity, similarity
from .problems import MTMAOP_COMPOSITION, MTMAOP_SETTINGS, REGISTRY, get_problem, get_spec

log = logging.getLogger("emtpd")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2

SUMMARY_COLUMNS = ("problem", "objectives", "model", "strategy", "baseline", "task", "runs", "median_indicator")
DIAGNOSTIC_COLUMNS = ("model", "problem", "objectives", "task", "runs", "e_avg")

# flag name -> RunConfig field
_FLAG_FIELDS = {
    "budget": "max_evaluations",
    "generations": "max_generations",
    "pop_size": "population_size",
    "scale_factor": "scale_factor",
    "ref_points": "ref_points",
    "indicator": "indicator",
}
_CONFIG_FIELDS = set(RunConfig.__dataclass_fields__) - {"model_kind", "transfer_strategy", "seed"}


@dataclass
class PlanEntry:
    problem: str
    objectives: int
    model: ModelKind = ModelKind.GAUSSIAN
    strategy: TransferStrategy = TransferStrategy.PD
    seed: int = 0
    overrides: dict = field(default_factory=dict)
    baseline: bool = False

    @property
    def tag(self) -> str:
        kind = "NSGA2" if self.baseline else f"{self.model.value}_{self.strategy.value}"
        return f"{self.problem}_n{self.objectives}_{kind}"

    def settings(self) -> dict:
        """Resolved RunConfig keyword arguments (seed excluded)."""
        base: dict = {}
        if self.problem in MTMAOP_COMPOSITION and self.objectives in MTMAOP_SETTINGS:
            N, G, FEs = MTMAOP_SETTINGS[self.objectives]
            base.update(population_size=N, max_generations=G, max_evaluations=FEs)
        base.update(self.overrides)
        return base

    def config(self, seed: int) -> RunConfig:
        settings = self.settings()
        mp = settings.pop("mutation_probability", None)
        N = settings.get("population_size", RunConfig.population_size)
        if isinstance(mp, str):
            mp = _resolve_mutation(mp, N, self)
        return RunConfig(model_kind=self.model, transfer_strategy=self.strategy, seed=seed, mutation_probability=mp, **settings)


@dataclass
class ExperimentPlan:
    entries: list[PlanEntry]
    output_dir: Path = Path("results")
    repetitions: int = 1


def _resolve_mutation(text: str, N: int, entry: PlanEntry) -> float:
    text = text.strip().upper()
    if text == "1/N":
        return 1.0 / N
    if text == "1/D":
        return 1.0 / get_problem(entry.problem, entry.objectives).unified_dim
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"mutation probability must be a number, '1/N' or '1/D', got {text!r}") from None


def _check_overrides(overrides: dict) -> dict:
    unknown = set(overrides) - _CONFIG_FIELDS
    if unknown:
        raise ConfigurationError(f"unknown setting(s) {sorted(unknown)}; expected among {sorted(_CONFIG_FIELDS)}")
    return dict(overrides)


def _entry_from_mapping(raw: dict, defaults: dict) -> PlanEntry:
    if "problem" not in raw:
        raise ConfigurationError("plan entry without a problem")
    spec = get_spec(raw["problem"])
    n = int(raw.get("objectives", spec.default_objectives))
    spec.builder(n)  # fail early on unsupported objective counts
    overrides = _check_overrides({**defaults, **raw.get("overrides", {})})
    return PlanEntry(
        problem=raw["problem"],
        objectives=n,
        model=ModelKind.parse(raw.get("model", ModelKind.GAUSSIAN)),
        strategy=TransferStrategy.parse(raw.get("strategy", TransferStrategy.PD)),
        seed=int(raw.get("seed", 0)),
        overrides=overrides,
        baseline=bool(raw.get("baseline", False)),
    )


def parse_config(path: str | Path | None = None, flags: argparse.Namespace | dict | None = None) -> ExperimentPlan:
    """Build a fully resolved plan from a JSON plan file and/or flags."""
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigurationError(f"plan file {path} does not exist") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"plan file {path} is not valid JSON: {exc}") from None
    f = vars(flags) if isinstance(flags, argparse.Namespace) else dict(flags or {})
    f = {k: v for k, v in f.items() if v is not None}

    defaults = _check_overrides(doc.get("defaults", {}))
    raw_entries = doc.get("entries") or [{}]
    flag_overrides = {field_: f[flag] for flag, field_ in _FLAG_FIELDS.items() if flag in f}
    if "mutation_prob" in f:
        flag_overrides["mutation_probability"] = f["mutation_prob"]

    entries = []
    for raw in raw_entries:
        raw = dict(raw)
        for key in ("problem", "objectives", "model", "strategy", "seed"):
            if key in f:
                raw[key] = f[key]
        if f.get("baseline"):
            raw["baseline"] = True
        if "problem" not in raw:
            raise ConfigurationError(f"no problem given; choose from: {', '.join(sorted(REGISTRY))}")
        raw["overrides"] = {**raw.get("overrides", {}), **flag_overrides}
        entries.append(_entry_from_mapping(raw, defaults))

    plan = ExperimentPlan(
        entries=entries,
        output_dir=Path(f.get("out", doc.get("output_dir", "results"))),
        repetitions=int(f.get("runs", doc.get("repetitions", 1))),
    )
    if plan.repetitions < 1:
        raise ConfigurationError("repetitions must be at least 1")
    for entry in plan.entries:
        entry.config(entry.seed)  # validates every resolved setting
    return plan


def run_entry(entry: PlanEntry, seed: int) -> RunResult:
    problem = get_problem(entry.problem, entry.objectives)
    indicator = get_spec(entry.problem).indicator
    config = entry.config(seed)
    if not entry.baseline:
        return run(problem, config, indicator=indicator)
    parts = [
        single_task_baseline(task, config, indicator=indicator, task_index=i + 1, name=problem.name)
        for i, task in enumerate(problem.tasks)
    ]
    merged = parts[0]
    merged.trace = parts[0].trace + parts[1].trace
    merged.archive_objectives += parts[1].archive_objectives
    merged.archive_genotypes += parts[1].archive_genotypes
    merged.final_indicator += parts[1].final_indicator
    merged.evaluations += parts[1].evaluations
    merged.wall_time += parts[1].wall_time
    return merged


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_trace(result: RunResult, path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for row in sorted(result.trace, key=lambda r: (r.generation, r.task)):
            writer.writerow([_fmt(v) for v in row.as_tuple()])


def write_archive(F: np.ndarray, path: Path) -> None:
    with path.open("w") as fh:
        for row in F:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def write_run(result: RunResult, entry: PlanEntry, out_dir: Path) -> Path:
    stem = f"{entry.tag}_seed{result.seed}"
    summary = result.to_dict() | {
        "entry": {
            "problem": entry.problem,
            "objectives": entry.objectives,
            "model": entry.model.value,
            "strategy": entry.strategy.value,
            "baseline": entry.baseline,
        },
        "average_error": [None if not np.isfinite(v) else v for v in result.average_errors()],
        "final_models": result.final_models,
    }
    (out_dir / f"{stem}.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_trace(result, out_dir / f"{stem}_trace.csv")
    for t, F in enumerate(result.archive_objectives, start=1):
        write_archive(F, out_dir / f"{stem}_archive_t{t}.txt")
    return out_dir / f"{stem}.json"


def _print_table(rows: list[tuple], stream: TextIO) -> None:
    header = ("entry", "task", "runs", "median")
    cells = [header] + [(r[0], str(r[1]), str(r[2]), f"{r[3]:.4e}") for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    for c in cells:
        stream.write("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip() + "\n")


def execute(plan: ExperimentPlan, stream: TextIO = sys.stdout) -> int:
    """Run every entry ``repetitions`` times (seeds ``seed, seed+1, ...``)."""
    plan.output_dir.mkdir(parents=True, exist_ok=True)
    failed = False
    summary_rows, table = [], []
    for entry in plan.entries:
        finals: dict[int, list[float]] = {}
        for rep in range(plan.repetitions):
            seed = entry.seed + rep
            try:
                result = run_entry(entry, seed)
            except Exception as exc:  # noqa: BLE001 - record and continue with the rest
                log.error("entry %s seed %d failed: %s", entry.tag, seed, exc)
                failed = True
                continue
            write_run(result, entry, plan.output_dir)
            for t, v in enumerate(result.final_indicator, start=1):
                finals.setdefault(t, []).append(v)
        for t, values in sorted(finals.items()):
            med = statistics.median(values)
            summary_rows.append(
                (entry.problem, entry.objectives, entry.model.value, entry.strategy.value, entry.baseline, t, len(values), med)
            )
            table.append((entry.tag, t, len(values), med))
    with (plan.output_dir / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary_rows:
            writer.writerow([_fmt(v) for v in row])
    _print_table(table, stream)
    return EXIT_PARTIAL if failed else EXIT_OK


def diagnostics(plan: ExperimentPlan, models: list[ModelKind] | None = None, stream: TextIO = sys.stdout) -> int:
    """Average fitting error per (model, problem, task), written to diagnostics.csv.

    Each entry is rerun once per model kind; with several repetitions the
    reported value is the mean of the per-run averages.
    """
    models = models or list(ModelKind)
    plan.output_dir.mkdir(parents=True, exist_ok=True)
    rows, failed = [], False
    for kind in models:
        for entry in plan.entries:
            entry_k = replace(entry, model=kind)
            per_task: dict[int, list[float]] = {}
            for rep in range(plan.repetitions):
                try:
                    result = run_entry(entry_k, entry.seed + rep)
                except Exception as exc:  # noqa: BLE001
                    log.error("diagnostics %s seed %d failed: %s", entry_k.tag, entry.seed + rep, exc)
                    failed = True
                    continue
                for t, e in enumerate(result.average_errors(), start=1):
                    per_task.setdefault(t, []).append(e)
            for t, values in sorted(per_task.items()):
                rows.append((kind.value, entry.problem, entry.objectives, t, len(values), float(np.mean(values))))
    path = plan.output_dir / "diagnostics.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAGNOSTIC_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    for row in rows:
        stream.write(f"{row[0]:<12} {row[1]:<10} n={row[2]:<3} task {row[3]}  e_avg={row[5]:.4f}\n")
    return EXIT_PARTIAL if failed else EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON plan file")
    p.add_argument("--problem", help=f"one of: {', '.join(sorted(REGISTRY))}")
    p.add_argument("--objectives", type=int)
    p.add_argument("--model", help=f"one of: {', '.join(k.value for k in ModelKind)}")
    p.add_argument("--strategy", help=f"one of: {', '.join(s.value for s in TransferStrategy)}")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, help="repetitions per entry")
    p.add_argument("--budget", type=int, help="maximal function evaluations")
    p.add_argument("--generations", type=int)
    p.add_argument("--pop-size", type=int)
    p.add_argument("--scale-factor", type=float)
    p.add_argument("--mutation-prob", help="a number, '1/N' (default) or '1/D'")
    p.add_argument("--indicator", choices=("igd", "igd+"))
    p.add_argument("--ref-points", type=int, help="reference-set size for the indicator")
    p.add_argument("--out", help="output directory")
    p.add_argument("--baseline", action="store_true", default=None, help="run single-task NSGA-II instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emtpd", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="execute an experiment plan"))
    _add_run_flags(sub.add_parser("diagnostics", help="average fitting error for every model kind"))
    sim = sub.add_parser("similarity", help="rank-correlation similarity of a problem's two tasks")
    sim.add_argument("--problem", required=True)
    sim.add_argument("--objectives", type=int)
    sim.add_argument("--samples", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None, stream: TextIO = sys.stdout) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "similarity":
            problem = get_problem(args.problem, args.objectives)
            sim = similarity(problem, args.samples, np.random.default_rng(args.seed))
            stream.write(f"{problem.name} sim={sim:.4f} band={classify_similarity(sim)}\n")
            return EXIT_OK
        flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
        plan = parse_config(args.config, flags)
    except (ConfigurationError, ValueError) as exc:
        sys.stderr.write(f"emtpd: error: {exc}\n")
        return EXIT_USAGE
    if args.command == "diagnostics":
        return diagnostics(plan, stream=stream)
    return execute(plan, stream=stream)


if __name__ == "__main__":
    sys.exit(main())
