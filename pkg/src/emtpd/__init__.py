"""Evolutionary multi-tasking with probabilistic-distribution knowledge transfer."""

from .core import (
    ConfigurationError,
    DataError,
    Individual,
    ModelError,
    ModelKind,
    MultiTaskProblem,
    RunConfig,
    TaskDefinition,
    TransferStrategy,
    decode,
    encode,
    initialize_population,
    split_population,
)
from .evolve import RunError, RunResult, TraceRow, run, single_task_baseline
from .metrics import ReferenceSet, classify_similarity, igd, igd_plus, similarity
from .probmodel import FittedModel, average_error, fit, fitting_error, mode, product_argmax
from .problems import ProblemSpec, build_mtmaop, get_problem, maf_evaluate, register, shift_wrapper, toy_problem

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DataError",
    "FittedModel",
    "Individual",
    "ModelError",
    "ModelKind",
    "MultiTaskProblem",
    "ReferenceSet",
    "RunConfig",
    "RunError",
    "RunResult",
    "TaskDefinition",
    "TraceRow",
    "TransferStrategy",
    "average_error",
    "build_mtmaop",
    "classify_similarity",
    "decode",
    "encode",
    "fit",
    "fitting_error",
    "get_problem",
    "igd",
    "igd_plus",
    "initialize_population",
    "maf_evaluate",
    "mode",
    "product_argmax",
    "ProblemSpec",
    "register",
    "run",
    "shift_wrapper",
    "similarity",
    "single_task_baseline",
    "split_population",
    "toy_problem",
]
