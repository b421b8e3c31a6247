"""Zeroing-dynamics solvers for time-variant conjugate matrix equations.

The library solves X(t) F(t) - A(t) conj(X(t)) = C(t) for the complex
matrix trajectory X(t) by integrating one of two continuous zeroing-
dynamics models, and ships three benchmark problems with known exact
solutions plus a small experiment CLI (``zndsolve``).
"""

from .clinalg import (
    NumericalError,
    ShapeError,
    compose,
    conj,
    frobenius,
    herm,
    kron,
    pinv,
    transpose,
    unvec,
    vec,
    vec_axb,
)
from .dynamics import (
    ACTIVATIONS,
    LINEAR,
    Activation,
    build_con_cznd1,
    build_con_cznd2,
    decode,
    encode,
    error_m1,
    error_m2,
)
from .experiments import (
    MODELS,
    ComparabilityError,
    ComparisonResult,
    RunConfig,
    RunResult,
    RunSummary,
    compare,
    diagonal_dominance_metric,
    register_examples,
    resolve_problem,
    run,
)
from .integrator import (
    IntegratorConfig,
    StepBudgetError,
    StiffnessError,
    Trajectory,
    integrate,
)
from .problem import (
    DomainError,
    NoExactSolutionError,
    TimeVariantProblem,
    TranscriptionError,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ShapeError",
    "NumericalError",
    "compose",
    "conj",
    "herm",
    "transpose",
    "vec",
    "unvec",
    "kron",
    "vec_axb",
    "frobenius",
    "pinv",
    "TimeVariantProblem",
    "DomainError",
    "NoExactSolutionError",
    "TranscriptionError",
    "Activation",
    "LINEAR",
    "ACTIVATIONS",
    "encode",
    "decode",
    "error_m1",
    "error_m2",
    "build_con_cznd1",
    "build_con_cznd2",
    "IntegratorConfig",
    "Trajectory",
    "StiffnessError",
    "StepBudgetError",
    "integrate",
    "MODELS",
    "RunConfig",
    "RunSummary",
    "RunResult",
    "ComparisonResult",
    "ComparabilityError",
    "register_examples",
    "resolve_problem",
    "run",
    "compare",
    "diagonal_dominance_metric",
]
