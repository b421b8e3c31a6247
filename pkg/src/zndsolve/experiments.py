"""Built-in benchmark problems and reproducible experiment runs.

Three time-variant conjugate matrix equations with known exact solutions
are registered here: two well-conditioned large-diagonal cases (example1,
example2) and one small-coefficient case (example3) whose real embedding
loses diagonal dominance.  ``run`` integrates a chosen model on a chosen
problem from a seeded random initial state; ``compare`` aligns several such
runs on a shared grid.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .clinalg import compose
from .dynamics import build_con_cznd1, build_con_cznd2, decode, system_m2
from .integrator import IntegratorConfig, Trajectory, integrate
from .problem import TimeVariantProblem

__all__ = [
    "MODELS",
    "ComparabilityError",
    "RunConfig",
    "RunSummary",
    "RunResult",
    "ComparisonResult",
    "register_examples",
    "resolve_problem",
    "run",
    "compare",
    "diagonal_dominance_metric",
    "CONVERGENCE_THRESHOLD",
]

MODELS = ("con_cznd1", "con_cznd2")

# Residual level counted as "converged" in run summaries.
CONVERGENCE_THRESHOLD = 1e-2

_DOMINANCE_EPS = 1e-12
_DOMINANCE_CAP = 1e12


class ComparabilityError(ValueError):
    """Runs requested for comparison do not share a common baseline."""


def _example1() -> TimeVariantProblem:
    def f_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[600 + s, c], [c, 400 + s]], [[c, s], [s, c]])

    def df_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[c, -s], [-s, c]], [[-s, c], [c, -s]])

    def a_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[s, c, 1], [-c, 0, -s], [1, 0, 1]],
            [[c, -s, 0], [s, 1, c], [0, 1, 0]],
        )

    def da_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[c, -s, 0], [s, 0, -c], [0, 0, 0]],
            [[-s, -c, 0], [c, 0, -s], [0, 0, 0]],
        )

    def c_of(t):
        s, c = math.sin(t), math.cos(t)
        s2 = math.sin(2 * t)
        cs = c * s
        cc = c * c
        real = [
            [600 * s - 4 * cs + 2 * cc - 1, s2 + 400 * c - 2],
            [s - 599 * c - cs + cc, -c - 399 * s + cs + cc - 1],
            [599 - s + c, -c + s],
        ]
        imag = [
            [600 * s - 2 * cc + 2, s2 + 400 * c + 1],
            [-600 * c - 3 * cs + cc - 2, -400 * s - 3 * cs - cc - 1],
            [s + 3 * c, c + 3 * s + 401],
        ]
        return compose(real, imag)

    def dc_of(t):
        s, c = math.sin(t), math.cos(t)
        c2 = math.cos(2 * t)
        cs = c * s
        dd = c * c - s * s
        real = [
            [600 * c - 4 * dd - 4 * cs, 2 * c2 - 400 * s],
            [c + 599 * s - dd - 2 * cs, s - 399 * c + dd - 2 * cs],
            [-c - s, s + c],
        ]
        imag = [
            [600 * c + 4 * cs, 2 * c2 - 400 * s],
            [600 * s - 3 * dd - 2 * cs, -400 * c - 3 * dd + 2 * cs],
            [c - 3 * s, -s + 3 * c],
        ]
        return compose(real, imag)

    def exact_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[s, c], [-c, -s], [1, 0]],
            [[s, c], [-c, -s], [0, 1]],
        )

    return TimeVariantProblem(
        name="example1", m=3, n=2,
        f_of=f_of, a_of=a_of, c_of=c_of,
        df_of=df_of, da_of=da_of, dc_of=dc_of,
        exact_of=exact_of,
    )


def _example2() -> TimeVariantProblem:
    def f_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[400 + s, c, c], [c, 200 + s, c], [c, c, 300 + s]],
            [[c, s, s], [s, c, s], [s, s, c]],
        )

    def df_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[c, -s, -s], [-s, c, -s], [-s, -s, c]],
            [[-s, c, c], [c, -s, c], [c, c, -s]],
        )

    def a_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[s, -c], [c, -s]], [[c, -s], [s, -c]])

    def da_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[c, s], [-s, -c]], [[-s, -c], [c, s]])

    def c_of(t):
        s, c = math.sin(t), math.cos(t)
        cs = c * s
        cc = c * c
        real = [
            [c + 400 * s - 4 * cs, -2 + 201 * c, s + 2 * cc + 299],
            [-400 * c - s - 4 * cs, -201 * s - 2, -c - 2 * cc + 1],
        ]
        imag = [
            [401 * s + 2, s + 4 * cs + 200 * c, -c + 2 * cs + 1],
            [-399 * c - 2, c - 200 * s - 4 * cs, -s - 2 * cs + 299],
        ]
        return compose(real, imag)

    def dc_of(t):
        s, c = math.sin(t), math.cos(t)
        cs = c * s
        dd = c * c - s * s
        real = [
            [-s + 400 * c - 4 * dd, -201 * s, c - 4 * cs],
            [400 * s - c - 4 * dd, -201 * c, s + 4 * cs],
        ]
        imag = [
            [401 * c, c + 4 * dd - 200 * s, s + 2 * dd],
            [399 * s, -s - 200 * c - 4 * dd, -c - 2 * dd],
        ]
        return compose(real, imag)

    def exact_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[s, c, 1], [-c, -s, 0]],
            [[s, c, 0], [-c, -s, 1]],
        )

    return TimeVariantProblem(
        name="example2", m=2, n=3,
        f_of=f_of, a_of=a_of, c_of=c_of,
        df_of=df_of, da_of=da_of, dc_of=dc_of,
        exact_of=exact_of,
    )


def _example3() -> TimeVariantProblem:
    def f_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[6 + s, c], [c, 4 + s]], [[c, s], [s, c]])

    def df_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[c, -s], [-s, c]], [[-s, c], [c, -s]])

    def a_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[c, s], [-s, c]], [[s, c], [c, -s]])

    def da_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose([[-s, c], [-c, -s]], [[c, -s], [-s, -c]])

    def c_of(t):
        s, c = math.sin(t), math.cos(t)
        s2 = math.sin(2 * t)
        cs = c * s
        cc = c * c
        real = [
            [2 * cc - 2 * cs + 6 * s, 4 * c + 2 * cs - 2 * cc],
            [-2 * s2 - 6 * c + 2, 2 * s2 - 4 * s - 2],
        ]
        imag = [
            [2 * cc + 2 * cs + 6 * s, 4 * c + 2 * cs + 2 * cc],
            [-2 * s2 - 6 * c - 2, -2 * s2 - 4 * s - 2],
        ]
        return compose(real, imag)

    def dc_of(t):
        s, c = math.sin(t), math.cos(t)
        c2 = math.cos(2 * t)
        cs = c * s
        dd = c * c - s * s
        real = [
            [-4 * cs - 2 * dd + 6 * c, -4 * s + 2 * dd + 4 * cs],
            [-4 * c2 + 6 * s, 4 * c2 - 4 * c],
        ]
        imag = [
            [-4 * cs + 2 * dd + 6 * c, -4 * s + 2 * dd - 4 * cs],
            [-4 * c2 + 6 * s, -4 * c2 - 4 * c],
        ]
        return compose(real, imag)

    def exact_of(t):
        s, c = math.sin(t), math.cos(t)
        return compose(
            [[s, c], [-c, -s]],
            [[s, c], [-c, -s]],
        )

    return TimeVariantProblem(
        name="example3", m=2, n=2,
        f_of=f_of, a_of=a_of, c_of=c_of,
        df_of=df_of, da_of=da_of, dc_of=dc_of,
        exact_of=exact_of,
    )


_BUILDERS = {
    "example1": _example1,
    "example2": _example2,
    "example3": _example3,
}


def register_examples() -> dict[str, TimeVariantProblem]:
    """Build all built-in problems and run each through its consistency gate.

    Raises
    ------
    TranscriptionError
        If any problem's exact solution fails to satisfy its equation or an
        analytic derivative disagrees with finite differences.
    """
    registry = {}
    for name, builder in _BUILDERS.items():
        prob = builder()
        prob.self_check()
        registry[name] = prob
    return registry


def resolve_problem(example: str | TimeVariantProblem) -> TimeVariantProblem:
    """Map an example name (or pass a problem through) to a problem instance."""
    if isinstance(example, TimeVariantProblem):
        return example
    try:
        return _BUILDERS[example]()
    except KeyError:
        known = ", ".join(sorted(_BUILDERS))
        raise KeyError(f"unknown example {example!r}; registered: {known}") from None


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one solver run bit-for-bit."""

    example: str = "example1"
    model: str = "con_cznd1"
    gamma: float = 1.0
    seed: int = 0
    init_range: tuple[float, float] = (-5.0, 5.0)
    span: tuple[float, float] = (0.0, 10.0)
    samples: int = 1001
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if not (np.isfinite(self.gamma) and self.gamma > 0.0):
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        lo, hi = self.init_range
        if not lo < hi:
            raise ValueError(f"init_range must satisfy low < high, got {self.init_range}")
        t0, t1 = self.span
        if not (0.0 <= t0 < t1):
            raise ValueError(f"span must satisfy 0 <= start < end, got {self.span}")
        if self.samples < 2:
            raise ValueError(f"samples must be at least 2, got {self.samples}")


@dataclass(frozen=True)
class RunSummary:
    """Headline convergence numbers of one run.

    Solution-residual fields are None when the problem has no exact
    solution.  max_residual_late covers the second half of the span (for the
    default span, t in [5, 10]); time_to_threshold is the first sample time
    with solution residual at or below CONVERGENCE_THRESHOLD, or None if
    never reached.
    """

    terminal_residual: float | None
    max_residual_late: float | None
    time_to_threshold: float | None
    terminal_equation_residual: float


@dataclass(frozen=True)
class RunResult:
    """One run's config echo, sampled trajectory and residual histories."""

    config: RunConfig
    problem: TimeVariantProblem
    trajectory: Trajectory
    residuals: np.ndarray | None
    equation_residuals: np.ndarray
    summary: RunSummary


def initial_state(problem: TimeVariantProblem, config: RunConfig) -> np.ndarray:
    """Seeded random initial state, uniform over init_range per entry.

    Uses the counter-based Philox generator, so draws depend only on the
    seed, not on process history.
    """
    rng = np.random.Generator(np.random.Philox(key=config.seed))
    lo, hi = config.init_range
    return rng.uniform(lo, hi, 2 * problem.m * problem.n)


def run(config: RunConfig, problem: TimeVariantProblem | None = None) -> RunResult:
    """Integrate one model on one problem and collect residual histories.

    Parameters
    ----------
    config : RunConfig
    problem : TimeVariantProblem, optional
        Overrides the registry lookup of config.example, letting callers
        run user-defined problems through the same pipeline.

    Returns
    -------
    RunResult
        Residual arrays align one-to-one with the sample grid; solution
        residuals are None when the problem lacks an exact solution.
    """
    if problem is None:
        problem = resolve_problem(config.example)
    z0 = initial_state(problem, config)
    build = build_con_cznd1 if config.model == "con_cznd1" else build_con_cznd2
    model_field = build(problem, config.gamma)
    times = np.linspace(config.span[0], config.span[1], config.samples)
    try:
        trajectory = integrate(
            model_field, z0, config.span, times, config=config.integrator
        )
    except (ArithmeticError, RuntimeError) as exc:
        # Keep the original exception type (callers dispatch on it) but
        # stamp the failing run configuration onto the message.
        note = (
            f" [run: example={problem.name} model={config.model} "
            f"gamma={config.gamma:g} seed={config.seed}]"
        )
        exc.args = (str(exc) + note,) + exc.args[1:]
        raise

    m, n = problem.m, problem.n
    eq_res = np.array(
        [
            problem.equation_residual(decode(state, m, n), t)
            for t, state in zip(trajectory.times, trajectory.states)
        ]
    )
    if problem.exact_of is not None:
        res = np.array(
            [
                problem.residual(decode(state, m, n), t)
                for t, state in zip(trajectory.times, trajectory.states)
            ]
        )
        if not np.isfinite(res).all():
            raise ValueError(f"{problem.name}: non-finite residuals in run output")
        late = res[times >= (config.span[0] + config.span[1]) / 2.0]
        below = np.nonzero(res <= CONVERGENCE_THRESHOLD)[0]
        summary = RunSummary(
            terminal_residual=float(res[-1]),
            max_residual_late=float(late.max()),
            time_to_threshold=float(times[below[0]]) if below.size else None,
            terminal_equation_residual=float(eq_res[-1]),
        )
    else:
        res = None
        summary = RunSummary(
            terminal_residual=None,
            max_residual_late=None,
            time_to_threshold=None,
            terminal_equation_residual=float(eq_res[-1]),
        )
    return RunResult(
        config=config,
        problem=problem,
        trajectory=trajectory,
        residuals=res,
        equation_residuals=eq_res,
        summary=summary,
    )


@dataclass(frozen=True)
class ComparisonResult:
    """Several runs on a shared problem, seed and grid, plus head-to-head ratios.

    Ratios and deltas are taken against the first run as baseline; a run
    compared with itself therefore yields ratios of exactly 1 and deltas of
    exactly 0.  time_to_threshold deltas are None when either run never
    reaches the threshold.
    """

    labels: tuple[str, ...]
    runs: tuple[RunResult, ...]
    terminal_ratios: tuple[float, ...]
    max_residual_late_ratios: tuple[float, ...]
    time_to_threshold_deltas: tuple[float | None, ...]


def _labels_for(configs: Sequence[RunConfig]) -> tuple[str, ...]:
    """Shortest labels that distinguish the runs (model, then gamma, then index)."""
    models = {c.model for c in configs}
    gammas = {c.gamma for c in configs}
    if len(models) == len(configs):
        return tuple(c.model for c in configs)
    if len(gammas) == len(configs):
        return tuple(f"gamma={c.gamma:g}" for c in configs)
    return tuple(
        f"{c.model},gamma={c.gamma:g}#{i}" for i, c in enumerate(configs)
    )


def compare(configs: Sequence[RunConfig]) -> ComparisonResult:
    """Run several configs and align their residual histories.

    All configs must share example, seed, span and sample count so the
    histories are pointwise comparable; anything else raises
    ComparabilityError.  Problems must have exact solutions.
    """
    configs = list(configs)
    if len(configs) < 2:
        raise ComparabilityError("compare needs at least two run configs")
    baseline = configs[0]
    for attr in ("example", "seed", "span", "samples"):
        values = {getattr(c, attr) for c in configs}
        if len(values) > 1:
            raise ComparabilityError(
                f"runs are not comparable: {attr} differs across configs ({values})"
            )
    results = tuple(run(c) for c in configs)
    for r in results:
        if r.residuals is None:
            raise ComparabilityError(
                f"{r.problem.name}: comparison requires an exact solution"
            )
    base = results[0].summary
    terminal = tuple(
        r.summary.terminal_residual / base.terminal_residual for r in results
    )
    late = tuple(
        r.summary.max_residual_late / base.max_residual_late for r in results
    )
    deltas = tuple(
        None
        if r.summary.time_to_threshold is None or base.time_to_threshold is None
        else r.summary.time_to_threshold - base.time_to_threshold
        for r in results
    )
    return ComparisonResult(
        labels=_labels_for(configs),
        runs=results,
        terminal_ratios=terminal,
        max_residual_late_ratios=late,
        time_to_threshold_deltas=deltas,
    )


def diagonal_dominance_metric(
    example: str | TimeVariantProblem, t: float
) -> float:
    """Worst-row diagonal dominance of the model-2 system matrix at time t.

    For each row, the diagonal magnitude is divided by the off-diagonal
    absolute sum (with a 1e-12 guard term); the minimum over rows is
    returned, capped at 1e12.  Values above 1 indicate strict diagonal
    dominance, values below 1 its absence.
    """
    problem = resolve_problem(example)
    w = system_m2(problem, t).w
    diag = np.abs(np.diag(w))
    off = np.abs(w).sum(axis=1) - diag
    metric = float(np.min(diag / (off + _DOMINANCE_EPS)))
    return min(metric, _DOMINANCE_CAP)
