"""Adaptive explicit Runge-Kutta integration with dense output.

Implements the Dormand-Prince 5(4) embedded pair with the standard
fourth-order continuous extension, an error-per-step acceptance test
(componentwise rel_tol * |y| + abs_tol), and a PI step-size controller.
The integration is deterministic: identical inputs produce bit-identical
trajectories.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .clinalg import NumericalError

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "StiffnessError",
    "StepBudgetError",
    "integrate",
]

# Dormand-Prince 5(4) tableau.  Stage 7 doubles as the first stage of the
# next step (FSAL), so an accepted step costs six new evaluations.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# Difference between the fifth- and embedded fourth-order weights.
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Quartic interpolation weights b_i(theta) = theta * P_i(theta); at theta=1
# they reproduce the fifth-order weights, so the interpolant is continuous
# across steps.
_BI = np.array(
    [
        [1.0, -183 / 64, 37 / 12, -145 / 128],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 1500 / 371, -1000 / 159, 1000 / 371],
        [0.0, -125 / 32, 125 / 12, -375 / 64],
        [0.0, 9477 / 3392, -729 / 106, 25515 / 6784],
        [0.0, -11 / 7, 11 / 3, -55 / 28],
        [0.0, 3 / 2, -4.0, 5 / 2],
    ]
)

_MIN_STEP = 1e-14
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents for a fifth-order error estimate.
_BETA1 = 0.7 / 5.0
_BETA2 = 0.4 / 5.0


class StiffnessError(NumericalError):
    """Step size underflowed; the problem is too stiff for an explicit method."""

    def __init__(self, t: float, step: float):
        super().__init__(
            f"step size underflow ({step:.3e} < {_MIN_STEP:.0e}) at tau={t:.6g}; "
            f"problem appears too stiff for this explicit integrator"
        )
        self.t = t
        self.step = step


class StepBudgetError(RuntimeError):
    """The step-attempt budget was exhausted before reaching the span end."""

    def __init__(self, t: float, max_steps: int):
        super().__init__(
            f"exceeded max_steps={max_steps} at tau={t:.6g} before reaching "
            f"the end of the integration span"
        )
        self.t = t
        self.max_steps = max_steps


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step limits for :func:`integrate`.

    rel_tol and abs_tol enter the componentwise acceptance test
    |error_i| <= rel_tol * |y_i| + abs_tol.  max_steps bounds the total
    number of step attempts, accepted or rejected.
    """

    rel_tol: float = 1e-3
    abs_tol: float = 1e-6
    max_step: float = 0.1
    initial_step: float = 1e-3
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "initial_step"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if self.rel_tol < 1e-14:
            raise ValueError(f"rel_tol={self.rel_tol} is below hardware precision")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of one integration run.

    times and states align row-for-row; metadata counts the work done.
    """

    times: np.ndarray
    states: np.ndarray
    step_count: int
    rejected_count: int
    rhs_evaluations: int


def _validate_samples(sample_times, t0: float, t1: float) -> np.ndarray:
    times = np.asarray(sample_times, dtype=np.float64)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("sample_times must be a 1-D array with at least two entries")
    if not np.all(np.diff(times) > 0.0):
        raise ValueError("sample_times must be strictly ascending")
    if times[0] != t0 or times[-1] != t1:
        raise ValueError(
            f"sample_times must start at {t0} and end at {t1}, "
            f"got [{times[0]}, {times[-1]}]"
        )
    return times


def integrate(
    field: Callable[[float, np.ndarray], np.ndarray],
    y0,
    span: tuple[float, float],
    sample_times,
    config: IntegratorConfig | None = None,
    on_step: Callable[[float, np.ndarray], None] | None = None,
) -> Trajectory:
    """Integrate zdot = field(t, z) over span, sampling at sample_times.

    Parameters
    ----------
    field : callable
        Right-hand side; must return a finite 1-D array matching y0.
    y0 : array_like
        Initial state at span[0].
    span : (float, float)
        Forward time window; span[1] must exceed span[0].
    sample_times : array_like
        Strictly ascending output grid covering exactly [span[0], span[1]].
        States at interior grid points come from the fourth-order dense
        output; grid points that coincide with an accepted step endpoint
        return the stepped state exactly.
    config : IntegratorConfig, optional
    on_step : callable, optional
        Diagnostics hook invoked as on_step(t, y) after every accepted step.

    Raises
    ------
    StiffnessError
        If the controller drives the step below 1e-14.
    StepBudgetError
        If config.max_steps step attempts do not reach span[1].
    NumericalError
        If the field produces non-finite values (raised here or propagated
        from the field itself).
    """
    if config is None:
        config = IntegratorConfig()
    t0, t1 = float(span[0]), float(span[1])
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 <= t0:
        raise ValueError(f"span must satisfy start < end, got ({t0}, {t1})")
    y = np.asarray(y0, dtype=np.float64).copy()
    if y.ndim != 1:
        raise ValueError(f"y0 must be 1-D, got ndim={y.ndim}")
    if not np.isfinite(y).all():
        raise NumericalError(f"non-finite initial state at tau={t0:.6g}")
    times = _validate_samples(sample_times, t0, t1)

    dim = y.size
    states = np.empty((times.size, dim))
    states[0] = y
    next_sample = 1

    k = np.empty((7, dim))
    k[0] = _eval_field(field, t0, y, dim)
    nfev = 1
    accepted = 0
    rejected = 0
    attempts = 0

    t = t0
    h = min(config.initial_step, config.max_step, t1 - t0)
    prev_ratio = 1.0
    just_rejected = False

    while t < t1:
        if h < _MIN_STEP:
            raise StiffnessError(t, h)
        h = min(h, config.max_step, t1 - t)
        # Snap the final step onto the span end so t never strands one ulp
        # short of t1 with an un-integrable sliver left over.
        is_final = h >= t1 - t
        if attempts >= config.max_steps:
            raise StepBudgetError(t, config.max_steps)
        attempts += 1

        for stage in range(1, 6):
            y_stage = y + h * (k[:stage].T @ _A[stage, :stage])
            k[stage] = _eval_field(field, t + _C[stage] * h, y_stage, dim)
        y_new = y + h * (k[:6].T @ _B[:6])
        t_new = t1 if is_final else t + h
        k[6] = _eval_field(field, t_new, y_new, dim)
        nfev += 6

        if not np.isfinite(y_new).all():
            raise NumericalError(f"non-finite state produced at tau={t_new:.6g}")
        err = h * (k.T @ _E)
        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = float(np.max(np.abs(err) / scale))
        if not np.isfinite(ratio):
            raise NumericalError(f"non-finite error estimate at tau={t_new:.6g}")

        if ratio > 1.0:
            rejected += 1
            just_rejected = True
            h *= max(_MIN_FACTOR, min(1.0, _SAFETY * ratio ** (-0.2)))
            continue

        accepted += 1
        if on_step is not None:
            on_step(t_new, y_new.copy())
        while next_sample < times.size and times[next_sample] <= t_new:
            ts = times[next_sample]
            if ts == t_new:
                states[next_sample] = y_new
            else:
                theta = (ts - t) / h
                weights = theta * (
                    _BI[:, 0]
                    + theta * (_BI[:, 1] + theta * (_BI[:, 2] + theta * _BI[:, 3]))
                )
                states[next_sample] = y + h * (k.T @ weights)
            next_sample += 1

        safe = max(ratio, 1e-10)
        factor = _SAFETY * safe ** (-_BETA1) * max(prev_ratio, 1e-10) ** _BETA2
        if just_rejected:
            factor = min(factor, 1.0)
            just_rejected = False
        h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        prev_ratio = safe

        y = y_new
        t = t_new
        k[0] = k[6]

    return Trajectory(
        times=times,
        states=states,
        step_count=accepted,
        rejected_count=rejected,
        rhs_evaluations=nfev,
    )


def _eval_field(field, t: float, y: np.ndarray, dim: int) -> np.ndarray:
    dy = np.asarray(field(t, y), dtype=np.float64)
    if dy.shape != (dim,):
        raise ValueError(
            f"field returned shape {dy.shape} at tau={t:.6g}, expected ({dim},)"
        )
    if not np.isfinite(dy).all():
        raise NumericalError(f"non-finite derivative at tau={t:.6g}")
    return dy
