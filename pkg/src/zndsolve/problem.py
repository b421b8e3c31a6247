"""Problem container for time-variant conjugate matrix equations.

A problem bundles the coefficient trajectories of

    X(t) F(t) - A(t) conj(X(t)) = C(t)

with their time derivatives and, when known, the exact solution X*(t).
F is n-by-n, A is m-by-m, C and X are m-by-n, all complex and smooth in t.
Time is restricted to t >= 0.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .clinalg import ShapeError, as_matrix, frobenius

__all__ = [
    "DomainError",
    "NoExactSolutionError",
    "TranscriptionError",
    "Coefficients",
    "TimeVariantProblem",
    "finite_difference",
]

# Shape spot-checks at construction sample these times; cheap but catches
# transposed or mis-sized coefficient functions immediately.
_PROBE_TIMES = (0.0, 0.7, 3.1)

_FD_STEP = 1e-6


class DomainError(ValueError):
    """Evaluation requested outside the problem's time domain t >= 0."""


class NoExactSolutionError(LookupError):
    """A solution-error query was made on a problem without exact_of."""


class TranscriptionError(ValueError):
    """A registered problem failed its own consistency gate."""


class Coefficients(NamedTuple):
    """Coefficient matrices and their derivatives at one time instant."""

    f: np.ndarray
    a: np.ndarray
    c: np.ndarray
    df: np.ndarray
    da: np.ndarray
    dc: np.ndarray


def finite_difference(
    fn: Callable[[float], np.ndarray], h: float = _FD_STEP
) -> Callable[[float], np.ndarray]:
    """Central-difference derivative of a matrix-valued function.

    O(h^2) accurate; the returned callable evaluates fn at t - h, so fn must
    tolerate arguments slightly below the domain boundary.
    """

    def d_fn(t: float) -> np.ndarray:
        return (np.asarray(fn(t + h)) - np.asarray(fn(t - h))) / (2.0 * h)

    return d_fn


@dataclass(frozen=True)
class TimeVariantProblem:
    """One equation instance: coefficient callables plus optional exact solution.

    Parameters
    ----------
    name : str
        Identifier used in error messages and CLI listings.
    m, n : int
        Solution shape; A is m-by-m, F is n-by-n, C and X are m-by-n.
    f_of, a_of, c_of : callable
        Coefficient trajectories, each mapping a float time to a complex
        matrix of the fixed shape above.
    df_of, da_of, dc_of : callable, optional
        Analytic time derivatives.  Omitted ones fall back to central finite
        differences with step 1e-6.
    exact_of : callable, optional
        Known exact solution X*(t); required only for solution-error queries.

    Instances are frozen: coefficient callables must be pure so that
    evaluation is safe from any thread.
    """

    name: str
    m: int
    n: int
    f_of: Callable[[float], np.ndarray]
    a_of: Callable[[float], np.ndarray]
    c_of: Callable[[float], np.ndarray]
    df_of: Callable[[float], np.ndarray] | None = None
    da_of: Callable[[float], np.ndarray] | None = None
    dc_of: Callable[[float], np.ndarray] | None = None
    exact_of: Callable[[float], np.ndarray] | None = field(default=None)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ShapeError(f"matrix dimensions must be positive, got m={self.m} n={self.n}")
        if self.df_of is None:
            object.__setattr__(self, "df_of", finite_difference(self.f_of))
        if self.da_of is None:
            object.__setattr__(self, "da_of", finite_difference(self.a_of))
        if self.dc_of is None:
            object.__setattr__(self, "dc_of", finite_difference(self.c_of))
        for t in _PROBE_TIMES:
            self._shapes_at(t)

    def _shapes_at(self, t: float):
        """Evaluate every callable at t and reject wrong shapes."""
        expected = {
            "f_of": (self.n, self.n),
            "a_of": (self.m, self.m),
            "c_of": (self.m, self.n),
            "df_of": (self.n, self.n),
            "da_of": (self.m, self.m),
            "dc_of": (self.m, self.n),
        }
        if self.exact_of is not None:
            expected["exact_of"] = (self.m, self.n)
        for attr, shape in expected.items():
            got = as_matrix(getattr(self, attr)(t))
            if got.shape != shape:
                raise ShapeError(
                    f"{self.name}: {attr}({t}) returned shape {got.shape}, "
                    f"expected {shape}"
                )

    def _check_time(self, t: float) -> float:
        t = float(t)
        if not np.isfinite(t) or t < 0.0:
            raise DomainError(f"{self.name}: tau={t} outside domain tau >= 0")
        return t

    def evaluate(self, t: float) -> Coefficients:
        """All six coefficient matrices at time t."""
        t = self._check_time(t)
        return Coefficients(
            f=as_matrix(self.f_of(t)),
            a=as_matrix(self.a_of(t)),
            c=as_matrix(self.c_of(t)),
            df=as_matrix(self.df_of(t)),
            da=as_matrix(self.da_of(t)),
            dc=as_matrix(self.dc_of(t)),
        )

    def exact(self, t: float) -> np.ndarray:
        """Exact solution at time t; raises if the problem has none."""
        t = self._check_time(t)
        if self.exact_of is None:
            raise NoExactSolutionError(
                f"{self.name}: no exact solution registered"
            )
        return as_matrix(self.exact_of(t))

    def residual(self, x, t: float) -> float:
        """Solution error ||X - X*(t)||_F against the exact solution."""
        x = as_matrix(x)
        x_star = self.exact(t)
        if x.shape != x_star.shape:
            raise ShapeError(
                f"{self.name}: candidate shape {x.shape} does not match "
                f"solution shape {x_star.shape}"
            )
        return frobenius(x - x_star)

    def equation_residual(self, x, t: float) -> float:
        """Equation error ||X F - A conj(X) - C||_F at time t."""
        t = self._check_time(t)
        x = as_matrix(x)
        if x.shape != (self.m, self.n):
            raise ShapeError(
                f"{self.name}: candidate shape {x.shape} does not match "
                f"({self.m}, {self.n})"
            )
        f = as_matrix(self.f_of(t))
        a = as_matrix(self.a_of(t))
        c = as_matrix(self.c_of(t))
        return frobenius(x @ f - a @ np.conjugate(x) - c)

    def self_check(
        self,
        times=None,
        equation_tol: float = 1e-10,
        derivative_tol: float = 1e-7,
    ):
        """Consistency gate for registered problems.

        Verifies that the exact solution satisfies the equation at each
        sampled time (within ``equation_tol``) and that analytic derivatives
        match central finite differences (within ``derivative_tol`` max-abs).

        Raises
        ------
        TranscriptionError
            Naming this problem and the worst offending time.
        """
        if times is None:
            times = np.linspace(0.0, 10.0, 11)
        if self.exact_of is not None:
            residuals = [
                self.equation_residual(self.exact_of(t), t) for t in times
            ]
            worst = int(np.argmax(residuals))
            if residuals[worst] > equation_tol:
                raise TranscriptionError(
                    f"{self.name}: exact solution violates the equation, "
                    f"residual {residuals[worst]:.3e} at tau={times[worst]:.4f} "
                    f"(tolerance {equation_tol:.1e})"
                )
        eps = np.finfo(np.float64).eps
        for attr, base in (("df_of", self.f_of), ("da_of", self.a_of), ("dc_of", self.c_of)):
            fd = finite_difference(base)
            for t in times:
                gap = np.max(np.abs(getattr(self, attr)(t) - fd(t)))
                # The difference quotient carries rounding noise of order
                # eps * |f| / h, which exceeds derivative_tol once entries
                # reach ~1e3; grant that allowance explicitly so the gate
                # stays sharp for order-one coefficients.
                scale = float(np.max(np.abs(base(t))))
                tol = derivative_tol + 4.0 * eps * scale / _FD_STEP
                if gap > tol:
                    raise TranscriptionError(
                        f"{self.name}: {attr} disagrees with finite "
                        f"differences by {gap:.3e} at tau={t:.4f} "
                        f"(tolerance {tol:.1e})"
                    )
