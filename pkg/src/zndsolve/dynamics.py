"""Zeroing-dynamics vector fields for conjugate matrix equations.

Two constructions of the same design principle, differing in which error
signal is steered to zero:

* model 1 (``con_cznd1``) zeroes the matrix-valued equation error
  E(t) = X F - A conj(X) - C, differentiating the equation and embedding
  the resulting complex linear system into real block form at each step;
* model 2 (``con_cznd2``) first embeds the equation itself into a real
  linear system W(t) z = b(t) and zeroes the vector-valued error W z - b.

Both produce a real first-order ODE in z = [vec(X_r); vec(X_i)] suitable
for any explicit integrator.  The construction routes are kept separate on
purpose: agreement between them is checked by tests, not assumed.
"""

from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .clinalg import (
    NumericalError,
    ShapeError,
    as_matrix,
    herm,
    kron,
    pinv,
    vec,
    unvec,
)
from .problem import TimeVariantProblem

__all__ = [
    "Activation",
    "LINEAR",
    "ACTIVATIONS",
    "RealEmbedding",
    "M2System",
    "encode",
    "decode",
    "error_m1",
    "error_m2",
    "embedding_m1",
    "system_m2",
    "build_con_cznd1",
    "build_con_cznd2",
]


@dataclass(frozen=True)
class Activation:
    """Elementwise activation for the zeroing law.

    ``fn`` must be odd and monotonically increasing; it is applied to real
    arrays (model 1 applies it to the real and imaginary error parts
    separately).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]


LINEAR = Activation("linear", lambda e: e)

ACTIVATIONS: dict[str, Activation] = {"linear": LINEAR}


class RealEmbedding(NamedTuple):
    """Instantaneous real system W zdot = b for model 1."""

    w: np.ndarray
    b: np.ndarray


class M2System(NamedTuple):
    """Real embedding W z = b of the equation itself, with derivatives."""

    w: np.ndarray
    b: np.ndarray
    dw: np.ndarray
    db: np.ndarray


def encode(x) -> np.ndarray:
    """Pack a complex m-by-n matrix into the real state [vec(X_r); vec(X_i)]."""
    x = as_matrix(x)
    return np.concatenate([vec(x).real, vec(x).imag])


def decode(z, m: int, n: int) -> np.ndarray:
    """Unpack the real state vector back into the complex m-by-n matrix."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size != 2 * m * n:
        raise ShapeError(
            f"state vector has size {z.size}, expected {2 * m * n}"
        )
    half = m * n
    return unvec(z[:half] + 1j * z[half:], m, n)


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise ValueError(f"gamma must be a positive finite number, got {gamma}")
    return gamma


def _require_finite(arr: np.ndarray, what: str, t: float):
    if not np.isfinite(arr).all():
        raise NumericalError(f"non-finite entries in {what} at tau={t:.6g}")


def error_m1(problem: TimeVariantProblem, x, t: float) -> np.ndarray:
    """Matrix equation error E = X F - A conj(X) - C at time t."""
    x = as_matrix(x)
    f = as_matrix(problem.f_of(t))
    a = as_matrix(problem.a_of(t))
    c = as_matrix(problem.c_of(t))
    return x @ f - a @ np.conjugate(x) - c


def error_m2(problem: TimeVariantProblem, z, t: float) -> np.ndarray:
    """Vector equation error W(t) z - b(t) of the real embedding."""
    w, b, _, _ = system_m2(problem, t)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != b.shape:
        raise ShapeError(f"state size {z.size} does not match system size {b.size}")
    return w @ z - b


def _split_blocks(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Real block embedding of the complex operator z -> U z - V conj(z)."""
    return np.block(
        [
            [u.real - v.real, -(u.imag + v.imag)],
            [u.imag - v.imag, u.real + v.real],
        ]
    )


def embedding_m1(
    problem: TimeVariantProblem,
    t: float,
    x,
    gamma: float,
    activation: Activation = LINEAR,
) -> RealEmbedding:
    """Instantaneous model-1 system W zdot = b at state X and time t.

    Differentiating the equation gives
    Xdot F - A conj(Xdot) = Cdot + Adot conj(X) - X Fdot - gamma * Phi(E);
    the left side embeds to W zdot via the product-vectorization identity
    and the right side is vectorized into b.
    """
    gamma = _check_gamma(gamma)
    x = as_matrix(x)
    coeff = problem.evaluate(t)
    m, n = problem.m, problem.n
    eye_m = np.eye(m)
    eye_n = np.eye(n)

    u = kron(np.conjugate(herm(coeff.f)), eye_m)
    v = kron(eye_n, coeff.a)
    w = _split_blocks(u, v)

    err = x @ coeff.f - coeff.a @ np.conjugate(x) - coeff.c
    phi = activation.fn(err.real) + 1j * activation.fn(err.imag)
    g = vec(coeff.dc + coeff.da @ np.conjugate(x) - x @ coeff.df) - gamma * vec(phi)
    b = np.concatenate([g.real, g.imag])

    _require_finite(w, "model-1 system matrix", t)
    _require_finite(b, "model-1 right-hand side", t)
    return RealEmbedding(w, b)


def _m2_blocks(f: np.ndarray, a: np.ndarray, m: int, n: int) -> np.ndarray:
    """Real 2mn-by-2mn block matrix of the map X -> X F - A conj(X)."""
    eye_m = np.eye(m)
    eye_n = np.eye(n)
    # np.kron directly: clinalg.kron would promote these real blocks to
    # complex dtype and leak it into the state derivative.
    fr_t = np.kron(f.real.T, eye_m)
    fi_t = np.kron(f.imag.T, eye_m)
    ar = np.kron(eye_n, a.real)
    ai = np.kron(eye_n, a.imag)
    return np.block(
        [
            [fr_t - ar, -(fi_t + ai)],
            [fi_t - ai, fr_t + ar],
        ]
    )


def system_m2(problem: TimeVariantProblem, t: float) -> M2System:
    """Model-2 real embedding of the equation and its time derivative.

    The equation X F - A conj(X) = C becomes W(t) z = b(t) with z the real
    state vector; dW and db apply the identical block maps to the
    coefficient derivatives.
    """
    coeff = problem.evaluate(t)
    m, n = problem.m, problem.n
    w = _m2_blocks(coeff.f, coeff.a, m, n)
    dw = _m2_blocks(coeff.df, coeff.da, m, n)
    b = np.concatenate([vec(coeff.c).real, vec(coeff.c).imag])
    db = np.concatenate([vec(coeff.dc).real, vec(coeff.dc).imag])
    _require_finite(w, "model-2 system matrix", t)
    _require_finite(b, "model-2 right-hand side", t)
    return M2System(w, b, dw, db)


def build_con_cznd1(
    problem: TimeVariantProblem,
    gamma: float,
    activation: Activation = LINEAR,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Vector field zdot = pinv(W) b from the model-1 embedding."""
    gamma = _check_gamma(gamma)
    m, n = problem.m, problem.n

    def field(t: float, z: np.ndarray) -> np.ndarray:
        x = decode(z, m, n)
        w, b = embedding_m1(problem, t, x, gamma, activation)
        dz = pinv(w) @ b
        _require_finite(dz, "model-1 state derivative", t)
        return dz

    return field


def build_con_cznd2(
    problem: TimeVariantProblem,
    gamma: float,
    activation: Activation = LINEAR,
) -> Callable[[float, np.ndarray], np.ndarray]:
    """Vector field zdot = pinv(W) (bdot - Wdot z - gamma Phi(W z - b))."""
    gamma = _check_gamma(gamma)
    size = 2 * problem.m * problem.n

    def field(t: float, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (size,):
            raise ShapeError(f"state size {z.size}, expected {size}")
        w, b, dw, db = system_m2(problem, t)
        rhs = db - dw @ z - gamma * activation.fn(w @ z - b)
        dz = pinv(w) @ rhs
        _require_finite(dz, "model-2 state derivative", t)
        return dz

    return field
