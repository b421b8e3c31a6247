"""Complex matrix primitives: conjugation, vectorization, Kronecker products,
Frobenius norms and the Moore-Penrose pseudo-inverse.

All functions operate on 2-D numpy arrays promoted to complex128 (or kept
float64 where a result is guaranteed real).  Vectorization is column-stacking
throughout; every identity in this module assumes that layout.
"""

import numpy as np

__all__ = [
    "ShapeError",
    "NumericalError",
    "as_matrix",
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
]


class ShapeError(ValueError):
    """An argument's dimensions are inconsistent with the requested operation."""


class NumericalError(ArithmeticError):
    """A numeric computation failed or produced non-finite values.

    Carries enough context (operation name, offending value or shape) in the
    message to diagnose the failure without re-running.
    """


def as_matrix(obj) -> np.ndarray:
    """Coerce ``obj`` to a 2-D complex128 array, rejecting other ranks."""
    arr = np.asarray(obj)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    return arr.astype(np.complex128, copy=False)


def compose(real, imag) -> np.ndarray:
    """Build M = M_r + i*M_i from two real parts of identical shape."""
    real = np.asarray(real, dtype=np.float64)
    imag = np.asarray(imag, dtype=np.float64)
    if real.shape != imag.shape:
        raise ShapeError(
            f"real part {real.shape} and imaginary part {imag.shape} differ"
        )
    return real + 1j * imag


def conj(m) -> np.ndarray:
    """Entrywise complex conjugate."""
    return np.conjugate(as_matrix(m))


def herm(m) -> np.ndarray:
    """Conjugate (Hermitian) transpose M^H."""
    return np.conjugate(as_matrix(m)).T


def transpose(m) -> np.ndarray:
    """Plain transpose, derived as conj(herm(M)) so the two stay consistent."""
    return np.conjugate(herm(m))


def vec(m) -> np.ndarray:
    """Stack the columns of a p-by-q matrix into a length p*q vector.

    Column-major order: entry (i, j) lands at position j*p + i.
    """
    return as_matrix(m).reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a length rows*cols vector to a matrix."""
    v = np.asarray(v)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={v.ndim}")
    if v.size != rows * cols:
        raise ShapeError(
            f"cannot reshape length-{v.size} vector to {rows}x{cols}"
        )
    return v.astype(np.complex128, copy=False).reshape(rows, cols, order="F")


def kron(a, b) -> np.ndarray:
    """Kronecker product A (x) B with blocks a[j,k] * B.

    Parameters
    ----------
    a : array_like, shape (p, q)
    b : array_like, shape (r, s)

    Returns
    -------
    np.ndarray, shape (p*r, q*s)
        Block (j, k) equals ``a[j, k] * b``.
    """
    return np.kron(as_matrix(a), as_matrix(b))


def vec_axb(a, x, b) -> np.ndarray:
    """Vectorize the product A @ X @ B without forming it.

    Uses the column-stacking identity vec(A X B) = (conj(B^H) (x) A) vec(X).
    For real B the Kronecker factor reduces to B^T (x) A exactly.

    Parameters
    ----------
    a : array_like, shape (p, q)
    x : array_like, shape (q, r)
    b : array_like, shape (r, s)

    Returns
    -------
    np.ndarray, shape (p*s,)
    """
    a = as_matrix(a)
    x = as_matrix(x)
    b = as_matrix(b)
    if a.shape[1] != x.shape[0] or x.shape[1] != b.shape[0]:
        raise ShapeError(
            f"incompatible product chain {a.shape} @ {x.shape} @ {b.shape}"
        )
    return kron(np.conjugate(herm(b)), a) @ vec(x)


def frobenius(m) -> float:
    """Frobenius norm sqrt(sum |m_ij|^2); equals the 2-norm of vec(m)."""
    return float(np.linalg.norm(as_matrix(m), "fro"))


def pinv(w, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rank_tol * sigma_max`` are treated as zero.  The
    default tolerance is ``max(w.shape) * eps``, which keeps genuinely
    rank-deficient inputs (for example a zero row) from injecting huge
    spurious components.

    Raises
    ------
    NumericalError
        If the SVD fails to converge or the input contains non-finite
        entries.
    """
    w = np.asarray(w)
    if w.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={w.ndim}")
    if not np.isfinite(w).all():
        raise NumericalError(
            f"pinv: non-finite entries in {w.shape[0]}x{w.shape[1]} input"
        )
    if rank_tol is None:
        rank_tol = max(w.shape) * np.finfo(np.float64).eps
    try:
        return np.linalg.pinv(w, rcond=rank_tol)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"pinv: SVD failed on {w.shape[0]}x{w.shape[1]} matrix "
            f"(|W|_F = {np.linalg.norm(w):.3e}): {exc}"
        ) from exc
