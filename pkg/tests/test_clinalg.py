"""Complex linear algebra primitives against independent oracles.

Every nontrivial expected value here is either forced by a definition or
recomputed through a second, structurally different route (explicit loops,
direct products) so the library never certifies itself.
"""

import numpy as np
import pytest

from zndsolve.clinalg import (
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


def _cmat(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def _kron_blocks(a, b):
    """Brute-force block assembly, independent of np.kron."""
    p, q = a.shape
    r, s = b.shape
    out = np.zeros((p * r, q * s), dtype=complex)
    for j in range(p):
        for k in range(q):
            out[j * r : (j + 1) * r, k * s : (k + 1) * s] = a[j, k] * b
    return out


def _index_swap(m):
    p, q = m.shape
    out = np.zeros((q, p), dtype=complex)
    for i in range(p):
        for j in range(q):
            out[j, i] = m[i, j]
    return out


def _stack_columns(m):
    return np.concatenate([np.asarray(m)[:, j] for j in range(m.shape[1])])


def test_compose_recomposition_is_exact():
    rng = np.random.default_rng(3)
    real = rng.standard_normal((3, 2))
    imag = rng.standard_normal((3, 2))
    m = compose(real, imag)
    assert np.array_equal(m.real, real)
    assert np.array_equal(m.imag, imag)


def test_compose_rejects_mismatched_parts():
    with pytest.raises(ShapeError):
        compose(np.zeros((2, 2)), np.zeros((2, 3)))


def test_conj_flips_imaginary_sign():
    assert conj([[1 + 2j]])[0, 0] == 1 - 2j


def test_conj_fixes_real_matrices():
    m = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(conj(m), m)


def test_conj_is_involution():
    rng = np.random.default_rng(7)
    m = _cmat(rng, 3, 2)
    assert np.array_equal(conj(conj(m)), m)


def test_herm_single_entry():
    assert herm([[1j]])[0, 0] == -1j


def test_herm_is_involution():
    rng = np.random.default_rng(11)
    m = _cmat(rng, 4, 3)
    assert np.array_equal(herm(herm(m)), m)


def test_herm_entry_rule():
    rng = np.random.default_rng(13)
    m = _cmat(rng, 2, 3)
    h = herm(m)
    assert h.shape == (3, 2)
    for i in range(2):
        for j in range(3):
            assert h[j, i] == np.conjugate(m[i, j])


def test_transpose_matches_index_swap_oracle():
    rng = np.random.default_rng(17)
    m = _cmat(rng, 2, 3)
    assert np.array_equal(transpose(m), _index_swap(m))
    assert np.array_equal(transpose(m), conj(herm(m)))


def test_vec_column_stacking():
    m = [[1 + 1j, 3], [2, 4 - 1j]]
    assert np.array_equal(vec(m), np.array([1 + 1j, 2, 3, 4 - 1j]))


def test_vec_of_column_is_identity():
    rng = np.random.default_rng(19)
    col = _cmat(rng, 5, 1)
    assert np.array_equal(vec(col), col[:, 0])


def test_vec_splits_into_real_and_imaginary_vecs():
    rng = np.random.default_rng(23)
    m = _cmat(rng, 3, 2)
    recomposed = vec(m.real) + 1j * vec(m.imag)
    assert np.array_equal(vec(m), recomposed)


def test_unvec_column_refill():
    out = unvec(np.array([1.0, 2.0, 3.0, 4.0]), 2, 2)
    assert np.array_equal(out, np.array([[1, 3], [2, 4]], dtype=complex))


def test_vec_unvec_round_trip_enumerated_and_random():
    rng = np.random.default_rng(29)
    for rows in range(1, 6):
        for cols in range(1, 6):
            m = _cmat(rng, rows, cols)
            assert np.array_equal(unvec(vec(m), rows, cols), m)
    big = _cmat(rng, 17, 9)
    assert np.array_equal(unvec(vec(big), 17, 9), big)


def test_unvec_rejects_wrong_length():
    with pytest.raises(ShapeError):
        unvec(np.arange(6.0), 2, 2)


def test_kron_identity_case():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4, dtype=complex))


def test_kron_matches_block_assembly_oracle():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    b = np.array([[1.0], [2.0]])
    assert np.array_equal(kron(a, b), _kron_blocks(a.astype(complex), b.astype(complex)))
    rng = np.random.default_rng(31)
    a = _cmat(rng, 3, 2)
    b = _cmat(rng, 2, 4)
    assert np.array_equal(kron(a, b), _kron_blocks(a, b))


def test_kron_mixed_product_identity():
    rng = np.random.default_rng(37)
    a, b, c, d = (_cmat(rng, 2, 2) for _ in range(4))
    lhs = kron(a, b) @ kron(c, d)
    rhs = kron(a @ c, b @ d)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_vec_axb_identity_sandwich():
    rng = np.random.default_rng(41)
    x = _cmat(rng, 3, 2)
    assert np.array_equal(vec_axb(np.eye(3), x, np.eye(2)), vec(x))


def test_vec_axb_matches_direct_product():
    rng = np.random.default_rng(43)
    a = _cmat(rng, 2, 2)
    x = _cmat(rng, 2, 3)
    b = _cmat(rng, 3, 2)
    direct = _stack_columns(a @ x @ b)
    assert np.max(np.abs(vec_axb(a, x, b) - direct)) <= 1e-12


def test_vec_axb_rejects_nonconforming_chain():
    with pytest.raises(ShapeError):
        vec_axb(np.eye(2), np.ones((3, 2)), np.eye(2))


def test_real_inputs_reduce_kron_factor_to_plain_transpose():
    # Real-field degeneration: conj(herm(B)) collapses to the plain
    # transpose, so both Kronecker factors must agree entrywise exactly.
    rng = np.random.default_rng(47)
    b = rng.standard_normal((3, 3))
    a = rng.standard_normal((2, 2))
    assert np.array_equal(kron(conj(herm(b)), a), kron(transpose(b), a))


def test_product_vectorization_identity_suite():
    # 100 random complex triples with dims up to 4.
    rng = np.random.default_rng(53)
    worst = 0.0
    for _ in range(100):
        p, q, r, s = rng.integers(1, 5, size=4)
        a = _cmat(rng, p, q)
        x = _cmat(rng, q, r)
        b = _cmat(rng, r, s)
        direct = _stack_columns(a @ x @ b)
        worst = max(worst, float(np.max(np.abs(vec_axb(a, x, b) - direct))))
    assert worst <= 1e-12


def test_frobenius_zero_and_single_entry():
    assert frobenius(np.zeros((3, 4))) == 0.0
    assert frobenius([[3 + 4j]]) == pytest.approx(5.0, abs=1e-15)


def test_frobenius_split_norm_identity():
    rng = np.random.default_rng(59)
    m = _cmat(rng, 4, 3)
    split = np.hypot(frobenius(m.real), frobenius(m.imag))
    assert frobenius(m) == pytest.approx(split, rel=1e-14)


def test_frobenius_unitary_invariance():
    rng = np.random.default_rng(61)
    m = _cmat(rng, 4, 4)
    q, _ = np.linalg.qr(_cmat(rng, 4, 4))
    assert frobenius(q @ m) == pytest.approx(frobenius(m), rel=1e-10)
    assert frobenius(m @ q) == pytest.approx(frobenius(m), rel=1e-10)


def test_pinv_identity():
    assert np.allclose(pinv(np.eye(4)), np.eye(4), atol=1e-14)


def test_pinv_rank_deficient_diagonal():
    out = pinv(np.diag([2.0, 0.0]))
    assert np.allclose(out, np.diag([0.5, 0.0]), atol=1e-14)


def test_pinv_reproduces_matrix():
    rng = np.random.default_rng(67)
    w = rng.standard_normal((6, 6)) + np.eye(6)
    assert np.max(np.abs(w @ pinv(w) @ w - w)) <= 1e-10


def test_pinv_penrose_conditions():
    # All four Penrose conditions, relative residual <= 1e-9, on random
    # square matrices filtered to condition number < 1e6.
    rng = np.random.default_rng(71)
    checked = 0
    while checked < 20:
        w = rng.standard_normal((5, 5))
        if np.linalg.cond(w) >= 1e6:
            continue
        checked += 1
        wp = pinv(w)
        assert frobenius(w @ wp @ w - w) / frobenius(w) <= 1e-9
        assert frobenius(wp @ w @ wp - wp) / frobenius(wp) <= 1e-9
        assert frobenius((w @ wp).T - w @ wp) / frobenius(w @ wp) <= 1e-9
        assert frobenius((wp @ w).T - wp @ w) / frobenius(wp @ w) <= 1e-9


def test_pinv_rejects_non_finite_input():
    w = np.eye(3)
    w[1, 1] = np.nan
    with pytest.raises(NumericalError):
        pinv(w)


def test_rank_one_rejections():
    with pytest.raises(ShapeError):
        vec(np.arange(4.0))
    with pytest.raises(ShapeError):
        pinv(np.arange(4.0))
