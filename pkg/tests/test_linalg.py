import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mbep.exact import exact_rank, lift
from mbep.jordan import detect_structure
from mbep.linalg import (
    NumericalError,
    eig,
    jordan_block,
    kron_product,
    kron_sum,
    matrix_exp,
    numeric_rank,
)
from mbep.model import build_parts, preset


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_kron_identity():
    assert np.array_equal(kron_product(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_pauli_x_is_antidiagonal():
    sx = np.array([[0, 1], [1, 0]])
    assert np.array_equal(kron_product(sx, sx), np.fliplr(np.eye(4)))


def test_kron_acts_factorwise(rng):
    a, b = random_complex(rng, 2, 2), random_complex(rng, 2, 2)
    v, w = random_complex(rng, 2), random_complex(rng, 2)
    np.testing.assert_allclose(kron_product(a, b) @ np.kron(v, w), np.kron(a @ v, b @ w), atol=1e-13)


def test_kron_sum_diagonal_spectrum():
    alpha, beta = np.array([1.0, 2.0]), np.array([10.0, 20.0, 30.0])
    w = np.sort(np.linalg.eigvals(kron_sum(np.diag(alpha), np.diag(beta))).real)
    np.testing.assert_allclose(w, np.sort((alpha[:, None] + beta[None, :]).ravel()))


def test_kron_sum_of_two_j2_is_j3_plus_j1():
    s = detect_structure(kron_sum(jordan_block(2), jordan_block(2)))
    assert len(s) == 1 and s[0].segre == (3, 1)


def test_kron_sum_trace(rng):
    a, b = random_complex(rng, 3, 3), random_complex(rng, 2, 2)
    assert np.isclose(np.trace(kron_sum(a, b)), 2 * np.trace(a) + 3 * np.trace(b))


def test_kron_sum_rejects_rectangular():
    with pytest.raises(ValueError):
        kron_sum(np.ones((2, 3)), np.eye(2))


@pytest.mark.parametrize(
    "m, expected",
    [(np.zeros((3, 3)), 0), (jordan_block(3), 2)],
)
def test_numeric_rank_simple(m, expected):
    assert numeric_rank(m) == expected
    assert exact_rank(lift(m)) == expected


def test_numeric_rank_outer_products(rng):
    u, v = rng.integers(-3, 4, size=(2, 4, 2))
    m = (u[0][:, None] * v[0][None, :] + u[1][:, None] * v[1][None, :]).astype(float)
    assert numeric_rank(m) == 2 == exact_rank(lift(m))


def test_numeric_rank_negative_tol():
    with pytest.raises(ValueError):
        numeric_rank(np.eye(2), tol=-1)


def test_eig_diagonal():
    es = eig(np.diag([1, 2j, -3]))
    np.testing.assert_allclose(np.sort_complex(es.eigenvalues), np.sort_complex([1, 2j, -3]))
    np.testing.assert_allclose(es.left.conj().T @ es.right, np.eye(3), atol=1e-14)


def test_eig_qubit_heff_degenerate_pair():
    h = build_parts(preset("qubit_i", gamma_i=0.2, gamma_e=0.9)).h_eff
    es = eig(h)
    np.testing.assert_allclose(es.eigenvalues, [-0.275j, -0.275j], atol=1e-7)
    assert es.condition > 1e6


def test_eig_companion():
    companion = np.array([[6, -11, 6], [1, 0, 0], [0, 1, 0]], dtype=float)
    np.testing.assert_allclose(np.sort(eig(companion).eigenvalues.real), [1, 2, 3], atol=1e-12)


def test_eig_rejects_nan():
    with pytest.raises(NumericalError):
        eig(np.array([[np.nan]]))


def test_matrix_exp_zero():
    np.testing.assert_array_equal(matrix_exp(np.zeros((3, 3)), 5.0), np.eye(3))


def test_matrix_exp_jordan_block_toeplitz():
    lam, t, n = -0.4 + 0.1j, 1.7, 4
    expected = np.zeros((n, n), dtype=complex)
    fact = [1, 1, 2, 6]
    for k in range(n):
        expected += np.diag(np.full(n - k, t**k / fact[k]), k)
    np.testing.assert_allclose(matrix_exp(jordan_block(n, lam), t), np.exp(lam * t) * expected, atol=1e-14)


def test_matrix_exp_overflow():
    with pytest.raises(OverflowError):
        matrix_exp(np.array([[1000.0]]), 10.0)


@given(
    arrays(np.float64, (3, 3), elements=st.floats(-1, 1)),
    st.floats(0, 2),
    st.floats(0, 2),
)
def test_matrix_exp_semigroup(m, t1, t2):
    np.testing.assert_allclose(
        matrix_exp(m, t1) @ matrix_exp(m, t2), matrix_exp(m, t1 + t2), atol=1e-10, rtol=1e-10
    )


@given(st.integers(0, 2**32 - 1))
def test_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (random_complex(rng, 2, 2) for _ in range(4))
    np.testing.assert_allclose(
        kron_product(a, b) @ kron_product(c, d), kron_product(a @ c, b @ d), atol=1e-12
    )


@given(arrays(np.int64, (4, 4), elements=st.integers(-2, 2)))
def test_numeric_rank_matches_exact(m):
    assert numeric_rank(m.astype(float)) == exact_rank(lift(m.astype(float)))


@given(st.integers(0, 2**32 - 1))
def test_eig_residual_contract(seed):
    m = random_complex(np.random.default_rng(seed), 5, 5)
    es = eig(m)
    resid = np.linalg.norm(m @ es.right - es.right * es.eigenvalues, axis=0)
    assert np.all(resid <= es.residual_bound * np.linalg.norm(m) * (1 + 1e-12))


@given(st.integers(0, 2**32 - 1))
def test_matrix_exp_no_spurious_growth(seed):
    rng = np.random.default_rng(seed)
    x = random_complex(rng, 4, 4)
    # dissipative: Hermitian part negative semidefinite, so the norm is non-increasing
    m = (x - x.conj().T) / 2 - x @ x.conj().T / 4
    for t in (0.0, 1.0, 10.0, 100.0):
        assert np.linalg.norm(matrix_exp(m, t), 2) <= 1 + 1e-10
