from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from mbep.exact import (
    GaussianRational,
    as_rational,
    exact_array,
    exact_eye,
    exact_nullity,
    exact_power_ranks,
    exact_rank,
    lift,
    to_complex,
)
from mbep.linalg import jordan_block


def test_as_rational_reads_decimal_repr():
    assert as_rational(0.2) == Fraction(1, 5)
    assert as_rational(3) == Fraction(3)
    assert as_rational("7/40") == Fraction(7, 40)


def test_as_rational_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_rational(float("inf"))


def test_lift_is_binary_exact():
    assert lift(np.array([0.1]))[0] == GaussianRational(Fraction(0.1))
    assert lift(np.array([0.1]))[0] != GaussianRational(Fraction(1, 10))


def test_gaussian_arithmetic():
    a, b = GaussianRational(1, 2), GaussianRational(Fraction(1, 2), -1)
    assert a * b == GaussianRational(Fraction(5, 2), 0)
    assert complex(a / b) == pytest.approx(complex(1, 2) / complex(0.5, -1))
    assert (a - a).is_zero()
    assert a.conjugate() == GaussianRational(1, -2)


def test_round_trip_to_complex():
    m = np.array([[0.25 + 1j, -3], [0, 0.5j]])
    np.testing.assert_array_equal(to_complex(exact_array(m)), m)


def test_exact_eye():
    assert exact_rank(exact_eye(4)) == 4
    assert exact_nullity(exact_array(np.zeros((3, 3)))) == 3


def test_power_ranks_of_jordan_block():
    m = exact_array(jordan_block(4, -0.5))
    assert exact_power_ranks(m, Fraction(-1, 2), 5) == [3, 2, 1, 0, 0]


def _sympy_rank(m):
    return sympy.Matrix(
        [[sympy.Rational(int(x.real)) + sympy.I * int(x.imag) for x in row] for row in m]
    ).rank()


@given(
    st.integers(1, 5),
    st.integers(1, 5),
    st.integers(0, 2**32 - 1),
)
def test_exact_rank_matches_sympy(rows, cols, seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(-2, 3, size=(rows, cols)) + 1j * rng.integers(-1, 2, size=(rows, cols))
    # force some rank deficiency
    if rows > 1:
        m[-1] = m[0] * (1 + 1j)
    assert exact_rank(exact_array(m)) == _sympy_rank(m)
