from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import ContractViolation
from exactnum import (
    Interval,
    RationalMatrix,
    RationalVector,
    canonical_ray,
    certainly_le,
    format_value,
    lower,
    pair,
    parse_rational,
    parse_vector,
    rank_of,
    rational_power,
    rational_root,
    solve_linear,
    upper,
)

TOL = Fraction(1, 10**9)

rationals = st.fractions(min_value=0, max_value=1000, max_denominator=50)


def test_parse_rational_forms():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("-2") == Fraction(-2)
    assert parse_rational("0.5") == Fraction(1, 2)
    assert parse_rational(7) == Fraction(7)


@pytest.mark.parametrize("bad", ["", "1/0", "abc", 1.5, True])
def test_parse_rational_rejects(bad):
    with pytest.raises(ContractViolation):
        parse_rational(bad)


def test_parse_vector():
    assert parse_vector("1, -1/2,0") == RationalVector.of(1, Fraction(-1, 2), 0)
    with pytest.raises(ContractViolation):
        parse_vector("1,,2")


def test_canonical_ray_keeps_sign():
    assert canonical_ray(RationalVector.of(Fraction(1, 2), Fraction(-1, 3))) == (3, -2)
    assert canonical_ray(RationalVector.of(-2, -4)) == (-1, -2)
    with pytest.raises(ContractViolation):
        canonical_ray(RationalVector.zeros(2))


def test_vector_dimension_mismatch():
    with pytest.raises(ContractViolation):
        RationalVector.of(1, 2) + RationalVector.of(1, 2, 3)


def test_solve_linear_and_rank():
    A = RationalMatrix.from_rows([[2, 1], [1, 1]])
    assert solve_linear(A, RationalVector.of(3, 2)) == RationalVector.of(1, 1)
    singular = RationalMatrix.from_rows([[1, 1], [2, 2]])
    assert solve_linear(singular, RationalVector.of(1, 0)) is None
    assert rank_of([RationalVector.of(1, 1), RationalVector.of(2, 2)]) == 1


def test_pairing_and_block_diag():
    M = RationalMatrix.from_rows([[0, 1], [1, 0]])
    # F1·f1 = 0, F1·f2 = 1
    assert pair(M, RationalVector.of(1, 0), RationalVector.of(1, 0)) == 0
    assert pair(M, RationalVector.of(1, 0), RationalVector.of(0, 1)) == 1
    Y = M.block_diag(-1)
    assert Y.rows == 3 and Y[2, 2] == -1 and Y[0, 2] == 0


def test_negative_definite():
    assert RationalMatrix.from_rows([[-1, 0], [0, -2]]).is_negative_definite()
    assert not RationalMatrix.from_rows([[-1, 1], [1, -1]]).is_negative_definite()


def test_rational_root_exact_and_interval():
    assert rational_root(Fraction(9, 4), 2, TOL) == Fraction(3, 2)
    root2 = rational_root(2, 2, TOL)
    assert isinstance(root2, Interval)
    assert root2.width <= TOL
    assert root2.lo**2 <= 2 <= root2.hi**2


@given(rationals)
def test_rational_root_of_square_is_exact(q):
    assert rational_root(q * q, 2, TOL) == q


@given(st.integers(min_value=1, max_value=10**6))
def test_rational_root_brackets(n):
    value = rational_root(n, 3, TOL)
    assert lower(value) ** 3 <= n <= upper(value) ** 3


def test_rational_power_of_interval_is_outward():
    v = rational_power(Interval(Fraction(1), Fraction(2)), 3, 2, TOL)
    assert v.lo <= 1 and v.hi >= Fraction(2828427, 1000000)


def test_interval_comparisons():
    assert certainly_le(Fraction(1), Interval(Fraction(1), Fraction(2)))
    assert not certainly_le(Interval(Fraction(0), Fraction(2)), Fraction(1))
    assert format_value(Interval(Fraction(1), Fraction(1))) == "1"
    with pytest.raises(ContractViolation):
        Interval(Fraction(2), Fraction(1))
