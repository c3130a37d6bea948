import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tencrofton.exact import (
    DomainError,
    ExactPolyPi,
    ExactScalar,
    exact_sum,
    gamma,
    gamma_half,
    kappa_ball,
    lemma61,
    lemma62,
    lemma63,
    lemma64,
    omega,
    rgamma,
    rising,
    rising_factorial,
)

half_integers = st.integers(min_value=1, max_value=40).map(lambda m: Fraction(m, 2))


def test_gamma_half_examples():
    assert gamma_half(1) == ExactScalar(1, 1)
    assert gamma_half(4) == ExactScalar(1, 0)
    assert gamma_half(5) == ExactScalar(Fraction(3, 4), 1)


def test_gamma_half_rejects_poles():
    with pytest.raises(DomainError):
        gamma_half(0)
    with pytest.raises(DomainError):
        gamma_half(-3)


def test_reciprocal_gamma_vanishes_at_poles():
    assert rgamma(0) == ExactScalar(0)
    assert rgamma(-2) == ExactScalar(0)
    assert rgamma(Fraction(1, 2)) == ExactScalar(1, -1)


@given(half_integers)
def test_gamma_matches_float_gamma(a):
    assert float(gamma(a)) == pytest.approx(math.gamma(float(a)), rel=1e-12)


@given(half_integers)
def test_gamma_recurrence(a):
    assert gamma(a + 1) == gamma(a) * ExactScalar(a)


def test_rising_factorial_examples():
    assert rising_factorial(-2, 3) == ExactScalar(0)
    assert rising_factorial(1, 2) == ExactScalar(Fraction(3, 4))
    assert rising_factorial(6, 0) == ExactScalar(1)
    assert rising(Fraction(1, 2), 2) == ExactScalar(Fraction(3, 4))


def test_sphere_and_ball_constants():
    assert omega(2) == ExactScalar(2, 2)
    assert omega(3) == ExactScalar(4, 2)
    assert kappa_ball(0) == ExactScalar(1)
    assert float(kappa_ball(3)) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("m", range(1, 12))
def test_ball_volume_is_sphere_area_over_dimension(m):
    assert kappa_ball(m) == omega(m) * ExactScalar(Fraction(1, m))


def test_zero_is_canonical():
    z = ExactScalar(0, 5)
    assert z.pi_half_exponent == 0
    assert z == ExactScalar(0)


def test_mixed_sum_keeps_pi_powers_apart():
    total = exact_sum([ExactScalar(1, 0), ExactScalar(2, 2), ExactScalar(-1, 0)])
    assert total == ExactScalar(2, 2)
    mixed = exact_sum([ExactScalar(1, 0), ExactScalar(2, 2)])
    assert isinstance(mixed, ExactPolyPi)
    assert float(mixed) == pytest.approx(1 + 2 * math.pi)


def test_string_format():
    assert str(ExactScalar(Fraction(1, 3))) == "1/3"
    assert str(ExactScalar(Fraction(3, 4), 1)) == "3/4 * pi^(1/2)"


# alternating Gamma sums: hand-evaluated values


def test_binomial_gamma_ratio_sum_examples():
    lhs, rhs = lemma61(1, 1, 2)
    assert lhs == rhs == ExactScalar(Fraction(1, 2))
    lhs, rhs = lemma61(2, Fraction(1, 2), Fraction(3, 2))
    assert lhs == rhs == ExactScalar(Fraction(16, 15))
    lhs, rhs = lemma61(0, Fraction(5, 2), 3)
    assert lhs == rhs == gamma(Fraction(5, 2)) / gamma(3)


def test_binomial_gamma_ratio_sum_at_pole():
    # a - b - q in N_0: the closed form needs the rising-product reading
    lhs, rhs = lemma61(2, 5, 1)
    assert lhs == rhs


def test_reciprocal_gamma_sum_examples():
    assert lemma62(0) == (ExactScalar(1, -1), ExactScalar(1, -1))
    lhs, rhs = lemma62(1)
    assert lhs == rhs == ExactScalar(1, -1)
    lhs, rhs = lemma62(2)
    assert lhs == rhs == ExactScalar(Fraction(-1, 6), -1)


def test_four_gamma_quotient_sum_examples():
    lhs, rhs = lemma63(Fraction(5, 2), 2, Fraction(3, 2), 0)
    expected = gamma(Fraction(5, 2)) * gamma(2) / (gamma(Fraction(3, 2)) * gamma(4))
    assert lhs == rhs == expected
    assert lemma63(3, 1, Fraction(3, 2), 1)[0] == lemma63(3, 1, Fraction(3, 2), 1)[1]
    assert lemma63(4, Fraction(1, 2), 2, 2)[0] == lemma63(4, Fraction(1, 2), 2, 2)[1]


def test_four_gamma_quotient_sum_rejects_inadmissible():
    with pytest.raises(DomainError):
        lemma63(1, 1, 1, 1)


def test_weighted_gamma_sum_examples():
    lhs, rhs = lemma64(1, 1, 1)
    assert lhs == rhs == ExactScalar(Fraction(1, 2))
    for a, b, t in [(Fraction(1, 2), Fraction(1, 2), 1), (2, 1, 2)]:
        lhs, rhs = lemma64(a, b, t)
        assert lhs == rhs


def test_weighted_gamma_sum_rejects_t_zero():
    with pytest.raises(DomainError):
        lemma64(1, 1, 0)


@given(st.integers(0, 6), half_integers, half_integers)
def test_binomial_gamma_ratio_sum_property(q, a, b):
    lhs, rhs = lemma61(q, a, b)
    assert lhs == rhs
