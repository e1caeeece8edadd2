"""
Tests for the truncated series containers.
"""

import cmath
from fractions import Fraction

import pytest

from toeplitz_rigidity.exceptions import DomainError, SingularSeriesError
from toeplitz_rigidity.series import (COMPLEX, RATIONAL, GeneratorTable, GradedElement, PowerSeries, QSeries,
                                      TopDegreeFunctional, euler_function, ga_exp)


def test_euler_function_pentagonal_coefficients():
    """prod (1 - q^n) = 1 - q - q^2 + q^5 + O(q^7)."""
    series = euler_function(13)
    assert series.ring is RATIONAL
    assert series.coeffs == {0: 1, 2: -1, 4: -1, 10: 1}


def test_inverse_is_two_sided():
    series = QSeries({0: 1, 1: 2, 4: Fraction(1, 3)}, 9, RATIONAL)
    assert series * series.inv() == QSeries.one(9, RATIONAL)
    assert series.inv() * series == QSeries.one(9, RATIONAL)


def test_inverse_of_zero_constant_term_raises():
    with pytest.raises(SingularSeriesError):
        QSeries({1: 1}, 5, RATIONAL).inv()


def test_mixed_rings_raise_type_error():
    with pytest.raises(TypeError):
        QSeries({0: 1}, 4, RATIONAL) + QSeries({0: 1}, 4, COMPLEX)


def test_rational_series_rejects_float_coefficients():
    with pytest.raises(TypeError):
        QSeries({0: 0.5}, 4, RATIONAL)


def test_exp_and_log_are_inverse():
    series = QSeries({2: Fraction(1), 3: Fraction(1, 2)}, 11, RATIONAL)
    assert series.exp().log() == series


def test_half_twist_flips_half_integer_powers():
    series = QSeries({0: 1, 1: 3, 2: 5}, 4, RATIONAL).half_twist()
    assert series.coeffs == {0: 1, 1: -3, 2: 5}


def test_truncation_follows_smaller_operand():
    product = QSeries({0: 1, 1: 1}, 6, RATIONAL) * QSeries({0: 1, 1: 1}, 3, RATIONAL)
    assert product.trunc == 3
    assert product.coeffs == {0: 1, 1: 2, 2: 1}


def test_evaluate_uses_half_nome():
    series = QSeries({0: 1, 2: 1}, 4)
    assert series.evaluate(1j) == pytest.approx(1 + cmath.exp(-2 * cmath.pi))


def test_coefficient_accepts_half_integers():
    series = QSeries({3: 7}, 6, RATIONAL)
    assert series.coefficient(Fraction(3, 2)) == 7
    with pytest.raises(DomainError):
        series.coefficient(Fraction(1, 3))


def test_power_series_inverse():
    inverse = PowerSeries([1, -1, 0, 0]).inverse()
    assert inverse.coeffs == (1, 1, 1, 1)


def test_odd_generators_anticommute():
    table = GeneratorTable.build(even=["y"], odd={"c1": 1, "c3": 3})
    c1 = GradedElement.generator(table, "c1", 5)
    c3 = GradedElement.generator(table, "c3", 5)
    assert (c1 * c1).is_zero()
    assert c1 * c3 == -(c3 * c1)


def test_degree_cap_drops_high_terms():
    table = GeneratorTable.build(even=["y"])
    y = GradedElement.generator(table, "y", 4)
    assert (y ** 3).is_zero()
    assert ga_exp(y) == 1 + y + (y * y) * Fraction(1, 2)


def test_graded_inverse():
    table = GeneratorTable.build(even=["y"])
    y = GradedElement.generator(table, "y", 6)
    element = 2 + y
    assert element * element.inverse() == 1


def test_top_degree_functional_pairs_only_top_degree():
    table = GeneratorTable.build(even=["y"], odd={"c3": 3})
    functional = TopDegreeFunctional(table, 5, {"y*c3": 2})
    form = GradedElement.from_string(table, "y*c3", 5, 3) + GradedElement.generator(table, "y", 5)
    assert functional(form) == 6
    with pytest.raises(DomainError):
        TopDegreeFunctional(table, 5, {"c3": 1})
