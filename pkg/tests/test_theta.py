"""
Tests for the theta function module.
"""

from fractions import Fraction

import pytest

from toeplitz_rigidity.exceptions import DomainError, PoleError, PrecisionError, SingularityError
from toeplitz_rigidity.theta import (ModularPoint, PointBackend, ThetaKind, product_cutoff, s_law_residuals,
                                     shift_law_residual, theta_eval, theta_log, theta_prime_zero, theta_taylor)

TAU = 0.2 + 1.1j
KINDS = ["theta", "theta1", "theta2", "theta3"]


def test_parse_rejects_unknown_kind():
    assert ThetaKind.parse("theta2") is ThetaKind.THETA2
    with pytest.raises(DomainError):
        ThetaKind.parse("theta4")


def test_modular_point_requires_upper_half_plane():
    with pytest.raises(DomainError):
        ModularPoint(1.0)
    with pytest.raises(DomainError):
        ModularPoint(0.5 - 1j)


@pytest.mark.parametrize("kind", KINDS)
def test_product_matches_mpmath(kind):
    pt = ModularPoint(TAU)
    v = 0.3 + 0.05j
    assert theta_eval(kind, v, pt) == pytest.approx(theta_eval(kind, v, pt, precision=30), rel=1e-9)


def test_theta_prime_zero_matches_mpmath():
    pt = ModularPoint(TAU)
    assert theta_prime_zero(pt) == pytest.approx(theta_prime_zero(pt, precision=30), rel=1e-9)


def test_theta_vanishes_at_origin():
    pt = ModularPoint(1j)
    assert theta_eval("theta", 0, pt) == 0
    with pytest.raises(SingularityError):
        theta_log("theta", 0, pt)


def test_unachievable_tolerance_raises():
    with pytest.raises(PrecisionError):
        product_cutoff(0.999, 1.0, 1e-12, 10)


def test_s_law_residuals_are_small():
    first, second = s_law_residuals(0.3 + 0.1j, 0.1 + 1.2j)
    assert first < 1e-9
    assert second < 1e-9


def test_shift_law():
    assert shift_law_residual(0.1, 0.2, 1, 2, 0, 1j) < 1e-9
    assert shift_law_residual(0.1 + 0.1j, 0.3, 2, -2, 4, 0.1 + 1.3j) < 1e-9
    with pytest.raises(DomainError):
        shift_law_residual(0.1, 0.2, 1, 1, 0, 1j)


def test_theta2_at_origin_q_expansion():
    """theta_2(0) = 1 - 2q^{1/2} + 2q^2 + O(q^{9/2})."""
    taylor = theta_taylor("theta2", 0, 0, ModularPoint(1j, q_trunc=9))
    constant = taylor.coefficients[0]
    assert taylor.q_offset == 0
    assert constant.coefficient(0) == pytest.approx(1)
    assert constant.coefficient(Fraction(1, 2)) == pytest.approx(-2)
    assert abs(constant.coefficient(1)) < 1e-12
    assert constant.coefficient(2) == pytest.approx(2)


@pytest.mark.parametrize("kind,center", [("theta", 0), ("theta1", 0), ("theta2", 0.25), ("theta3", 0.1)])
def test_taylor_polynomial_matches_values(kind, center):
    tau = 1.1j
    taylor = theta_taylor(kind, center, 12, ModularPoint(tau))
    h = 0.05
    expected = theta_eval(kind, center + h, ModularPoint(tau))
    assert taylor.evaluate(h, tau) == pytest.approx(expected, rel=1e-8, abs=1e-12)


def test_inverse_taylor_around_zero_raises():
    with pytest.raises(SingularityError):
        theta_taylor("theta", 0, 4, ModularPoint(1j), inverse=True)
    with pytest.raises(DomainError):
        theta_taylor("theta", 0, -1, ModularPoint(1j))


def test_normalized_quotient_matches_values():
    tau = 0.1 + 1.2j
    backend = PointBackend(tau)
    series = backend.quotient("theta", 0, 12, form="normalized")
    h = 0.04
    pt = ModularPoint(tau)
    expected = h * theta_prime_zero(pt) / theta_eval("theta", h, pt)
    assert sum(c * h ** k for k, c in enumerate(series.coeffs)) == pytest.approx(expected, rel=1e-9)


def test_inverse_quotient_at_zero_is_a_pole():
    backend = PointBackend(1j)
    with pytest.raises(PoleError):
        backend.quotient("theta", 0, 4, form="inverse")
    with pytest.raises(PoleError):
        backend.quotient("theta1", 0.5, 4, form="inverse")
