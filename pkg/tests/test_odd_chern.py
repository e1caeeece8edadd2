"""
Tests for the odd Chern character, the transgression tables and the loop quadratures.
"""

from fractions import Fraction

import numpy as np
import pytest

from toeplitz_rigidity.exceptions import DatasetError, DomainError
from toeplitz_rigidity.odd_chern import (S3_UNIT, LoopMap, OddClassVector, constant_s3_map, degree_c3, diagonal_loop,
                                         exterior_power_loop, k_transgression_table, lambda_transgression_poly,
                                         odd_ch_form, odd_multiple, s_mixing_residuals, su2_identity_map,
                                         tensor_loop, tensor_odd_ch, transgression_coeffs, transgression_value,
                                         u_moment, winding_c1)
from toeplitz_rigidity.modularity import ModularGroup, modular_form_check
from toeplitz_rigidity.sampling import tau_samples
from toeplitz_rigidity.witten_bundles import KElement


def test_u_moments():
    assert u_moment(0) == 1
    assert u_moment(1) == Fraction(-1, 6)
    assert u_moment(2) == Fraction(1, 30)
    with pytest.raises(DomainError):
        u_moment(-1)


def test_odd_ch_form_weights():
    classes = OddClassVector({1: 1, 3: 6, 5: 120})
    assert odd_ch_form(classes) == 4
    assert odd_ch_form(classes, start=1) == 3
    with pytest.raises(DomainError):
        odd_ch_form(OddClassVector({2: 1}))


def test_tensor_formula():
    assert tensor_odd_ch([(2, 1), (3, 5)]) == 13
    with pytest.raises(DomainError):
        tensor_odd_ch([])


def test_lambda_transgression_polynomial():
    poly, first = lambda_transgression_poly(2, 1, 4)
    assert first == 1
    assert poly.coefficient(2) == 2
    with pytest.raises(DomainError):
        lambda_transgression_poly(2, 1, 4, degree=5)
    with pytest.raises(DomainError):
        poly.coefficient(5)


def test_odd_multiples_of_k_elements():
    ranks = {"E": 4}
    e = KElement.symbol("E", ranks)
    assert odd_multiple(e, 1) == 1
    assert odd_multiple(e, 3) == 1
    assert odd_multiple(KElement.exterior("E", 2, ranks), 1) == 3
    assert odd_multiple(e * e, 2) == 8
    assert odd_multiple(KElement.trivial(5, ranks), 2) == 0


def test_only_degrees_three_mod_four_survive():
    table = transgression_coeffs(2, 9, 7)
    assert table.entry(5).is_zero()
    assert table.entry(9).is_zero()
    assert table.entry(3).coefficient(Fraction(1, 2)) == Fraction(-1, 6)
    with pytest.raises(DomainError):
        table.entry(4)
    with pytest.raises(DomainError):
        table.entry(11)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_theta_and_k_theory_tables_agree(j):
    table = transgression_coeffs(j, 7, 5, rank_e=4)
    k_table = k_transgression_table(j, 7, 5, rank_e=4)
    assert sorted(k_table) == [3, 7]
    for degree, series in k_table.items():
        assert table.entry(degree) == series


def test_t_shift_exchanges_theta2_and_theta3():
    shifted = transgression_coeffs(2, 7, 9).t_shift()
    assert shifted.j == 3
    assert shifted.entries == transgression_coeffs(3, 7, 9).entries


@pytest.mark.parametrize("j,degree", [(1, 3), (2, 3), (3, 7), (1, 7)])
def test_point_values_match_series(j, degree):
    tau = 0.1 + 1.2j
    exact = transgression_coeffs(j, degree, 41).evaluate(degree, tau)
    assert transgression_value(j, degree, tau) == pytest.approx(exact, rel=1e-10, abs=1e-14)


def test_transgression_value_domain():
    assert transgression_value(2, 5, 1j) == 0
    with pytest.raises(DomainError):
        transgression_value(2, 4, 1j)
    with pytest.raises(DomainError):
        transgression_value(2, 3, 1.0)


@pytest.mark.parametrize("j,group", [(2, ModularGroup.GAMMA_UPPER_0_2), (3, ModularGroup.GAMMA_THETA)])
def test_degree_seven_transgression_has_weight_four(j, group):
    samples = tau_samples(12)

    def coefficient(tau):
        return transgression_value(j, 7, tau)

    assert modular_form_check(coefficient, 4, group, samples).passed(1e-8)
    assert not modular_form_check(coefficient, 5, group, samples).passed(1e-3)


def test_degree_three_s_law_with_defect():
    residuals = s_mixing_residuals(0.1 + 1.1j, rank_e=4)
    assert residuals["theta1_theta2"] < 1e-8
    assert residuals["theta3"] < 1e-8


def test_winding_of_diagonal_loops():
    result = winding_c1(diagonal_loop(3, 2, 64))
    assert result.nearest == 3
    assert result.residual < 1e-9
    assert result.detail["det_winding"] == pytest.approx(3)


def test_winding_of_tensor_and_exterior_powers():
    tensor = tensor_loop(diagonal_loop(2, 2, 64), diagonal_loop(-1, 3, 64))
    assert winding_c1(tensor).nearest == 2 * 3 + (-1) * 2
    wedge = exterior_power_loop(diagonal_loop(3, 4, 64), 2)
    assert winding_c1(wedge).nearest == 9


def test_low_resolution_is_rejected():
    with pytest.raises(DomainError):
        winding_c1(diagonal_loop(1, 2, 8))


def test_non_unitary_samples_are_rejected():
    with pytest.raises(DatasetError):
        LoopMap("S1", np.ones((16, 2, 2)))


def test_degree_of_su2_identity():
    result = degree_c3(su2_identity_map(24))
    assert abs(result.value - S3_UNIT) < 1e-3
    assert result.detail["degree"] == pytest.approx(1, abs=1e-3)


def test_degree_of_constant_map_is_zero():
    assert abs(degree_c3(constant_s3_map(24)).value) < 1e-12
