"""
Tests for the modular group helpers and the transformation-law checks.
"""

import random
from fractions import Fraction

import pytest

from toeplitz_rigidity.exceptions import DomainError, SingularityError
from toeplitz_rigidity.modularity import (S, T, JacobiFormSpec, LawReport, ModularGroup, ModularMatrix, fold_law,
                                          group_generators, membership, modular_form_check, random_word,
                                          safe_call, word)
from toeplitz_rigidity.theta import ModularPoint, theta_eval

SAMPLES = [0.1 + 1.1j, -0.3 + 0.9j, 0.25 + 1.4j]


def eisenstein_e4(tau):
    """E4 from theta constants."""
    pt = ModularPoint(tau)
    return (theta_eval("theta1", 0, pt) ** 8 + theta_eval("theta2", 0, pt) ** 8
            + theta_eval("theta3", 0, pt) ** 8) / 2


def test_word_multiplies_letters():
    assert word("ST") == S @ T
    assert word("T^-2") == T.inverse() @ T.inverse()
    assert word("S^2") == ModularMatrix(-1, 0, 0, -1)
    with pytest.raises(DomainError):
        word("SU")


def test_determinant_must_be_one():
    with pytest.raises(DomainError):
        ModularMatrix(2, 0, 0, 1)


@pytest.mark.parametrize("group", list(ModularGroup))
def test_generators_belong_to_their_group(group):
    for _, m in group_generators(group):
        assert membership(m, group)


@pytest.mark.parametrize("group", [ModularGroup.GAMMA0_2, ModularGroup.GAMMA_UPPER_0_2, ModularGroup.GAMMA_THETA])
def test_random_words_stay_in_the_group(group):
    rng = random.Random(3)
    assert all(membership(random_word(group, 6, rng), group) for _ in range(20))


def test_group_aliases():
    assert ModularGroup.parse("Gamma0(2)") is ModularGroup.GAMMA0_2
    assert ModularGroup.parse("theta") is ModularGroup.GAMMA_THETA
    with pytest.raises(DomainError):
        ModularGroup.parse("gamma1(4)")


def test_jacobi_spec_accepts_half_integers_only():
    assert JacobiFormSpec.create("1/2", 4, "sl2z").index == Fraction(1, 2)
    with pytest.raises(DomainError):
        JacobiFormSpec.create(Fraction(1, 3), 4, "sl2z")


def test_fold_law_estimates_the_character():
    result = fold_law("g", [(2, 1, "a"), (4j, 2j, "b"), (None, 1, "c")])
    assert result.character == 2
    assert result.residual == 0
    assert result.samples_used == 2
    assert result.skipped == ["c"]


def test_fold_law_without_estimate():
    result = fold_law("g", [(2, 1, "a")], estimate=False)
    assert result.residual == pytest.approx(0.5)


def test_vanishing_rhs_with_nonzero_lhs_is_indeterminate():
    result = fold_law("g", [(1, 0, "a")])
    assert result.indeterminate
    assert result.residual == 1.0


def test_character_modulus_counts_in_the_verdict():
    result = fold_law("S", [(4, 1, "a"), (8j, 2j, "b")])
    assert result.expect_modulus(4).modulus_residual == 0
    assert LawReport("s-law", [result]).passed(1e-9)

    result.expect_modulus(2)
    report = LawReport("s-law", [result])
    assert report.max_modulus_residual == pytest.approx(1.0)
    assert report.max_residual == 0
    assert not report.passed(1e-9)
    assert report.to_dict()["results"][0]["expected_modulus"] == 2


def test_missing_character_misses_any_modulus():
    result = fold_law("S", [(0, 0, "a")]).expect_modulus(256)
    assert result.character is None
    assert result.modulus_residual == 1.0


def test_safe_call_skips_singular_samples():
    def singular(tau):
        raise SingularityError("zero")
    assert safe_call(singular, 1j) is None
    assert safe_call(lambda tau: 2 * tau, 1j) == 2j


def test_e4_is_modular_of_weight_four():
    report = modular_form_check(eisenstein_e4, 4, ModularGroup.SL2Z, SAMPLES)
    assert report.passed(1e-9)
    assert all(r.character == pytest.approx(1) for r in report.results)


def test_wrong_weight_fails():
    report = modular_form_check(eisenstein_e4, 2, ModularGroup.SL2Z, SAMPLES)
    assert not report.passed(1e-3)
