"""
Tests for the K-theory q-series and the character maps.
"""

import pytest

from toeplitz_rigidity.exceptions import DomainError
from toeplitz_rigidity.series import RATIONAL, GeneratorTable, GradedElement, QSeries
from toeplitz_rigidity.theta import ModularPoint
from toeplitz_rigidity.witten_bundles import (BundleRootData, CharacterMap, KElement, k_character, lambda_series,
                                              q_bundle_qexp, q_char_form, rank_series, symmetric_series,
                                              theta_bundle_qexp, virtual_ratio)

RANKS = {"T": 5, "V": 3}


def test_normal_form():
    assert KElement.exterior("V", 4, RANKS).is_zero()
    assert KElement.symmetric("V", 1, RANKS) == KElement.symbol("V", RANKS)
    assert KElement.exterior("V", 0, RANKS) == 1


def test_ranks():
    assert KElement.exterior("V", 2, RANKS).rank() == 3
    assert KElement.symmetric("V", 2, RANKS).rank() == 6
    assert KElement.reduced("T", RANKS).rank() == 0
    assert KElement.spinor("T", {"T": 4}).rank() == 4


def test_undeclared_symbol_raises():
    with pytest.raises(DomainError):
        KElement.symbol("W", RANKS)


def test_lambda_series_stops_at_rank():
    series = lambda_series(KElement.symbol("V", RANKS), 4)
    assert series[1] == KElement.symbol("V", RANKS)
    assert series[3] == KElement.exterior("V", 3, RANKS)
    assert series[4] == 0


def test_k_character_evaluates_symmetric_functions():
    values = {"V": [1, 2, 3]}
    assert k_character(KElement.exterior("V", 2, RANKS), values) == 11
    assert k_character(KElement.symmetric("V", 2, RANKS), values) == 25
    assert k_character(KElement.trivial(4, RANKS), values) == 4
    with pytest.raises(DomainError):
        k_character(KElement.symbol("V", RANKS), {"V": [1, 2]})
    with pytest.raises(DomainError):
        k_character(KElement.spinor("V", RANKS), values)


def test_symmetric_times_alternating_lambda_is_one():
    w = KElement.symbol("V", RANKS) * 2 + 1
    values = {"V": [2, -1, 3]}
    unit = symmetric_series(w, 5) * lambda_series(w, 5).scale_variable(-1)
    assert [k_character(unit[i], values) for i in range(6)] == [1, 0, 0, 0, 0, 0]


def test_theta2_low_coefficients():
    tm, v = KElement.symbol("T", RANKS), KElement.symbol("V", RANKS)
    series = theta_bundle_qexp(2, tm, v, 3)
    assert series[0] == 1
    assert series[1] == -v
    assert series[2] == tm + KElement.exterior("V", 2, RANKS)


def test_q2_low_coefficients():
    series = q_bundle_qexp(2, 4, 3)
    e = KElement.symbol("E", {"E": 4})
    assert series[0] == 1
    assert series[1] == -e
    assert series[2] == KElement.exterior("E", 2, {"E": 4})


def test_q1_carries_the_spinor_bundle():
    series = q_bundle_qexp(1, 2, 3)
    assert series[0] == KElement.spinor("E", {"E": 2})


def test_q_bundle_rejects_odd_rank_and_bad_family():
    with pytest.raises(DomainError):
        q_bundle_qexp(2, 3, 5)
    with pytest.raises(DomainError):
        q_bundle_qexp(4, 2, 5)


def test_rank_series_matches_virtual_ratio():
    tm, v = KElement.symbol("T", RANKS), KElement.symbol("V", RANKS)
    ranks = rank_series(theta_bundle_qexp("2", tm, v, 7))
    assert ranks == virtual_ratio("2", 5, 3, 7)


def test_virtual_bundle_has_unit_rank_series():
    tm, v = KElement.symbol("T", RANKS), KElement.symbol("V", RANKS)
    ranks = rank_series(theta_bundle_qexp("2", tm, v, 5, virtual=True))
    assert ranks == QSeries.one(5, RATIONAL)


def test_unknown_bundle_kind():
    tm, v = KElement.symbol("T", RANKS), KElement.symbol("V", RANKS)
    with pytest.raises(DomainError):
        theta_bundle_qexp(4, tm, v, 5)


def _paired_line():
    table = GeneratorTable.build(even=["y"])
    y = GradedElement.generator(table, "y", 4)
    return y, BundleRootData("W", (y,), paired=True, scale=1)


def test_root_data_lambda_and_symmetric_series():
    y, data = _paired_line()
    lam = data.lambda_series(2)
    assert lam[1] == 2 + y * y
    assert lam[2] == 1
    sym = data.symmetric_series(2)
    assert sym[1] == 2 + y * y
    assert sym[2] == 3 + (y * y) * 4


def test_character_map_on_exterior_powers():
    y, data = _paired_line()
    ranks = {"W": 2}
    character = CharacterMap({"W": data}, GradedElement.one(y.table, y.degree_cap))
    assert character(KElement.exterior("W", 2, ranks)) == 1
    assert character(KElement.symbol("W", ranks) - 2) == y * y


def test_q_char_form_respects_the_degree_cap():
    y, data = _paired_line()
    pt = ModularPoint(1j, 5)
    full = q_char_form(2, data, pt, 4)
    assert full.degree_cap == 4
    assert full.constant_term()[0] == pytest.approx(1)
    assert not full.degree_part(4).is_zero()
    low = q_char_form(2, data, pt, 3)
    assert low.degree_cap == 3
    assert list(low.terms) == [()]


def test_q_char_form_of_a_rootless_bundle():
    trivial = BundleRootData("T", (), paired=True, zero_roots=3)
    form = q_char_form(1, trivial, ModularPoint(1j, 5), 7)
    assert isinstance(form, GradedElement)
    assert form.degree_cap == 7
    assert form.constant_term()[0] == 2
    assert q_char_form(2, trivial, ModularPoint(1j, 5), 7).constant_term()[0] == 1
