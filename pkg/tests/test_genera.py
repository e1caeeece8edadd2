"""
Tests for the Landweber-Stong and Witten type genera of model manifolds.
"""

import pytest

from toeplitz_rigidity.datasets import load_dataset
from toeplitz_rigidity.exceptions import DatasetError, DomainError
from toeplitz_rigidity.genera import (UNASSERTED, ModelManifold, genus_modularity_report, genus_pair, genus_value,
                                      index_identity_residual, parse_genus)
from toeplitz_rigidity.odd_chern import transgression_coeffs, transgression_value
from toeplitz_rigidity.sampling import tau_samples


@pytest.fixture(scope="module")
def model_x7():
    return ModelManifold.from_dataset(load_dataset("model_x7"))


@pytest.fixture(scope="module")
def model_s3():
    return ModelManifold.from_dataset(load_dataset("model_s3"))


def test_parse_genus_aliases():
    assert parse_genus("W'").name == "Wp"
    assert parse_genus("phi_L").j == 1
    assert not parse_genus("psi2").witten
    with pytest.raises(DomainError):
        parse_genus("A")


def test_psi_genera_need_the_p1_condition():
    assert parse_genus("psi1").hypotheses == ("c3_zero", "p1_condition")
    assert parse_genus("W").hypotheses == ("c3_zero",)


def test_model_validation():
    with pytest.raises(DatasetError):
        ModelManifold(dim=4, tangent_roots=("y1", "y2"))
    with pytest.raises(DatasetError):
        ModelManifold(dim=7, tangent_roots=("y1",))
    with pytest.raises(DomainError):
        ModelManifold(dim=3, tangent_roots=("y1",), rank_e=3)


def test_genus_needs_dimension_three_mod_four():
    model = ModelManifold(dim=5, tangent_roots=("y1", "y2"))
    with pytest.raises(DomainError):
        genus_pair("W", model)


def test_top_class_picks_out_the_transgression_coefficient(model_x7):
    """With only <c7, [M]> = 1 the genus is lambda_{j,7} (times 8 for L)."""
    genus = genus_pair("W", model_x7, q_trunc=9).series
    expected = transgression_coeffs(2, 7, 9, 8).entry(7).to_complex()
    assert genus.max_abs_difference(expected) < 1e-12

    genus_l = genus_pair("L", model_x7, q_trunc=9).series
    expected_l = transgression_coeffs(1, 7, 9, 8).entry(7).to_complex() * 8
    assert genus_l.max_abs_difference(expected_l) < 1e-9


def test_genus_value_matches_point_transgression(model_x7):
    tau = 0.1 + 1.1j
    assert genus_value("Wp", model_x7, tau) == pytest.approx(transgression_value(3, 7, tau), rel=1e-9)


def test_genus_modularity_passes_under_hypotheses(model_x7):
    value = genus_pair("W", model_x7)
    report = genus_modularity_report(value, model_x7, tau_samples(4), tolerance=1e-8)
    assert report.weight == 4
    assert report.verdict == "PASS"


def test_violated_hypothesis_is_unasserted(model_s3):
    value = genus_pair("W", model_s3)
    report = genus_modularity_report(value, model_s3, tau_samples(3))
    assert report.violated == ["c3_zero"]
    assert report.verdict == UNASSERTED
    assert "law" in report.to_dict()


@pytest.mark.slow
def test_genus_is_minus_index_of_trivial_action(model_x7):
    assert index_identity_residual("W", model_x7, q_trunc=5) < 1e-9
