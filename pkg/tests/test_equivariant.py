"""
Tests for the fixed-point engine: anomaly relations, F-functions, the index
identity, rigidity scans and the signature function.
"""

import pytest

from toeplitz_rigidity.datasets import load_dataset
from toeplitz_rigidity.equivariant import (EquivariantData, FixedComponent, NormalSummand, VSummand, anomaly_check,
                                           check_generator, expected_s_modulus, f_components, f_function,
                                           f_prefactor, f_value, index_series, jacobi_spec, lefschetz_series,
                                           parse_kind, require_generator, rigidity_scan, s_law_check,
                                           signature_components, signature_rational, signature_scan, t_law_check,
                                           trivial_action_data, witten_twist)
from toeplitz_rigidity.exceptions import DatasetError, DomainError, InconsistentAnomalyError, PoleError
from toeplitz_rigidity.modularity import JacobiFormSpec, ModularGroup, jacobi_law_check
from toeplitz_rigidity.sampling import t_samples, tau_samples, z_samples


def load(name):
    return EquivariantData.from_dataset(load_dataset(name))


def circle_component(nu):
    return FixedComponent(dim=1, normal=(NormalSummand(1, ("x",)),), v_summands=(VSummand(nu, ("x",)),),
                          v0_zero_roots=1, odd_classes=("c1",), integrate={"c1": 1})


def test_parse_kind_aliases():
    assert parse_kind("fW'").name == "Wp"
    assert parse_kind("fdR2").name == "dR2"
    assert parse_kind("dR1").de_rham
    with pytest.raises(DomainError):
        parse_kind("fX")


def test_zero_normal_exponent_is_rejected():
    with pytest.raises(DatasetError):
        NormalSummand(0, ("x",))


def test_dimension_count_is_checked():
    with pytest.raises(DatasetError):
        EquivariantData(5, [circle_component(1)])


def test_anomaly_integer_of_shipped_data():
    assert anomaly_check(load("s3_circle_action")).n == 0
    report = anomaly_check(load("anomaly_n2"))
    assert report.n == 2
    assert report.ok


def test_empty_fixed_set_uses_declared_n():
    report = anomaly_check(load("empty_fixed_set"))
    assert report.n == 0
    assert report.notes


def test_components_disagreeing_on_n():
    data = EquivariantData(3, [circle_component(1), circle_component(2)])
    report = anomaly_check(data)
    assert report.per_component == [0, 3]
    assert not report.consistent
    with pytest.raises(InconsistentAnomalyError):
        report.require()


def test_f_prefactors():
    assert f_prefactor("W", 0, 4) == -1
    assert f_prefactor("L", 1, 2) == pytest.approx(1j / 3.141592653589793)


def test_jacobi_spec_defaults():
    spec = jacobi_spec("W", load("x7_pole"))
    assert spec.index == 0
    assert spec.weight == 5
    assert spec.group is ModularGroup.GAMMA_UPPER_0_2


def test_f_function_at_a_lattice_point_is_a_pole():
    with pytest.raises(PoleError):
        f_function("W", load("x7_pole"), 0.0, 5)


def test_empty_fixed_set_gives_zero():
    data = load("empty_fixed_set")
    t = t_samples(1)[0]
    assert f_function("W", data, t, 5).is_zero()
    assert index_series("W", data, t, 5).is_zero()


def test_generator_check():
    assert not check_generator(0.5)
    assert check_generator(t_samples(1)[0])
    require_generator(t_samples(1)[0])
    with pytest.raises(DomainError):
        require_generator(1 / 3)


def test_index_at_a_torsion_element_is_rejected():
    data = load("x7_s2_rotation")
    with pytest.raises(DomainError):
        lefschetz_series(data, witten_twist("W", data, 5), 0.25, 5)
    with pytest.raises(DomainError):
        index_series("W", data, 2 / 7, 5)


def test_rigid_dataset_passes_scan():
    data = load("x7_s2_rotation")
    north, south = f_components("W", data, t_samples(1)[0], 5)
    assert not north.is_zero()
    assert north.allclose(-south, 1e-12)

    scan = rigidity_scan("W", data, t_samples(4), 5)
    assert scan.component_scale > 1e-5
    assert not scan.vacuous
    assert scan.verdict == "PASS"
    assert scan.tag == "rigidity-expected"


def test_single_pole_component_is_not_rigid():
    scan = rigidity_scan("W", load("x7_pole"), t_samples(4), 5)
    assert scan.verdict == "FAIL"
    assert not scan.vacuous
    assert scan.max_variation > 1e-4


def test_signature_rational_value():
    """One normal line of weight 1 and <c7, [F]> = 1 give (z + 1)/(z - 1)/840."""
    data = load("x7_pole")
    assert signature_rational(data, 3.0) == pytest.approx(1 / 420)
    with pytest.raises(PoleError):
        signature_rational(data, 1.0)
    with pytest.raises(PoleError):
        signature_rational(data, 0)


def test_signature_scan_on_cancelling_poles():
    data = load("x7_s2_rotation")
    north, south = signature_components(data, 2.0)
    assert north == pytest.approx(1 / 280)
    assert south == pytest.approx(-1 / 280)

    report = signature_scan(data, z_samples(20))
    assert report.component_scale > 1e-4
    assert not report.vacuous
    assert report.verdict == "PASS"
    assert report.max_deviation < 1e-9


def test_unit_c1_pairing_on_the_fixed_circle():
    """The c1 term alone gives f(z) = (z + 1)/(z - 1); the F-functions see no degree-1 transgression."""
    data = load("s3_circle_action")
    assert signature_rational(data, 3.0) == pytest.approx(2)
    assert signature_rational(data, 2.0) == pytest.approx(3)
    assert signature_rational(data, 3.0, odd_start=1) == 0

    kept = signature_scan(data, z_samples(20))
    assert kept.verdict == "FAIL"
    assert kept.max_deviation > 0.5
    assert kept.limit_difference < 1e-5

    dropped = signature_scan(data, z_samples(20), odd_start=1)
    assert dropped.verdict == "PASS"
    assert dropped.vacuous
    assert dropped.to_dict()["odd_start"] == 1

    t = t_samples(1)[0]
    assert f_function("W", data, t, 5).is_zero()
    scan = rigidity_scan("W", data, t_samples(4), 5)
    assert scan.vacuous


def test_odd_start_must_be_zero_or_one():
    data = load("x7_pole")
    with pytest.raises(DomainError):
        signature_rational(data, 3.0, odd_start=2)
    with pytest.raises(DomainError):
        f_function("W", data, t_samples(1)[0], 5, odd_start=-1)


def test_odd_start_keeps_higher_classes():
    data = load("x7_pole")
    t = t_samples(1)[0]
    assert signature_rational(data, 3.0, odd_start=1) == pytest.approx(1 / 420)
    assert f_function("W", data, t, 5, odd_start=1).allclose(f_function("W", data, t, 5), 1e-14)
    assert index_series("W", data, t, 5, odd_start=1).allclose(f_function("W", data, t, 5, odd_start=1), 1e-9)


def test_trivial_action_rejects_unknown_v():
    with pytest.raises(DomainError):
        trivial_action_data(3, ["y1"], ["c3"], {"c3": 1}, v="normal")


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["L", "W", "Wp"])
def test_f_function_equals_index(kind):
    data = load("x7_s2_rotation")
    t = t_samples(1)[0]
    f = f_function(kind, data, t, 5)
    assert f.max_abs_difference(index_series(kind, data, t, 5)) < 1e-9


def jacobi_samples(count):
    return list(zip(t_samples(count), tau_samples(count)))


def test_s_law_character_modulus():
    assert expected_s_modulus("L", load("x7_pole")) == 256
    assert expected_s_modulus("L", load("anomaly_n2")) == 512
    assert expected_s_modulus("W", load("x7_pole")) is None


@pytest.mark.slow
def test_s_law_of_f_l_on_a_pole_component():
    report = s_law_check("L", load("x7_pole"), jacobi_samples(3))
    (result,) = report.results
    assert abs(result.character) == pytest.approx(256, rel=1e-8)
    assert result.modulus_residual < 1e-7
    assert report.spec["expected_character_modulus"] == 256
    assert report.passed(1e-7)


@pytest.mark.slow
def test_t_law_of_f_l_on_a_pole_component():
    report = t_law_check("L", load("x7_pole"), jacobi_samples(3))
    assert report.passed(1e-7)


@pytest.mark.slow
def test_jacobi_law_with_nonzero_index():
    data = load("anomaly_n2")
    spec = jacobi_spec("W", data)
    assert spec.index == 1
    assert spec.weight == 6
    samples = jacobi_samples(4)

    def f_w(t, tau):
        return f_value("W", data, t, tau)

    assert max(abs(f_w(t, tau)) for t, tau in samples) > 1e-8
    law = jacobi_law_check(f_w, spec, samples)
    assert law.passed(1e-7)
    wrong = jacobi_law_check(f_w, JacobiFormSpec.create(spec.index, 7, spec.group), samples)
    assert wrong.max_residual > 1e-2


@pytest.mark.slow
def test_s_law_of_f_l_with_nonzero_index():
    report = s_law_check("L", load("anomaly_n2"), jacobi_samples(3))
    assert abs(report.results[0].character) == pytest.approx(512, rel=1e-8)
    assert report.passed(1e-7)
