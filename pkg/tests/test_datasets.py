"""
Tests for dataset loading, loop CSV files and the sample grids.
"""

import threading
from fractions import Fraction

import pytest

from toeplitz_rigidity.datasets import (builtin_datasets, load_dataset, load_loop_csv, parse_dataset, parse_number,
                                        resolve_dataset, save_loop_csv)
from toeplitz_rigidity.equivariant import EquivariantData
from toeplitz_rigidity.exceptions import DatasetError, DomainError
from toeplitz_rigidity.odd_chern import diagonal_loop, winding_c1
from toeplitz_rigidity.sampling import (is_admissible, parallel_map, rational_distance, t_samples, tau_samples,
                                        z_samples)


def one_component(gamma=1):
    return {
        "kind": "equivariant",
        "equivariant": {
            "ambient_dim": 3,
            "components": [{"dim": 1, "normal": [{"gamma": gamma, "roots": ["x"]}]}],
        },
    }


def test_builtin_datasets_are_listed():
    names = builtin_datasets()
    assert "s3_circle_action" in names
    assert "model_x7" in names
    assert "dataset.schema" not in names


def test_aliases_and_suffix_resolve():
    assert resolve_dataset("s3").name == "s3_circle_action.json"
    assert resolve_dataset("x7_pole.json").name == "x7_pole.json"
    with pytest.raises(FileNotFoundError):
        resolve_dataset("no_such_dataset")


def test_load_fills_in_the_name(tmp_path):
    path = tmp_path / "circle.json"
    path.write_text('{"kind": "equivariant", "equivariant": {"ambient_dim": 3, "components": []}}')
    assert load_dataset(path).name == "circle"


def test_malformed_json_is_a_dataset_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(DatasetError) as info:
        load_dataset(path)
    assert info.value.invariant == "parse"


def test_zero_normal_exponent_is_the_first_violation():
    assert parse_dataset(one_component()).equivariant.components[0].normal_rank == 1
    with pytest.raises(DatasetError) as info:
        parse_dataset(one_component(gamma=0))
    assert "gamma" in str(info.value)


def test_rank_count_against_ambient_dimension():
    data = one_component()
    data["equivariant"]["ambient_dim"] = 5
    with pytest.raises(DatasetError):
        parse_dataset(data)


def test_unknown_fields_are_rejected():
    data = one_component()
    data["colour"] = "blue"
    with pytest.raises(DatasetError):
        parse_dataset(data)


def test_model_dataset_is_not_equivariant_data():
    with pytest.raises(DatasetError):
        EquivariantData.from_dataset(load_dataset("model_x7"))


def test_parse_number():
    assert parse_number(3) == Fraction(3)
    assert parse_number("-1/840") == Fraction(-1, 840)
    assert parse_number(0.25) == 0.25
    with pytest.raises(DatasetError):
        parse_number("one")
    with pytest.raises(DatasetError):
        parse_number(True)


def test_loop_csv_keeps_the_winding(tmp_path):
    path = tmp_path / "loops" / "winding2.csv"
    save_loop_csv(diagonal_loop(2, 2, 32), path)
    loop = load_loop_csv(path, "S1")
    assert loop.resolution == 32
    assert winding_c1(loop).nearest == 2


def test_open_grid_is_rejected(tmp_path):
    path = tmp_path / "open.csv"
    rows = [f"{k},1,0,0,0,0,0,1,0" for k in (0, 1, 3, 4)]
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(DomainError):
        load_loop_csv(path, "S1")


def test_non_square_values_are_rejected(tmp_path):
    path = tmp_path / "odd.csv"
    path.write_text("0,1,0,0\n1,1,0,0\n")
    with pytest.raises(DatasetError):
        load_loop_csv(path, "S1")


def test_t_samples_avoid_small_rationals():
    samples = t_samples(10)
    assert len(samples) == 10
    assert all(0.05 <= t <= 0.45 for t in samples)
    assert all(is_admissible(t, margin=1e-4) for t in samples)
    assert t_samples(3) == samples[:3]
    assert rational_distance(0.5) == 0


def test_tau_samples_stay_in_the_region():
    for tau in tau_samples(12):
        assert abs(tau.real) <= 0.5
        assert 0.9 <= abs(tau) <= 2.0 + 1e-12
        assert tau.imag >= 0.4


def test_z_samples_include_the_fixed_moduli():
    samples = z_samples(20)
    moduli = sorted(abs(z) for z in samples)
    assert len(samples) == 20
    assert moduli[-1] == pytest.approx(1e6)
    assert any(abs(abs(z) - 0.999) < 1e-12 for z in samples)


def test_parallel_map_keeps_input_order():
    seen = set()

    def square(x):
        seen.add(threading.get_ident())
        return x * x

    assert parallel_map(square, range(20), threads=4) == [x * x for x in range(20)]
    assert parallel_map(square, [3], threads=4) == [9]
    assert parallel_map(square, [], threads=None) == []
