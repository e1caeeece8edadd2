"""
Tests for report formatting.
"""

import json
from fractions import Fraction

import numpy as np
import yaml

from toeplitz_rigidity.output_formatter import (OutputFormat, OutputFormatter, format_number, format_output,
                                                infer_format, save_output, to_serializable)

REPORT = {"check": "theta_s_law", "value": 1 + 2j, "exact": Fraction(-1, 6), "passed": np.bool_(True)}


def test_serializable_numbers():
    data = to_serializable(REPORT)
    assert data["value"] == {"re": 1.0, "im": 2.0}
    assert data["exact"] == "-1/6"
    assert data["passed"] is True
    assert to_serializable(float("inf")) == "inf"
    assert to_serializable(np.arange(3)) == [0, 1, 2]


def test_json_is_deterministic():
    first = format_output(REPORT, "json")
    assert first == format_output(dict(REPORT), "json")
    assert json.loads(first)["check"] == "theta_s_law"


def test_yaml_keeps_key_order():
    text = OutputFormatter("yaml").format_data(REPORT)
    assert list(yaml.safe_load(text)) == ["check", "value", "exact", "passed"]


def test_csv_rows_use_full_precision():
    rows = {"rows": [{"t": 0.1, "value": 1 / 3}, {"t": 0.2, "extra": 2}]}
    lines = OutputFormatter(OutputFormat.CSV).format_data(rows).splitlines()
    assert lines[0] == "t,value,extra"
    assert lines[1] == "0.10000000000000001,0.33333333333333331,"
    assert lines[2] == "0.20000000000000001,,2"


def test_csv_falls_back_to_json_for_nested_data():
    assert json.loads(OutputFormatter("csv").format_data({"a": 1})) == {"a": 1}


def test_unknown_format_means_json():
    assert OutputFormatter("xml").format == OutputFormat.JSON


def test_text_format_nests():
    text = format_output({"report": {"passed": True}, "notes": ["a"]}, "text")
    assert text.splitlines() == ["report:", "  passed: True", "notes:", "  - a"]


def test_format_number():
    assert format_number(Fraction(1, 840)) == "1/840"
    assert format_number(3) == "3"
    assert format_number(1j) == "0+1j"


def test_save_output_infers_format(tmp_path):
    target = tmp_path / "out" / "report.yaml"
    assert infer_format(str(target)) == "yaml"
    assert infer_format("report.dat") == "json"
    assert save_output(REPORT, str(target))
    assert yaml.safe_load(target.read_text())["exact"] == "-1/6"
