"""
Tests for configuration profiles, run settings and logging setup.
"""

import logging

import pytest
import yaml
from pydantic import ValidationError

from toeplitz_rigidity.config import ConfigManager, RunConfig, build_run_config
from toeplitz_rigidity.logging_config import LoggerManager


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    for name in ("TOEPLITZ_CONFIG", "TOEPLITZ_PROFILE", "TOEPLITZ_THREADS", "TOEPLITZ_PRECISION"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("HOME", str(tmp_path))
    return tmp_path


def test_defaults_without_a_file(clean_env):
    manager = ConfigManager()
    assert not manager.load_config()
    assert manager.get_active_profile() == "default"
    assert manager.get_setting("q_trunc") == 13
    assert set(manager.get_all_profiles()) == {"default", "quick", "strict"}


def test_profiles_differ_in_tolerance(clean_env):
    manager = ConfigManager()
    manager.load_config()
    assert manager.get_setting("tolerance", profile="quick") > manager.get_setting("tolerance", profile="strict")
    assert manager.get_setting("precision", profile="strict") == 30


def test_yaml_file_is_merged(clean_env):
    path = clean_env / "toeplitz_config.yaml"
    path.write_text(yaml.safe_dump({"profile": "quick", "profiles": {"quick": {"q_trunc": 5}}}))
    manager = ConfigManager()
    assert manager.load_config()
    assert manager.get_active_profile() == "quick"
    assert manager.get_setting("q_trunc") == 5
    assert manager.get_setting("threads") == 4


def test_environment_overrides(clean_env, monkeypatch):
    monkeypatch.setenv("TOEPLITZ_PROFILE", "strict")
    monkeypatch.setenv("TOEPLITZ_THREADS", "3")
    manager = ConfigManager()
    manager.load_config()
    assert manager.get_active_profile() == "strict"
    assert manager.get_setting("threads") == 3


def test_unknown_profile_is_refused(clean_env):
    manager = ConfigManager()
    manager.load_config()
    assert not manager.set_active_profile("fast")
    assert manager.get_active_profile() == "default"


def test_save_and_reload(clean_env):
    manager = ConfigManager()
    manager.load_config()
    manager.set_setting("degree_cap", 9)
    target = str(clean_env / "saved" / "config.json")
    assert manager.save_config(target)
    reloaded = ConfigManager()
    reloaded.load_config(target)
    assert reloaded.get_setting("degree_cap") == 9


def test_run_config_overrides_ignore_none(clean_env):
    config = build_run_config("qexpand", {"q_trunc": 21, "tolerance": None}, profile="default")
    assert config.command == "qexpand"
    assert config.q_trunc == 21
    assert config.tolerance == 1e-8
    assert config.odd_start == 0
    assert build_run_config("signature", {"odd_start": 1}).odd_start == 1


@pytest.mark.parametrize("field,value", [("q_trunc", 0), ("tolerance", 0.0), ("threads", 0),
                                         ("output_format", "xml"), ("precision", -1),
                                         ("odd_start", 2)])
def test_run_config_rejects_bad_values(field, value):
    with pytest.raises(ValidationError):
        RunConfig(**{field: value})


def test_run_config_is_frozen():
    config = RunConfig()
    with pytest.raises(ValidationError):
        config.q_trunc = 3


def test_logging_writes_debug_records_to_file(tmp_path):
    manager = LoggerManager()
    log_file = tmp_path / "logs" / "run.log"
    manager.configure(console_level="WARNING", log_file=str(log_file), module_levels={"theta": "ERROR"})
    logging.getLogger("toeplitz_rigidity.series").debug("series detail")
    for handler in manager.handlers.values():
        handler.flush()
    assert "series detail" in log_file.read_text()
    assert manager.handlers["console"].level == logging.WARNING
    assert logging.getLogger("toeplitz_rigidity.theta").level == logging.ERROR
    manager._reset_handlers()
    manager.root_logger.propagate = True
    logging.getLogger("toeplitz_rigidity.theta").setLevel(logging.NOTSET)
