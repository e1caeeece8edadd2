"""
Configuration system for toeplitz_rigidity.

Numerical settings (truncation orders, tolerances, product caps, precision and
thread counts) live in named profiles. A profile is picked from the config
file, the TOEPLITZ_PROFILE environment variable or the CLI ``--profile`` flag,
and CLI flags are layered on top through :class:`RunConfig`.
"""

import copy
import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

CONFIG_ENV = "TOEPLITZ_CONFIG"
PROFILE_ENV = "TOEPLITZ_PROFILE"
THREADS_ENV = "TOEPLITZ_THREADS"
PRECISION_ENV = "TOEPLITZ_PRECISION"
CONFIG_STEM = "toeplitz_config"

_BASE_PROFILE = {
    "q_trunc": 13,
    "degree_cap": 7,
    "tolerance": 1e-8,
    "product_tolerance": 1e-12,
    "max_product_factors": 2000,
    "pole_tolerance": 1e-9,
    "generator_denominator": 12,
    "precision": 0,
    "threads": 1,
    "output_format": "json",
    "log_level": "INFO",
    "default_n": 8,
    "odd_start": 0,
}

DEFAULT_CONFIG = {
    "profile": "default",
    "profiles": {
        "default": dict(_BASE_PROFILE),
        "quick": {
            **_BASE_PROFILE,
            "q_trunc": 7,
            "tolerance": 1e-6,
            "product_tolerance": 1e-10,
            "max_product_factors": 500,
            "threads": 4,
            "log_level": "WARNING",
        },
        "strict": {
            **_BASE_PROFILE,
            "degree_cap": 11,
            "tolerance": 1e-10,
            "product_tolerance": 1e-14,
            "max_product_factors": 5000,
            "pole_tolerance": 1e-10,
            "precision": 30,
            "log_level": "DEBUG",
        },
    },
}


class ConfigManager:
    """Manages configuration profiles and settings."""

    def __init__(self):
        self._config = copy.deepcopy(DEFAULT_CONFIG)
        self._config_file = None
        self._active_profile = None

    def load_config(self, config_file: Optional[str] = None) -> bool:
        """Load configuration from file.

        Args:
            config_file: Path to configuration file (optional)

        Returns:
            True if a file was loaded, False if defaults are in use
        """
        # Priority for config file location:
        # 1. Explicit path provided as argument
        # 2. Path specified in TOEPLITZ_CONFIG environment variable
        # 3. toeplitz_config.yaml/yml/json in current directory
        # 4. .toeplitz_config.yaml/yml/json in user's home directory
        if config_file is None:
            config_file = os.environ.get(CONFIG_ENV)

        if config_file is None:
            for ext in (".yaml", ".yml", ".json"):
                if os.path.exists(f"{CONFIG_STEM}{ext}"):
                    config_file = f"{CONFIG_STEM}{ext}"
                    break

        if config_file is None:
            home_dir = str(Path.home())
            for ext in (".yaml", ".yml", ".json"):
                home_config = os.path.join(home_dir, f".{CONFIG_STEM}{ext}")
                if os.path.exists(home_config):
                    config_file = home_config
                    break

        if config_file is None:
            logger.debug("No configuration file found, using defaults")
            self._set_active_profile()
            return False

        try:
            with open(config_file, "r") as f:
                if str(config_file).endswith((".yaml", ".yml")):
                    config_data = yaml.safe_load(f) or {}
                else:
                    config_data = json.load(f)

            self._update_config(config_data)
            self._config_file = str(config_file)
            logger.debug(f"Loaded configuration from {config_file}")
            self._set_active_profile()
            return True

        except (OSError, ValueError, yaml.YAMLError) as e:
            logger.error(f"Error loading configuration from {config_file}: {e}")
            self._set_active_profile()
            return False

    def _update_config(self, config_data: Dict[str, Any]) -> None:
        """Deep-merge new configuration data into the current configuration."""

        def deep_update(d, u):
            for k, v in u.items():
                if isinstance(v, dict) and k in d and isinstance(d[k], dict):
                    deep_update(d[k], v)
                else:
                    d[k] = v

        deep_update(self._config, config_data)

    def _set_active_profile(self) -> None:
        """Set the active profile based on configuration or environment."""
        env_profile = os.environ.get(PROFILE_ENV)
        if env_profile and env_profile in self._config["profiles"]:
            self._active_profile = env_profile
            return
        profile = self._config.get("profile", "default")
        if profile in self._config["profiles"]:
            self._active_profile = profile
        else:
            self._active_profile = "default"
            logger.warning(f"Profile '{profile}' not found, using 'default' profile")

    def save_config(self, config_file: Optional[str] = None) -> bool:
        """Save current configuration to file.

        Args:
            config_file: Path to configuration file (optional)

        Returns:
            True if configuration was saved successfully, False otherwise
        """
        config_file = config_file or self._config_file or f"{CONFIG_STEM}.yaml"
        try:
            os.makedirs(os.path.dirname(os.path.abspath(config_file)), exist_ok=True)
            with open(config_file, "w") as f:
                if config_file.endswith((".yaml", ".yml")):
                    yaml.safe_dump(self._config, f, default_flow_style=False)
                else:
                    json.dump(self._config, f, indent=2)
            self._config_file = config_file
            logger.info(f"Saved configuration to {config_file}")
            return True
        except OSError as e:
            logger.error(f"Error saving configuration to {config_file}: {e}")
            return False

    def get_active_profile(self) -> str:
        return self._active_profile

    def set_active_profile(self, profile: str) -> bool:
        """Activate a profile; returns False if it does not exist."""
        if profile in self._config["profiles"]:
            self._active_profile = profile
            self._config["profile"] = profile
            logger.debug(f"Activated profile: {profile}")
            return True
        logger.error(f"Profile '{profile}' not found")
        return False

    def get_profile_config(self, profile: Optional[str] = None) -> Dict[str, Any]:
        """Settings of a profile with environment overrides applied.

        Args:
            profile: Name of the profile (optional, defaults to active profile)
        """
        profile = profile or self._active_profile or "default"
        settings = dict(_BASE_PROFILE)
        settings.update(self._config["profiles"].get(profile, {}))
        if os.environ.get(THREADS_ENV):
            settings["threads"] = int(os.environ[THREADS_ENV])
        if os.environ.get(PRECISION_ENV):
            settings["precision"] = int(os.environ[PRECISION_ENV])
        return settings

    def get_setting(self, key: str, default: Any = None, profile: Optional[str] = None) -> Any:
        """Get a configuration setting from the specified or active profile."""
        return self.get_profile_config(profile).get(key, default)

    def set_setting(self, key: str, value: Any, profile: Optional[str] = None) -> None:
        """Set a configuration setting in the specified or active profile."""
        profile = profile or self._active_profile
        if profile in self._config["profiles"]:
            self._config["profiles"][profile][key] = value
        else:
            logger.error(f"Profile '{profile}' not found")

    def get_all_profiles(self) -> List[str]:
        return list(self._config.get("profiles", {}).keys())


class RunConfig(BaseModel):
    """Validated settings for one CLI run.

    Built from the active profile, then overridden by explicit CLI flags.
    """

    model_config = ConfigDict(extra="ignore", frozen=True)

    command: str = "selftest"
    inputs: List[str] = Field(default_factory=list)
    q_trunc: int = 13
    degree_cap: int = 7
    tolerance: float = 1e-8
    product_tolerance: float = 1e-12
    max_product_factors: int = 2000
    pole_tolerance: float = 1e-9
    generator_denominator: int = 12
    t_samples: int = 20
    tau_samples: int = 12
    output_format: str = "json"
    precision: int = 0
    threads: int = 1
    default_n: int = 8
    odd_start: int = 0
    log_level: str = "INFO"

    @field_validator("q_trunc")
    @classmethod
    def _q_trunc_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("q_trunc must be >= 1")
        return value

    @field_validator("tolerance", "product_tolerance", "pole_tolerance")
    @classmethod
    def _tolerance_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tolerances must be > 0")
        return value

    @field_validator("t_samples", "tau_samples", "threads", "max_product_factors")
    @classmethod
    def _count_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("sample and thread counts must be >= 1")
        return value

    @field_validator("output_format")
    @classmethod
    def _known_format(cls, value: str) -> str:
        value = value.lower()
        if value not in ("json", "csv", "text", "yaml"):
            raise ValueError(f"unknown output format '{value}'")
        return value

    @field_validator("precision")
    @classmethod
    def _precision_nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("precision must be 0 (double) or a positive digit count")
        return value

    @field_validator("odd_start")
    @classmethod
    def _odd_start_known(cls, value: int) -> int:
        if value not in (0, 1):
            raise ValueError("odd_start must be 0 or 1")
        return value


def build_run_config(command: str, overrides: Optional[Dict[str, Any]] = None,
                     profile: Optional[str] = None) -> RunConfig:
    """Merge the active profile with CLI overrides and validate.

    Args:
        command: Subcommand name
        overrides: Flag values; ``None`` entries are ignored
        profile: Profile name (optional, defaults to active profile)

    Raises:
        pydantic.ValidationError: if a merged value violates a RunConfig invariant
    """
    settings = _config_manager.get_profile_config(profile)
    settings["command"] = command
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return RunConfig.model_validate(settings)


# Global configuration manager instance
_config_manager = ConfigManager()


def get_config() -> ConfigManager:
    """Get the global configuration manager instance."""
    return _config_manager


def initialize_config(config_file: Optional[str] = None) -> ConfigManager:
    """Initialize the configuration system.

    Args:
        config_file: Path to configuration file (optional)

    Returns:
        ConfigManager instance
    """
    _config_manager.load_config(config_file)
    return _config_manager
