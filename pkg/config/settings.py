"""
Configuration Management for Carnot Hardy Verifier
Handles loading and validation of settings from environment variables and config files.
"""

import os
import logging
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass
from dotenv import load_dotenv


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing required values."""
    pass


@dataclass
class QuadratureSettings:
    """Default quadrature parameters."""
    gauss_nodes: int = 32
    montecarlo_samples: int = 2_000_000
    montecarlo_seed: int = 7
    montecarlo_min_dimension: int = 5
    chunk_size: int = 262144
    probe_nodes: int = 200


@dataclass
class ToleranceSettings:
    """Verdict and geometry tolerances."""
    absolute_floor: float = 1e-9
    unit_normal: float = 1e-12
    interface: float = 1e-10


@dataclass
class SharpnessSettings:
    """Defaults for beta sweeps and constant probing."""
    beta_range: str = "-2:1:0.001"
    refine: bool = True


class Settings:
    """Configuration management class for Carnot Hardy Verifier."""

    def __init__(self, config_path: Optional[str] = None, env_path: Optional[str] = None):
        """
        Initialize configuration management.

        Args:
            config_path: Path to YAML configuration file
            env_path: Path to .env file
        """
        self.logger = logging.getLogger(__name__)

        self.base_path = Path(__file__).parent.parent
        self.config_path = Path(config_path) if config_path else self.base_path / "config" / "settings.yaml"
        self.env_path = Path(env_path) if env_path else self.base_path / ".env"

        self._load_environment()
        self._load_yaml_config()
        self._validate_settings()

    def _load_environment(self) -> None:
        """Load environment variables from .env file if it exists."""
        if self.env_path.exists():
            load_dotenv(self.env_path)
            self.logger.debug(f"Loaded environment variables from {self.env_path}")
        else:
            self.logger.debug(f"Environment file not found: {self.env_path}")

    def _load_yaml_config(self) -> None:
        """Load YAML configuration file."""
        try:
            with open(self.config_path, 'r') as file:
                self.config = yaml.safe_load(file) or {}
            self.logger.debug(f"Loaded configuration from {self.config_path}")
        except FileNotFoundError:
            raise ConfigurationError(f"Configuration file not found: {self.config_path}")
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML configuration: {e}")
        if not isinstance(self.config, dict):
            raise ConfigurationError("Configuration root must be a mapping")

    def _validate_settings(self) -> None:
        """Validate value ranges of numeric settings."""
        q = self.quadrature
        if q.gauss_nodes < 2 or q.probe_nodes < 2:
            raise ConfigurationError("quadrature.gauss_nodes and probe_nodes must be >= 2")
        if q.montecarlo_samples < 2:
            raise ConfigurationError("quadrature.montecarlo_samples must be >= 2")
        if q.chunk_size < 1:
            raise ConfigurationError("quadrature.chunk_size must be positive")
        tol = self.tolerance
        if tol.absolute_floor < 0 or tol.interface <= 0:
            raise ConfigurationError("Tolerances must be nonnegative")
        if self.threads < 1:
            raise ConfigurationError("Thread count must be >= 1")

    # Application Settings
    @property
    def app_name(self) -> str:
        return self.config.get("app", {}).get("name", "Carnot Hardy Verifier")

    @property
    def app_version(self) -> str:
        """Get version from project __init__.py file."""
        try:
            init_file = self.base_path / "__init__.py"
            if init_file.exists():
                import re
                match = re.search(r'__version__\s*=\s*["\']([^"\']+)["\']', init_file.read_text())
                if match:
                    return match.group(1)
        except Exception:
            pass
        return "unknown"

    @property
    def debug_mode(self) -> bool:
        return bool(self.config.get("app", {}).get("debug", False))

    # Numerical Settings
    @property
    def quadrature(self) -> QuadratureSettings:
        """Get quadrature defaults."""
        config = self.config.get("quadrature", {})
        try:
            return QuadratureSettings(
                gauss_nodes=int(config.get("gauss_nodes", 32)),
                montecarlo_samples=int(config.get("montecarlo_samples", 2_000_000)),
                montecarlo_seed=int(config.get("montecarlo_seed", 7)),
                montecarlo_min_dimension=int(config.get("montecarlo_min_dimension", 5)),
                chunk_size=int(config.get("chunk_size", 262144)),
                probe_nodes=int(config.get("probe_nodes", 200)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid quadrature settings: {e}")

    @property
    def tolerance(self) -> ToleranceSettings:
        """Get tolerance settings."""
        config = self.config.get("tolerance", {})
        try:
            return ToleranceSettings(
                absolute_floor=float(config.get("absolute_floor", 1e-9)),
                unit_normal=float(config.get("unit_normal", 1e-12)),
                interface=float(config.get("interface", 1e-10)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid tolerance settings: {e}")

    @property
    def sharpness(self) -> SharpnessSettings:
        """Get sweep and probe defaults."""
        config = self.config.get("sharpness", {})
        return SharpnessSettings(
            beta_range=str(config.get("beta_range", "-2:1:0.001")),
            refine=bool(config.get("refine", True)),
        )

    # Output Settings
    @property
    def report_output_path(self) -> str:
        return self.config.get("output", {}).get("report_output_path", "./data/reports")

    @property
    def float_format(self) -> str:
        return self.config.get("output", {}).get("float_format", ".17g")

    # Runtime Settings
    @property
    def threads(self) -> int:
        env_val = os.getenv("HARDY_THREADS")
        if env_val:
            try:
                return int(env_val)
            except ValueError:
                raise ConfigurationError(f"HARDY_THREADS must be an integer, got '{env_val}'")
        return int(self.config.get("runtime", {}).get("threads", 1))

    # Logging Settings
    @property
    def log_level(self) -> str:
        return os.getenv("LOG_LEVEL", self.config.get("logging", {}).get("level", "INFO"))

    def get_setting(self, key: str, default: Any = None) -> Any:
        """Get a setting value by key with optional default."""
        keys = key.split('.')
        value = self.config

        try:
            for k in keys:
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def to_dict(self) -> Dict[str, Any]:
        """Return the effective configuration as a dictionary."""
        return {
            "app": {
                "name": self.app_name,
                "version": self.app_version,
                "debug": self.debug_mode
            },
            "quadrature": vars(self.quadrature),
            "tolerance": vars(self.tolerance),
            "sharpness": vars(self.sharpness),
            "output": {
                "report_path": self.report_output_path,
                "float_format": self.float_format
            },
            "runtime": {"threads": self.threads}
        }


def get_settings() -> Settings:
    """Get configured settings instance."""
    return Settings()
