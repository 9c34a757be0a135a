"""
Configuration management for Conjnorm

Handles configuration loading from environment variables, an optional
YAML settings file and command-line arguments using Pydantic settings.
"""

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Optional

import yaml
from pydantic import Field, validator
from pydantic_settings import BaseSettings, SettingsConfigDict

if TYPE_CHECKING:
    from .free_bounds import SearchBudget

logger = logging.getLogger(__name__)


class ConjnormConfig(BaseSettings):
    """
    Main configuration class for Conjnorm.

    Configuration is loaded from:
    1. CLI overrides (highest priority)
    2. Environment variables (CONJNORM_*)
    3. .env file
    4. YAML settings file passed with --config-file
    5. Default values (lowest priority)
    """

    model_config = SettingsConfigDict(
        env_prefix="CONJNORM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging configuration
    log_level: str = Field(
        default="WARNING",
        description="Logging level (DEBUG, INFO, WARNING, ERROR)",
    )
    log_dir: str = Field(
        default="logs",
        description="Directory for log files",
    )
    verbose: bool = Field(
        default=False,
        description="Enable verbose console output",
    )
    log_to_file: bool = Field(
        default=False,
        description="Also write logs to a rotating file under log_dir",
    )

    # Resource caps
    max_group_order: int = Field(
        default=100_000,
        description="Largest permutation group that may be enumerated",
    )
    max_ball_size: int = Field(
        default=200_000,
        description="Largest free-group ball that may be enumerated",
    )

    # Free-word search budget
    max_factors: int = Field(
        default=4,
        description="Most conjugate factors tried in a decomposition search",
    )
    max_conjugator_length: int = Field(
        default=2,
        description="Longest conjugator word tried in a decomposition search",
    )
    max_relator_factors: int = Field(
        default=1,
        description="Most relator conjugates used to rewrite a word modulo N",
    )
    max_candidates: int = Field(
        default=250_000,
        description="Largest product table kept by the decomposition search",
    )

    # Output and runs
    output_format: str = Field(
        default="text",
        description="Report format (text or records)",
    )
    seed: int = Field(
        default=0,
        description="Seed for randomized suites and sampling",
    )
    strict_chain_depth: bool = Field(
        default=False,
        description="Treat a zero chain-norm value at finite depth as inconclusive",
    )

    @validator("log_level")
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is valid."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"log_level must be one of: {', '.join(valid_levels)}")
        return v.upper()

    @validator("output_format")
    def validate_output_format(cls, v: str) -> str:
        """Validate report format is supported."""
        valid_formats = ["text", "records"]
        if v.lower() not in valid_formats:
            raise ValueError(
                f"output_format must be one of: {', '.join(valid_formats)}"
            )
        return v.lower()

    @validator(
        "max_group_order",
        "max_ball_size",
        "max_factors",
        "max_conjugator_length",
        "max_candidates",
    )
    def validate_positive(cls, v: int) -> int:
        """Caps and budgets must be positive."""
        if v <= 0:
            raise ValueError("caps and search budgets must be positive")
        return v

    @validator("max_relator_factors")
    def validate_relator_factors(cls, v: int) -> int:
        """Relator factor budget may be zero but not negative."""
        if v < 0:
            raise ValueError("max_relator_factors must not be negative")
        return v

    def budget(self) -> "SearchBudget":
        """Search budget for free-group decompositions."""
        from .free_bounds import SearchBudget

        return SearchBudget(
            max_factors=self.max_factors,
            max_conjugator_length=self.max_conjugator_length,
            max_relator_factors=self.max_relator_factors,
            max_candidates=self.max_candidates,
            max_ball_size=self.max_ball_size,
        )

    def display_items(self) -> Dict[str, Any]:
        """Configuration values in display order."""
        return self.model_dump()


def _read_settings_file(config_file: str) -> Dict[str, Any]:
    """Read a YAML settings file into a flat dictionary."""
    config_path = Path(config_file)
    with open(config_path) as f:
        data = yaml.safe_load(f)

    if not data:
        logger.warning(f"Empty settings file: {config_path}")
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Settings file {config_path} must contain a mapping")
    return {str(key).lower().replace("-", "_"): value for key, value in data.items()}


def load_config(
    config_file: Optional[str] = None,
    cli_overrides: Optional[dict] = None,
) -> ConjnormConfig:
    """
    Load configuration with optional file and CLI overrides.

    Args:
        config_file: Optional YAML settings file path
        cli_overrides: CLI argument overrides

    Returns:
        Loaded configuration
    """
    config = ConjnormConfig()

    config_data = config.model_dump()
    if config_file and Path(config_file).exists():
        file_data = _read_settings_file(config_file)
        # Environment variables keep priority over the settings file
        explicit = {
            name
            for name in ConjnormConfig.model_fields
            if name in config.model_fields_set
        }
        for key, value in file_data.items():
            if key in ConjnormConfig.model_fields and key not in explicit:
                config_data[key] = value
        logger.debug(f"Loaded settings file {config_file}")

    if cli_overrides:
        config_data.update(cli_overrides)

    return ConjnormConfig(**config_data)


def get_default_config() -> ConjnormConfig:
    """
    Get default configuration for development/testing.

    Returns:
        Default configuration instance
    """
    return ConjnormConfig(
        log_level="DEBUG",
        verbose=True,
        log_to_file=False,
    )
