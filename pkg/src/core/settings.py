# settings.py
import logging
from typing import List, Optional, Union

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Initialize logging as the very first thing
# This ensures that even early messages (like dotenv loading status or errors) are logged.
from . import logging_config
logging_config.setup_logging()

from dotenv import load_dotenv

logging.info("Attempting to load environment variables from .env file...")
if load_dotenv():
    logging.info(".env file loaded successfully.")
else:
    logging.info(".env file not found or failed to load. Will rely on OS environment variables.")


class Settings(BaseSettings):
    """Laboratory defaults, overridable through ETLAB_* environment variables."""

    # Phase solver
    solver_tol: float = Field(
        default=1e-10,
        gt=0,
        description="Residual bound |sigma(alpha*u^2 + h) - u| for stationary points"
    )
    root_grid_points: int = Field(
        default=10_000,
        ge=100,
        description="Uniform scan points used to bracket fixed-point roots"
    )
    equal_height_rtol: float = Field(
        default=1e-9,
        gt=0,
        description="Relative tolerance on |g(u1) - g(u2)| for critical-curve classification"
    )
    degeneracy_atol: float = Field(
        default=1e-8,
        gt=0,
        description="Absolute tolerance on g'' for degenerate stationary points"
    )

    # Exact mean-field sums
    window_delta: float = Field(
        default=0.25,
        gt=0,
        lt=1,
        description="Window exponent delta for |m - u*| <= n^-delta"
    )
    mixture_epsilon: float = Field(
        default=0.05,
        gt=0,
        description="Half-width of the windows J(epsilon) around the two maximizers"
    )
    exact_n_ceiling: int = Field(
        default=20_000,
        description="Largest n accepted by the exact mean-field distribution"
    )
    enumeration_max_n: int = Field(
        default=7,
        description="Largest n accepted by brute-force enumeration"
    )

    # Sampler budgets
    burn_in_sweeps: int = Field(default=1000, ge=0)
    recorded_samples: int = Field(default=10_000, ge=1)
    thinning: int = Field(default=1, ge=1)
    max_workers: int = Field(
        default=1,
        ge=1,
        description="Worker processes for independent chains"
    )

    default_n_list: Union[str, List[int]] = Field(
        default="32,64,128",
        description="Graph sizes for sampler verification suites (comma-separated string or list)"
    )

    # Output
    output_dir: str = "results"
    output_format: str = Field(default="csv", pattern="^(csv|json)$")
    schema_version: str = "1"

    @field_validator('default_n_list', mode='after')
    @classmethod
    def parse_default_n_list(cls, v):
        """Parse default_n_list from comma-separated string or list"""
        if isinstance(v, str):
            # Handle comma-separated string from environment variable
            return [int(item.strip()) for item in v.split(',') if item.strip()]
        elif isinstance(v, list):
            return [int(item) for item in v]
        else:
            return [int(v)] if v else []

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="ETLAB_",
        case_sensitive=False,
        extra="ignore",  # Ignore extra environment variables
        env_parse_none_str="None"
    )


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get application settings singleton"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached singleton so the next get_settings() re-reads the environment."""
    global _settings
    _settings = None


if __name__ == "__main__":
    # setup_logging() is already called at the top of the module
    logging.info("Running settings.py as __main__ to show the resolved defaults...")
    for name, value in get_settings().model_dump().items():
        logging.info(f"{name} = {value!r}")
    logging.info("Finished settings.py __main__ check.")
