from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Solver configuration loaded from environment variables (prefix ``FAIRCLUST_``)."""

    # Pipeline defaults
    epsilon: float = 0.5
    seed: int = 0
    workers: int = 1

    # Resource caps
    enum_cap: int = 10**8
    oracle_cap: int = 10**6
    cover_cap: int = 10**6

    # Simplex
    max_pivots: int = 10**6
    pivot_tolerance: float = 1e-10
    feasibility_tolerance: float = 1e-7
    optimality_tolerance: float = 1e-7

    # Local search baseline
    max_swap_rounds: int = 1000
    improvement_threshold: float = 1e-4

    # Metric validation
    metric_exhaustive_limit: int = 200
    fact1_samples: int = 2000

    # Statistics harness
    stats_trials: int = 10000

    log_level: str = "INFO"

    class Config:
        env_prefix = "FAIRCLUST_"
        env_file = ".env"
        env_file_encoding = "utf-8"

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, v):
        """Accuracy parameters live in (0, 1]."""
        if not 0 < v <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        return v

    @field_validator("workers", "enum_cap", "oracle_cap", "cover_cap", "max_pivots", "max_swap_rounds")
    @classmethod
    def check_positive(cls, v):
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    @field_validator("improvement_threshold")
    @classmethod
    def check_threshold(cls, v):
        if not 0 < v < 1:
            raise ValueError("improvement_threshold must lie in (0, 1)")
        return v


def get_settings() -> Settings:
    """Get solver settings singleton."""
    return Settings()


settings = get_settings()
