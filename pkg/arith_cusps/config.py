from pathlib import Path
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class ArithSettings(BaseSettings):
    """Search budgets and runtime knobs for arith_cusps."""

    # --- Paths ---
    BASE_DIR: Path = Path(__file__).parent
    MANIFEST_PATH: Path = BASE_DIR / "data" / "flat_manifolds.json"

    # --- Factorization (desk-scale inputs only) ---
    TRIAL_DIVISION_BOUND: int = 10**6
    RHO_MAX_STEPS: int = 200_000
    RHO_RETRIES: int = 5

    # --- Constructive searches ---
    PRIME_BOUND: int = Field(default=200, gt=1, description="Auxiliary primes drawn from [2, PRIME_BOUND]")
    MAX_FACTORS: int = Field(default=4, gt=0, description="Max prime factors per candidate")
    BUDGET_ESCALATIONS: int = 3  # prime_bound doubles this many times before giving up
    CORE_ATTEMPTS: int = 64      # first-entry candidates tried when realizing a ternary core
    MAX_CANDIDATES: int = 200_000  # heap pops per prescribed-symbol search

    # --- Representations ---
    CLOSURE_CAP: int = 10**4

    # --- Logging ---
    LOG_LEVEL: str = "WARNING"

    model_config = SettingsConfigDict(
        env_prefix="ARITH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


# Singleton Instance
settings = ArithSettings()
