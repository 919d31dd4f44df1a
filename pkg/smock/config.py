from contextlib import contextmanager
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    environment: str = "development"
    log_level: str = "INFO"

    tolerance: float = 1e-9
    sampling_resolution: float = 0.05

    gh_exact_max_points: int = 5
    gh_swap_rounds: int = 4
    gh_refine_max_points: int = 400

    dk_enumeration_budget: int = 200_000
    net_max_candidates: int = 250_000

    mc_samples: int = 20_000
    mc_batch_size: int = 5_000

    lattice_max_radius: int = 4096
    lattice_max_nodes: int = 2_000

    model_config = SettingsConfigDict(env_file=".env", env_prefix="SMOCK_", extra="ignore")


@lru_cache()
def get_settings():
    return Settings()


@contextmanager
def overrides(**values):
    """Temporarily replace settings fields (used for the CLI --budget flag)."""
    settings = get_settings()
    saved = {name: getattr(settings, name) for name in values}
    for name, value in values.items():
        setattr(settings, name, value)
    try:
        yield settings
    finally:
        for name, value in saved.items():
            setattr(settings, name, value)
