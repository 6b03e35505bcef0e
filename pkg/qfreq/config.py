"""
Application configuration using Pydantic Settings
"""
from pydantic_settings import BaseSettings
from typing import Literal
from functools import lru_cache


class Settings(BaseSettings):
    """Laboratory settings, overridable through QFREQ_* environment variables"""

    # Runtime
    THREADS: int = 1
    LOG_LEVEL: str = "INFO"
    OUTPUT_DIR: str = "out"

    # Quadrature
    HEIGHT_RTOL: float = 1e-8
    FLUX_RTOL: float = 1e-10
    AREA_RTOL: float = 1e-6
    MIN_CIRCLE_NODES: int = 64
    MAX_CIRCLE_NODES: int = 2 ** 18
    ENERGY_METHOD: Literal["flux", "area"] = "flux"

    # Root finding and jets
    ROOT_RESIDUAL: float = 1e-9
    JET_DEGENERACY: float = 1e-8

    # Singular detection
    COLLAPSE_TOL: float = 1e-7
    DEDUP_TOL: float = 1e-8
    DEGENERATE_HEIGHT: float = 1e-14
    EXTRAPOLATION_RMIN: float = 1e-3
    EXTRAPOLATION_TOL: float = 1e-2

    # Covering constants
    LAMBDA: float = 0.1
    DELTA: float = 0.05
    MAX_DEPTH: int = 60

    # Discrete minimization
    MINIMIZE_TOL: float = 1e-10
    MINIMIZE_MAX_ITER: int = 200

    @property
    def worker_count(self) -> int:
        """Thread pool size, never below one"""
        return max(1, self.THREADS)

    class Config:
        env_file = ".env"
        env_prefix = "QFREQ_"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


# Global settings instance
settings = get_settings()
