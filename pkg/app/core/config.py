# ===========================================================================
# File: app/core/config.py
# ===========================================================================
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import model_validator
import logging
import os


class Settings(BaseSettings):
    PROJECT_NAME: str = "tdgwg"

    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # modal
    CUTOFF_RTOL: float = 1e-10
    EXTRA_MODES: int = 5
    DEFAULT_EVANESCENT_MODES: int = 13

    # quadrature
    SERIES_THRESHOLD: float = 1e-6
    QUAD_ORDER_MARGIN: int = 8
    ORACLE_NODES: int = 64
    CLOSED_FORM_MIN_EXPONENT: float = 1e-3

    # mesh
    GEOMETRY_TOL: float = 1e-12
    CHUNKINESS_MIN: float = 0.05
    GRADING_RATIO: float = 1.5
    LAYER_EDGE_RATIO: float = 24.6
    MAX_REFINE_LEVELS: int = 8

    # basis
    MAGNITUDE_WARN: float = 1e8

    # solver
    COND_WARN: float = 1e14

    # output
    CSV_DIGITS: int = 17

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding='utf-8',
        case_sensitive=True,
        extra='ignore'
    )

    @model_validator(mode='after')
    def check_tolerances(self) -> 'Settings':
        if self.SERIES_THRESHOLD <= 0 or self.CUTOFF_RTOL <= 0:
            raise ValueError("SERIES_THRESHOLD and CUTOFF_RTOL must be positive")
        if self.QUAD_ORDER_MARGIN < 1:
            raise ValueError("QUAD_ORDER_MARGIN must be at least 1")
        return self

    @property
    def float_format(self) -> str:
        return f"{{:.{self.CSV_DIGITS}g}}"


settings = Settings()

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger(settings.PROJECT_NAME)
logger.debug(f"Logger initialized with level: {settings.LOG_LEVEL}")
