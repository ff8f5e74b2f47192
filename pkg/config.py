from fractions import Fraction
from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="CONEPOLAR_")

    # Каталог моделей (JSON), можно переопределить через CONEPOLAR_CATALOG_DIR
    CATALOG_DIR: Path = Path(__file__).resolve().parent / "catalog_data"

    # Точность численных путей (рациональное число строкой)
    TOL: str = "1/1000000000"

    # Сэмплирование
    SEED: int = 7
    SAMPLES: int = 200
    HCONC_SAMPLES: int = 500
    RAY_SAMPLES: int = 50
    SAMPLE_BOUND: int = 6
    VALIDATION_SAMPLES: int = 20

    # Параллельный запуск проверок
    MAX_WORKERS: int = 4
    BISECTION_MAX_STEPS: int = 200
    # уточнения ниже TOL (каждое в 1000 раз), прежде чем сравнение признаётся нерешённым
    COMPARE_REFINEMENTS: int = 2

    # Логирование
    LOG_LEVEL: str = "WARNING"
    LOG_DIR: Optional[Path] = None
    LOG_ROTATION: str = "10 MB"
    LOG_RETENTION: str = "7 days"

    @property
    def tol(self) -> Fraction:
        return Fraction(self.TOL)


config = Settings()

from logger import logger  # noqa: E402
