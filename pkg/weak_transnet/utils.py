"""
Утилітарні функції для роботи розв'язувача: логування, каталоги, зерна, помилки
"""

import sys
import logging
from pathlib import Path
from typing import Optional

import numpy as np

# Порядок стадій, через які проходить головне зерно експерименту
SEED_STAGES = ('basis', 'tests', 'boundary', 'interior', 'quadrature', 'interface', 'fourier')


class WeakTransNetError(Exception):
    """Базова помилка пакета"""


class GeometryError(WeakTransNetError, ValueError):
    """Некоректна геометрія: вироджені області, інтерфейси, індекси"""


class ConfigError(WeakTransNetError, ValueError):
    """Помилка конфігурації експерименту"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"рядок {line}: {message}"
        super().__init__(message)


class ReferenceGridError(WeakTransNetError, ValueError):
    """Помилка читання еталонної сітки"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"рядок {line}: {message}"
        super().__init__(message)


class SolverError(WeakTransNetError, ValueError):
    """Помилка розв'язання лінійної системи"""


def setup_logging(level=logging.INFO):
    """Налаштування системи логування"""
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )


def ensure_directory(path):
    """Забезпечує існування директорії"""
    Path(path).mkdir(parents=True, exist_ok=True)


def stage_seed(master_seed: int, stage: str) -> np.random.SeedSequence:
    """
    Зерно для окремої стохастичної стадії експерименту

    Args:
        master_seed: Головне зерно експерименту
        stage: Назва стадії з SEED_STAGES

    Returns:
        Нова SeedSequence, що залежить лише від (master_seed, stage)
    """
    if stage not in SEED_STAGES:
        raise ValueError(f"Невідома стадія зерна: {stage}")
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(SEED_STAGES.index(stage),))


def stage_rng(master_seed: int, stage: str) -> np.random.Generator:
    """Генератор випадкових чисел для стадії"""
    return np.random.default_rng(stage_seed(master_seed, stage))


def format_seconds(seconds: float) -> str:
    """Форматування тривалості у зрозумілий вигляд"""
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} мс"
    if seconds < 120.0:
        return f"{seconds:.1f} с"
    return f"{seconds / 60:.1f} хв"
