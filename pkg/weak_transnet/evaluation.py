"""
Оцінювання: відносна похибка L2, похибка проєкції, дослідження параметра форми,
обчислення на сітці та експорт полів у CSV
"""

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from weak_transnet.geometry import Domain
from weak_transnet.problems import ReferenceGrid
from weak_transnet.solvers import DEFAULT_RCOND, Solution, lstsq
from weak_transnet.trial_basis import build_transnet
from weak_transnet.utils import ensure_directory, stage_seed

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_F = (2.0, 1.0, 0.5, 0.1, 0.05, 0.03)
DEFAULT_GAMMA_GRID = tuple(np.round(np.concatenate([np.arange(0.1, 1.0, 0.1), np.arange(1.0, 16.5, 0.5)]), 2))


@dataclass
class ErrorReport:
    """Підсумок одного прогону для звіту JSON-lines"""

    method: str
    problem: str
    hyperparameters: Dict[str, Any]
    rel_l2: Optional[float]
    seed: int
    wall_time_ms: float
    experiment: str = ''
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def relative_l2(u_hat, u_ref) -> float:
    """
    ‖u_ref - u_hat‖₂ / ‖u_ref‖₂ на дискретній множині точок

    Точки, де еталон дорівнює nan (поза областю), не враховуються.
    """
    u_hat = np.asarray(u_hat, dtype=float).ravel()
    u_ref = np.asarray(u_ref, dtype=float).ravel()
    if u_hat.shape != u_ref.shape:
        raise ValueError(f"Розміри не збігаються: {u_hat.shape} та {u_ref.shape}")
    mask = np.isfinite(u_ref)
    norm = np.linalg.norm(u_ref[mask])
    if norm == 0.0:
        raise ValueError("Норма еталонного розв'язку дорівнює нулю")
    return float(np.linalg.norm(u_ref[mask] - u_hat[mask]) / norm)


@dataclass(frozen=True)
class GridSpec:
    """Рівномірна сітка nx×ny на прямокутнику bounds = (x0, y0, x1, y1)"""

    bounds: Tuple[float, float, float, float]
    nx: int = 129
    ny: int = 129

    @classmethod
    def for_domain(cls, domain: Domain, n: int = 129) -> 'GridSpec':
        box = domain.bounding_box
        return cls((box.lo[0], box.lo[1], box.hi[0], box.hi[1]), n, n)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.bounds[0], self.bounds[2], self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.bounds[1], self.bounds[3], self.ny)

    @property
    def points(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.xs, self.ys)
        return np.stack([xx.ravel(), yy.ravel()], axis=1)


def evaluate_on_grid(solution: Solution, grid: GridSpec, domain: Optional[Domain] = None) -> ReferenceGrid:
    """Значення розв'язку на сітці; поза замиканням області - nan"""
    points = grid.points
    values = solution.evaluate(points)
    if domain is not None:
        values = np.where(domain.contains(points), values, np.nan)
    return ReferenceGrid(grid.xs, grid.ys, values.reshape(grid.ny, grid.nx))


def field_on_grid(func: Callable[[np.ndarray], np.ndarray], grid: GridSpec,
                  domain: Optional[Domain] = None) -> ReferenceGrid:
    points = grid.points
    values = np.asarray(func(points), dtype=float)
    if domain is not None:
        values = np.where(domain.contains(points), values, np.nan)
    return ReferenceGrid(grid.xs, grid.ys, values.reshape(grid.ny, grid.nx))


def pointwise_error(u_hat: ReferenceGrid, reference: ReferenceGrid) -> ReferenceGrid:
    """Поелементна різниця u_hat - еталон на спільній сітці"""
    if u_hat.values.shape != reference.values.shape:
        raise ValueError("Сітки мають різні розміри")
    return ReferenceGrid(u_hat.xs, u_hat.ys, u_hat.values - reference.values)


def export_csv(grid: ReferenceGrid, path) -> Path:
    """Запис поля у CSV x,y,u (x змінюється найшвидше, 17 значущих цифр)"""
    path = Path(path)
    ensure_directory(path.parent)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write('x,y,u\n')
        for j, y in enumerate(grid.ys):
            for i, x in enumerate(grid.xs):
                f.write(f"{x:.17g},{y:.17g},{grid.values[j, i]:.17g}\n")
    logger.debug(f"Поле {grid.nx}×{grid.ny} записано у {path}")
    return path


def append_report(reports: Sequence[ErrorReport], path) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    with open(path, 'a', encoding='utf-8') as f:
        for report in reports:
            f.write(report.to_json() + '\n')
    return path


def gaussian_target(sigma_f: float, variant: str = 'bump') -> Callable[[np.ndarray], np.ndarray]:
    """
    Цільова функція дослідження параметра форми

    Args:
        sigma_f: Ширина гаусіана
        variant: 'bump' - exp(-(x²+y²)/(2σ²)), 'printed' - exp((x²-y²)/(2σ²))

    Returns:
        Скалярне поле
    """
    scale = 1.0 / (2.0 * np.pi * sigma_f ** 2)
    if variant == 'bump':
        return lambda p: scale * np.exp(-(p[:, 0] ** 2 + p[:, 1] ** 2) / (2.0 * sigma_f ** 2))
    if variant == 'printed':
        return lambda p: scale * np.exp((p[:, 0] ** 2 - p[:, 1] ** 2) / (2.0 * sigma_f ** 2))
    raise ValueError(f"Невідомий варіант цільової функції: {variant}")


def projection_error(basis, target, grid_points: np.ndarray, rcond: float = DEFAULT_RCOND) -> float:
    """
    Похибка найкращого наближення цільової функції у лінійній оболонці базису

    Args:
        basis: Базис з методом eval
        target: Скалярне поле або масив значень у точках
        grid_points: Точки тестування

    Returns:
        ‖Φα* - t‖₂ / ‖t‖₂
    """
    grid_points = np.atleast_2d(grid_points)
    if len(grid_points) == 0:
        raise ValueError("Порожня множина точок")
    values = np.asarray(target(grid_points) if callable(target) else target, dtype=float)
    norm = np.linalg.norm(values)
    if norm == 0.0:
        raise ValueError("Нульова цільова функція")
    _, residual = lstsq(basis.eval(grid_points), values, rcond)
    return float(residual / norm)


def shape_sweep(M_values: Sequence[int], sigma_f_values: Sequence[float] = DEFAULT_SIGMA_F,
                gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID, seeds: Sequence[int] = (0, 1, 2, 3, 4),
                n_test: int = 101, variant: str = 'bump') -> List[Dict[str, Any]]:
    """
    Пошук оптимального γ для пар (σ_f, M) на [-1,1]²

    Returns:
        Рядки з полями sigma_f, M, gamma_opt, curve (медіана похибки по зернах для кожного γ)
    """
    started = time.perf_counter()
    axis = np.linspace(-1.0, 1.0, n_test)
    xx, yy = np.meshgrid(axis, axis)
    points = np.stack([xx.ravel(), yy.ravel()], axis=1)
    rows = []
    for M in M_values:
        for sigma_f in sigma_f_values:
            target = gaussian_target(sigma_f, variant)(points)
            curve = []
            for gamma in gamma_grid:
                errors = [projection_error(build_transnet(M, 2, gamma, (0.0, 0.0), np.sqrt(2.0),
                                                         stage_seed(seed, 'basis')), target, points)
                          for seed in seeds]
                curve.append(float(np.median(errors)))
            best = int(np.argmin(curve))
            rows.append({'sigma_f': float(sigma_f), 'M': int(M), 'gamma_opt': float(gamma_grid[best]),
                         'error_opt': curve[best], 'curve': curve})
            logger.info(f"σ_f={sigma_f}, M={M}: γ*={gamma_grid[best]}, похибка {curve[best]:.3e}")
    logger.info(f"Дослідження параметра форми завершено за {time.perf_counter() - started:.1f} с")
    return rows
