"""
Квадратури: складена формула Сімпсона на паралелепіпедах і обрізаних областях,
метод Монте-Карло та криволінійні інтеграли по ребрах межі
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import simpson

from weak_transnet.geometry import TOL, Box, Domain, Edge, clip_box, sample_interior
from weak_transnet.test_space import TestFunction

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray], np.ndarray]
# Лінії розриву коефіцієнтів: (вісь, значення координати)
Breaks = Sequence[Tuple[int, float]]

# Відносний зсув вузла з лінії розриву всередину шматка
BREAK_OFFSET = 1e-9


def _check_odd(n: int, name: str):
    if n < 3 or n % 2 == 0:
        raise ValueError(f"{name} має бути непарним і не меншим за 3, отримано {n}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Налаштування квадратур; mode - 'simpson' або 'mc'"""

    points_per_axis: int = 33
    mc_samples: int = 1089
    boundary_points_per_edge: int = 33
    mode: str = 'simpson'
    seed: int = 0

    def __post_init__(self):
        _check_odd(self.points_per_axis, "points_per_axis")
        _check_odd(self.boundary_points_per_edge, "boundary_points_per_edge")
        if self.mc_samples <= 0:
            raise ValueError(f"mc_samples має бути додатним, отримано {self.mc_samples}")
        if self.mode not in ('simpson', 'mc'):
            raise ValueError(f"Невідомий режим квадратури: {self.mode}")


@lru_cache(maxsize=32)
def _unit_simpson(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes = np.linspace(0.0, 1.0, n)
    # Ваги - інтеграли стовпців одиничної матриці
    weights = simpson(np.eye(n), x=nodes, axis=-1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def simpson_rule(a: float, b: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Вузли та ваги складеної формули Сімпсона на [a, b]"""
    _check_odd(n, "Кількість вузлів")
    nodes, weights = _unit_simpson(n)
    return a + (b - a) * nodes, (b - a) * weights


def tensor_rule(box: Box, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Тензорна формула Сімпсона: точки (n^d, d) та ваги (n^d,)"""
    rules = [simpson_rule(lo, hi, n) for lo, hi in zip(box.lo, box.hi)]
    grids = np.meshgrid(*[nodes for nodes, _ in rules], indexing='ij')
    points = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*[w for _, w in rules], indexing='ij')
    weights = np.prod(np.stack([w.ravel() for w in wgrids], axis=1), axis=1)
    return points, weights


def _on_line(values: np.ndarray, value: float) -> np.ndarray:
    return np.abs(values - value) <= TOL * max(1.0, abs(value))


def split_box(box: Box, breaks: Breaks) -> List[Box]:
    """Розрізання паралелепіпеда лініями x_axis = value, що проходять крізь його внутрішність"""
    pieces = [box]
    for axis, value in breaks:
        result = []
        for piece in pieces:
            if piece.lo[axis] + TOL < value < piece.hi[axis] - TOL:
                left_hi = list(piece.hi)
                right_lo = list(piece.lo)
                left_hi[axis] = right_lo[axis] = value
                result.extend([Box(piece.lo, left_hi), Box(right_lo, piece.hi)])
            else:
                result.append(piece)
        pieces = result
    return pieces


def _one_sided(points: np.ndarray, piece: Box, breaks: Breaks) -> np.ndarray:
    """Вузли на лінії розриву зсуваються всередину шматка, ваги не змінюються"""
    if not breaks:
        return points
    points = points.copy()
    for axis, value in breaks:
        shift = BREAK_OFFSET * (piece.hi[axis] - piece.lo[axis])
        on_line = _on_line(points[:, axis], value)
        if abs(piece.lo[axis] - value) <= TOL:
            points[on_line, axis] = value + shift
        elif abs(piece.hi[axis] - value) <= TOL:
            points[on_line, axis] = value - shift
    return points


def clipped_rule(domain: Domain, box: Box, n: int, breaks: Breaks = ()) -> Tuple[np.ndarray, np.ndarray]:
    """
    Об'єднана формула Сімпсона по шматках box ∩ Ω

    Шматки додатково розрізаються лініями розриву breaks, а вузли на цих лініях
    беруть однобічні значення, тож кусково-гладка функція інтегрується з порядком Сімпсона.
    """
    pieces = [part for piece in clip_box(domain, box) for part in split_box(piece, breaks)]
    if not pieces:
        return np.zeros((0, box.dim)), np.zeros(0)
    rules = [tensor_rule(piece, n) for piece in pieces]
    points = [_one_sided(p, piece, breaks) for (p, _), piece in zip(rules, pieces)]
    return np.vstack(points), np.concatenate([w for _, w in rules])


def simpson_box(f: ScalarField, box: Box, n_per_axis: int, breaks: Breaks = ()) -> float:
    points, weights = [], []
    for piece in split_box(box, breaks):
        p, w = tensor_rule(piece, n_per_axis)
        points.append(_one_sided(p, piece, breaks))
        weights.append(w)
    return float(np.concatenate(weights) @ np.asarray(f(np.vstack(points)), dtype=float))


def integrate_clipped(f: ScalarField, domain: Domain, box: Box, n_per_axis: int, breaks: Breaks = ()) -> float:
    """Інтеграл по box ∩ Ω, 0 для порожнього перетину"""
    _check_odd(n_per_axis, "Кількість вузлів")
    points, weights = clipped_rule(domain, box, n_per_axis, breaks)
    if len(weights) == 0:
        return 0.0
    return float(weights @ np.asarray(f(points), dtype=float))


def edge_rule(edge: Edge, n: int, breaks: Breaks = ()) -> Tuple[np.ndarray, np.ndarray]:
    """
    Вузли та ваги Сімпсона вздовж ребра (ваги враховують довжину)

    Ребро розрізається в точках перетину з лініями розриву тієї ж осі, кінці
    на лініях беруть однобічні значення.
    """
    axis = edge.axis
    a, b = edge.start[axis], edge.end[axis]
    lines = [value for line_axis, value in breaks if line_axis == axis]
    cuts = sorted((value - a) / (b - a) for value in lines if min(a, b) + TOL < value < max(a, b) - TOL)
    knots = [0.0] + cuts + [1.0]
    params, weights = [], []
    for s, t in zip(knots[:-1], knots[1:]):
        ts, w = simpson_rule(s, t, n)
        ts = ts.copy()
        shift = BREAK_OFFSET * (t - s)
        if any(abs(a + s * (b - a) - value) <= TOL for value in lines):
            ts[0] += shift
        if any(abs(a + t * (b - a) - value) <= TOL for value in lines):
            ts[-1] -= shift
        params.append(ts)
        weights.append(w)
    return edge.points(np.concatenate(params)), edge.length * np.concatenate(weights)


def edge_integral(f: ScalarField, domain: Domain, n_per_edge: int,
                  edges: Optional[Sequence[Edge]] = None, breaks: Breaks = ()) -> float:
    """
    Інтеграл по межі області як сума одновимірних формул Сімпсона по ребрах

    Args:
        f: Скалярне поле
        domain: Область
        n_per_edge: Непарна кількість вузлів на ребрі
        edges: Підмножина ребер (за замовчуванням усі ребра межі)
        breaks: Лінії розриву підінтегральної функції
    """
    _check_odd(n_per_edge, "Кількість вузлів на ребрі")
    total = 0.0
    for edge in (domain.edges if edges is None else edges):
        points, weights = edge_rule(edge, n_per_edge, breaks)
        total += float(weights @ np.asarray(f(points), dtype=float))
    return total


def gaussian_samples(psi: TestFunction, n: int, rng: np.random.Generator) -> np.ndarray:
    """Вибірка з густини ψ"""
    return psi.mean + psi.sigma * rng.standard_normal((n, len(psi.mean)))


def mc_integrate(f: ScalarField, sampler: str, n: int, seed=None,
                 region: Union[Domain, Box, None] = None, psi: Optional[TestFunction] = None,
                 domain: Optional[Domain] = None) -> float:
    """
    Інтегрування методом Монте-Карло

    Args:
        f: Підінтегральна функція (для importance-режиму - множник g в ∫_Ω g·ψ)
        sampler: 'uniform_on_region' або 'gaussian_importance'
        n: Кількість вибірок
        seed: Зерно
        region: Область рівномірної вибірки
        psi: Тестова функція для importance-режиму
        domain: Ω для відкидання вибірок поза областю

    Returns:
        Оцінка інтеграла
    """
    if n <= 0:
        raise ValueError(f"Кількість вибірок має бути додатною, отримано {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if sampler == 'uniform_on_region':
        if isinstance(region, Domain):
            points = sample_interior(region, n, rng)
        elif isinstance(region, Box):
            points = rng.uniform(region.lo, region.hi, size=(n, region.dim))
        else:
            raise ValueError("Для рівномірної вибірки потрібна область")
        return float(region.area * np.mean(np.asarray(f(points), dtype=float)))
    if sampler == 'gaussian_importance':
        if psi is None:
            raise ValueError("Для importance-вибірки потрібна тестова функція")
        points = gaussian_samples(psi, n, rng)
        values = np.asarray(f(points), dtype=float)
        if domain is not None:
            values = np.where(domain.contains(points), values, 0.0)
        return float(np.mean(values))
    raise ValueError(f"Невідомий спосіб вибірки: {sampler}")
