"""
Каталог тестових задач: поля κ, джерела, граничні дані, точні розв'язки,
розбиття на підобласті та еталонні сітки
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from weak_transnet.assembly import ProblemSpec
from weak_transnet.geometry import Box, Domain, PartitionLayout
from weak_transnet.trial_basis import BasisConfig, GammaSpec, mixed_gammas
from weak_transnet.utils import ReferenceGridError

logger = logging.getLogger(__name__)

PROBLEM_IDS = ('darcy_weak_only', 'darcy_multiscale', 'darcy_channel',
               'poisson_sharp', 'lshape_singular', 'poisson_smooth')


@dataclass(frozen=True)
class LayoutSpec:
    """Іменоване розбиття з розмірами та параметрами форми локальних базисів"""

    name: str
    subdomains: Tuple[Domain, ...]
    basis_sizes: Tuple[int, ...]
    gammas: Tuple[str, ...]

    def build(self, domain: Domain, kappa=None) -> PartitionLayout:
        return PartitionLayout.build(domain, self.subdomains, self.basis_sizes, kappa)

    def basis_configs(self, M: Optional[int] = None, gamma: Optional[GammaSpec] = None) -> List[BasisConfig]:
        """Конфігурації базисів; M та γ перекривають значення розбиття, 'mix' лишається змішаним"""
        configs = []
        for size, spec in zip(self.basis_sizes, self.gammas):
            m = size if M is None else M
            if spec == 'mix':
                configs.append(BasisConfig(m, tuple(mixed_gammas(m))))
            else:
                configs.append(BasisConfig(m, float(spec) if gamma is None else gamma))
        return configs


@dataclass(frozen=True)
class CatalogEntry:
    """Задача каталогу з гіперпараметрами за замовчуванням"""

    id: str
    description: str
    problem: ProblemSpec
    defaults: Dict[str, object]
    reference: str = 'exact'
    layouts: Dict[str, LayoutSpec] = field(default_factory=dict)

    def layout(self, name: str) -> PartitionLayout:
        if name not in self.layouts:
            raise KeyError(f"Задача {self.id} не має розбиття '{name}'")
        return self.layouts[name].build(self.problem.domain, self.problem.kappa)


def _xy(points: np.ndarray):
    points = np.atleast_2d(points)
    return points[:, 0], points[:, 1]


# --- Darcy без сильного розв'язку на [0,1]² ---------------------------------

def _darcy_weak_exact(points):
    x, _ = _xy(points)
    return np.where(x <= 0.5, x ** 2, -x ** 2 + 2.0 * x - 0.5)


def _darcy_weak_source(points):
    x, y = _xy(points)
    return np.where(x <= 0.5, -2.0 - 6.0 * x ** 2 - 2.0 * y ** 2, 6.0 * x ** 2 + 2.0 * y ** 2 - 4.0 * x + 2.0)


def _darcy_weak_kappa(points):
    x, y = _xy(points)
    return 1.0 + x ** 2 + y ** 2


def _darcy_weak_kappa_grad(points):
    x, y = _xy(points)
    return np.stack([2.0 * x, 2.0 * y], axis=1)


# --- Багатомасштабна проникність ---------------------------------------------

MULTISCALE_EPS = 1.0 / 8.0


def _multiscale_kappa(points):
    x, y = _xy(points)
    k = 2.0 * np.pi / MULTISCALE_EPS
    return 2.0 + np.sin(k * x) * np.cos(k * y)


def _multiscale_kappa_grad(points):
    x, y = _xy(points)
    k = 2.0 * np.pi / MULTISCALE_EPS
    return np.stack([k * np.cos(k * x) * np.cos(k * y), -k * np.sin(k * x) * np.sin(k * y)], axis=1)


def _trig_source(points):
    x, y = _xy(points)
    return np.sin(x) + np.cos(y)


def _zero(points):
    return np.zeros(len(np.atleast_2d(points)))


def _one(points):
    return np.ones(len(np.atleast_2d(points)))


# --- Канал високої проникності ----------------------------------------------

CHANNEL = (0.5, 0.7)


def _channel_kappa(points):
    x, _ = _xy(points)
    return np.where((x >= CHANNEL[0]) & (x <= CHANNEL[1]), 100.0, 1.0)


# --- Пуассон з різким градієнтом на [-1,1]² ---------------------------------

def _sharp_profile(x):
    t = np.tanh(10.0 * x)
    a = 0.1 * np.sin(2.0 * np.pi * x) + t
    a2 = -0.4 * np.pi ** 2 * np.sin(2.0 * np.pi * x) - 200.0 * t * (1.0 - t ** 2)
    return a, a2


def _sharp_exact(points):
    x, y = _xy(points)
    a, _ = _sharp_profile(x)
    return a * np.sin(2.0 * np.pi * y)


def _sharp_source(points):
    x, y = _xy(points)
    a, a2 = _sharp_profile(x)
    return -(a2 - 4.0 * np.pi ** 2 * a) * np.sin(2.0 * np.pi * y)


# --- L-область з кутовою особливістю ----------------------------------------

def lshape_angle(points) -> np.ndarray:
    """Кут від додатної осі x у гілці [-π/2, π], на якій розв'язок зникає на обох сторонах кута"""
    x, y = _xy(points)
    theta = np.arctan2(y, x)
    return np.where(theta < -0.5 * np.pi, theta + 2.0 * np.pi, theta)


def _lshape_exact(points):
    x, y = _xy(points)
    r = np.hypot(x, y)
    return r ** (2.0 / 3.0) * np.sin((2.0 * lshape_angle(points) + np.pi) / 3.0)


# --- Гладкий Пуассон з жорстким обмеженням ----------------------------------

def _smooth_exact(points):
    x, y = _xy(points)
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def _smooth_source(points):
    return 2.0 * np.pi ** 2 * _smooth_exact(points)


def _rect(x0, y0, x1, y1) -> Domain:
    return Domain.rectangle((x0, y0), (x1, y1))


def _lshape_layouts() -> Dict[str, LayoutSpec]:
    three = (_rect(0.0, -1.0, 1.0, 0.0), _rect(0.0, 0.0, 1.0, 1.0), _rect(-1.0, 0.0, 0.0, 1.0))
    # Три малі квадрати 0.2×0.2 біля кута та три L-подібні залишки квадрантів
    corners = (_rect(0.0, -0.2, 0.2, 0.0), _rect(0.0, 0.0, 0.2, 0.2), _rect(-0.2, 0.0, 0.0, 0.2))
    rests = (
        Domain.lshape(Box((0.0, -1.0), (1.0, 0.0)), Box((0.0, -0.2), (0.2, 0.0))),
        Domain.lshape(Box((0.0, 0.0), (1.0, 1.0)), Box((0.0, 0.0), (0.2, 0.2))),
        Domain.lshape(Box((-1.0, 0.0), (0.0, 1.0)), Box((-0.2, 0.0), (0.0, 0.2))),
    )
    six = corners + rests
    return {
        'three': LayoutSpec('three', three, (400,) * 3, ('1',) * 3),
        'six': LayoutSpec('six', six, (200,) * 6, ('1',) * 6),
        'six_mixed': LayoutSpec('six_mixed', six, (200,) * 6, ('mix',) * 3 + ('1',) * 3),
    }


def _build_catalog() -> Dict[str, CatalogEntry]:
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    square = Domain.rectangle((-1.0, -1.0), (1.0, 1.0))
    lshape = Domain.lshape(Box((-1.0, -1.0), (1.0, 1.0)), Box((-1.0, -1.0), (0.0, 0.0)))
    common = {'sigma': 0.05, 'n_l': 10, 'beta': 1.0, 'lambda': 1.0}
    entries = [
        CatalogEntry(
            'darcy_weak_only', "Darcy, κ=1+x²+y², розривне джерело, лише слабкий розв'язок",
            ProblemSpec(unit, _darcy_weak_kappa, _darcy_weak_source, _darcy_weak_exact,
                        kappa_grad=_darcy_weak_kappa_grad, exact=_darcy_weak_exact,
                        breaks=((0, 0.5),)),
            dict(common, M=200, N=300, gamma=1.0)),
        CatalogEntry(
            'darcy_multiscale', "Darcy, κ=2+sin(16πx)cos(16πy), f=sin x+cos y, g=0",
            ProblemSpec(unit, _multiscale_kappa, _trig_source, _zero, kappa_grad=_multiscale_kappa_grad),
            dict(common, M=2000, N=2000, gamma=1.0, fourier_p=64, fourier_sigmas='1,3', fourier_margin=1.0),
            reference='external_grid'),
        CatalogEntry(
            'darcy_channel', "Darcy з каналом κ=100 на [0.5,0.7]×(0,1), f=sin x+cos y, g=0",
            ProblemSpec(unit, _channel_kappa, _trig_source, _zero, breaks=((0, CHANNEL[0]), (0, CHANNEL[1]))),
            dict(common, M=200, N=600, gamma=1.0, layout='strips'),
            reference='external_grid',
            layouts={'strips': LayoutSpec('strips', (_rect(0.0, 0.0, 0.5, 1.0), _rect(0.5, 0.0, 0.7, 1.0),
                                                     _rect(0.7, 0.0, 1.0, 1.0)), (200,) * 3, ('1',) * 3)}),
        CatalogEntry(
            'poisson_sharp', "Пуассон, u=(0.1 sin 2πx + tanh 10x) sin 2πy на [-1,1]²",
            ProblemSpec(square, _one, _sharp_source, _sharp_exact, exact=_sharp_exact, kappa_constant=True),
            dict(common, M=1600, N=1800, gamma=5.0, layout='quadrants', interior_samples=10000),
            layouts={'quadrants': LayoutSpec('quadrants', (_rect(-1.0, -1.0, 0.0, 0.0), _rect(0.0, -1.0, 1.0, 0.0),
                                                           _rect(-1.0, 0.0, 0.0, 1.0), _rect(0.0, 0.0, 1.0, 1.0)),
                                             (400,) * 4, ('5',) * 4)}),
        CatalogEntry(
            'lshape_singular', "L-область, f=0, u=r^(2/3) sin((2θ+π)/3)",
            ProblemSpec(lshape, _one, _zero, _lshape_exact, exact=_lshape_exact, kappa_constant=True),
            dict(common, M=1200, N=1800, gamma=1.0, layout='three', boundary_per_edge=400,
                 interior_samples=40000),
            layouts=_lshape_layouts()),
        CatalogEntry(
            'poisson_smooth', "Пуассон, u=sin πx sin πy, жорстке обмеження бульбашкою",
            ProblemSpec(unit, _one, _smooth_source, _zero, exact=_smooth_exact, constraint='hard',
                        kappa_constant=True),
            dict(common, M=200, N=200, gamma=1.0, sigma=0.03)),
    ]
    return {entry.id: entry for entry in entries}


_CATALOG = _build_catalog()


def get(problem_id: str) -> CatalogEntry:
    """Запис каталогу за ідентифікатором"""
    if problem_id not in _CATALOG:
        raise KeyError(f"Невідома задача: {problem_id}. Доступні: {', '.join(PROBLEM_IDS)}")
    return _CATALOG[problem_id]


def catalog() -> List[CatalogEntry]:
    return [_CATALOG[pid] for pid in PROBLEM_IDS]


def eval_exact(entry: CatalogEntry, points) -> np.ndarray:
    if entry.problem.exact is None:
        raise ValueError(f"Задача {entry.id} не має точного розв'язку, потрібна еталонна сітка")
    return entry.problem.exact(np.atleast_2d(points))


def eval_kappa(entry: CatalogEntry, points) -> np.ndarray:
    return entry.problem.kappa(np.atleast_2d(points))


def eval_source(entry: CatalogEntry, points) -> np.ndarray:
    return entry.problem.source(np.atleast_2d(points))


def eval_boundary(entry: CatalogEntry, points) -> np.ndarray:
    return entry.problem.boundary(np.atleast_2d(points))


@dataclass(frozen=True)
class ReferenceGrid:
    """Еталонне поле на рівномірній сітці, values[j, i] = u(xs[i], ys[j])"""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    @property
    def nx(self) -> int:
        return len(self.xs)

    @property
    def ny(self) -> int:
        return len(self.ys)

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return float(self.xs[0]), float(self.ys[0]), float(self.xs[-1]), float(self.ys[-1])

    @property
    def points(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.xs, self.ys)
        return np.stack([xx.ravel(), yy.ravel()], axis=1)

    def interpolate(self, points) -> np.ndarray:
        """Білінійна інтерполяція; поза сіткою - nan"""
        points = np.atleast_2d(points)
        interpolator = RegularGridInterpolator((self.ys, self.xs), self.values, method='linear',
                                               bounds_error=False, fill_value=np.nan)
        return interpolator(points[:, ::-1])


def _uniform_axis(values: np.ndarray, name: str) -> np.ndarray:
    axis = np.unique(values)
    if len(axis) < 2:
        raise ReferenceGridError(f"Вісь {name} має менше двох вузлів")
    steps = np.diff(axis)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
        raise ReferenceGridError(f"Нерівномірний крок сітки по осі {name}")
    return axis


def load_reference_grid(path) -> ReferenceGrid:
    """
    Читання еталонної сітки з CSV (заголовок x,y,u, x змінюється найшвидше)

    Args:
        path: Шлях до файлу

    Returns:
        ReferenceGrid
    """
    path = Path(path)
    if not path.exists():
        raise ReferenceGridError(f"Файл еталонної сітки не знайдено: {path}")
    rows = []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ['x', 'y', 'u']:
            raise ReferenceGridError("очікувався заголовок 'x,y,u'", line=1)
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ReferenceGridError(f"очікувалось 3 значення, отримано {len(row)}", line=reader.line_num)
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ReferenceGridError(f"некоректне число: {','.join(row)}", line=reader.line_num)
    if not rows:
        raise ReferenceGridError("Файл не містить даних")
    data = np.asarray(rows)
    xs = _uniform_axis(data[:, 0], 'x')
    ys = _uniform_axis(data[:, 1], 'y')
    if len(data) != len(xs) * len(ys):
        raise ReferenceGridError(f"Кількість рядків {len(data)} не дорівнює {len(xs)}×{len(ys)}")
    expected_x = np.tile(xs, len(ys))
    expected_y = np.repeat(ys, len(xs))
    if not (np.array_equal(data[:, 0], expected_x) and np.array_equal(data[:, 1], expected_y)):
        bad = int(np.argmax((data[:, 0] != expected_x) | (data[:, 1] != expected_y)))
        raise ReferenceGridError("порушено порядок рядків (x змінюється найшвидше)", line=bad + 2)
    logger.info(f"Еталонна сітка {len(xs)}×{len(ys)} з {path}")
    return ReferenceGrid(xs, ys, data[:, 2].reshape(len(ys), len(xs)))
