"""
Геометрія розрахункових областей - прямокутники, L-область, об'єднання прямокутників,
граничні та інтерфейсні вибірки, розбиття на підобласті
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from weak_transnet.utils import GeometryError

logger = logging.getLogger(__name__)

# Допуск для порівняння координат вершин і належності точок
TOL = 1e-12


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Box:
    """Паралелепіпед зі сторонами, паралельними осям"""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'lo', tuple(float(v) for v in self.lo))
        object.__setattr__(self, 'hi', tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi):
            raise GeometryError("Розмірності lo та hi не збігаються")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def area(self) -> float:
        return float(np.prod(self.widths))

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.widths <= 0.0))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    def contains(self, points: np.ndarray, tol: float = TOL) -> np.ndarray:
        """Належність точок замиканню паралелепіпеда"""
        points = np.atleast_2d(points)
        lo = np.asarray(self.lo) - tol
        hi = np.asarray(self.hi) + tol
        return np.all((points >= lo) & (points <= hi), axis=1)

    def intersect(self, other: 'Box') -> Optional['Box']:
        """Перетин з іншим паралелепіпедом або None, якщо площа перетину нульова"""
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(h - l <= 0.0 for l, h in zip(lo, hi)):
            return None
        return Box(lo, hi)


@dataclass(frozen=True)
class Edge:
    """Прямолінійний відрізок межі з одиничною зовнішньою нормаллю"""

    start: Tuple[float, float]
    end: Tuple[float, float]
    normal: Tuple[float, float]
    edge_id: int = 0

    @property
    def axis(self) -> int:
        """Вісь, уздовж якої змінюється координата на ребрі"""
        return 0 if _close(self.start[1], self.end[1]) else 1

    @property
    def length(self) -> float:
        return float(np.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    def points(self, ts: np.ndarray) -> np.ndarray:
        """Точки ребра для параметрів t з [0, 1]"""
        ts = np.asarray(ts, dtype=float)[:, None]
        return (1.0 - ts) * np.asarray(self.start) + ts * np.asarray(self.end)

    def clip(self, box: Box) -> Optional['Edge']:
        """Частина ребра всередині паралелепіпеда (додатної довжини) або None"""
        axis = self.axis
        fixed = 1 - axis
        if not (box.lo[fixed] - TOL <= self.start[fixed] <= box.hi[fixed] + TOL):
            return None
        a, b = sorted((self.start[axis], self.end[axis]))
        s, t = max(a, box.lo[axis]), min(b, box.hi[axis])
        if t - s <= 0.0:
            return None
        start = list(self.start)
        end = list(self.end)
        start[axis], end[axis] = s, t
        return Edge(tuple(start), tuple(end), self.normal, self.edge_id)


class DomainKind(Enum):
    RECTANGLE = 'rectangle'
    LSHAPE = 'lshape'
    UNION = 'union'


def _check_disjoint(rects: Sequence[Box]):
    for a, b in itertools.combinations(rects, 2):
        if a.intersect(b) is not None:
            raise GeometryError(f"Прямокутники {a} та {b} перетинаються")


@dataclass(frozen=True)
class Domain:
    """
    Розрахункова область як об'єднання прямокутників зі спільними сторонами

    Прямокутник, L-область та довільне об'єднання мають одне канонічне подання -
    кортеж прямокутників з попарно неперетинними внутрішностями.
    """

    kind: DomainKind
    rects: Tuple[Box, ...]

    def __post_init__(self):
        if not self.rects:
            raise GeometryError("Область без жодного прямокутника")
        for rect in self.rects:
            if rect.dim != 2:
                raise GeometryError("Підтримуються лише двовимірні області")
            if rect.is_degenerate:
                raise GeometryError(f"Вироджений прямокутник: {rect}")
        _check_disjoint(self.rects)

    @classmethod
    def rectangle(cls, lo: Sequence[float], hi: Sequence[float]) -> 'Domain':
        return cls(DomainKind.RECTANGLE, (Box(lo, hi),))

    @classmethod
    def lshape(cls, outer: Box, excluded: Box) -> 'Domain':
        """
        L-область: зовнішній прямокутник без кутового прямокутника

        Args:
            outer: Зовнішній прямокутник
            excluded: Вилучений прямокутник, що має спільну вершину з outer

        Returns:
            Область з трьох прямокутників сітки 2x2 без вилученої клітинки
        """
        xs, ys = [], []
        for k, splits in ((0, xs), (1, ys)):
            if _close(excluded.lo[k], outer.lo[k]) and excluded.hi[k] < outer.hi[k]:
                splits.extend([outer.lo[k], excluded.hi[k], outer.hi[k]])
            elif _close(excluded.hi[k], outer.hi[k]) and excluded.lo[k] > outer.lo[k]:
                splits.extend([outer.lo[k], excluded.lo[k], outer.hi[k]])
            else:
                raise GeometryError("Вилучений прямокутник має прилягати до кута зовнішнього")
        rects = []
        for j in range(2):
            for i in range(2):
                cell = Box((xs[i], ys[j]), (xs[i + 1], ys[j + 1]))
                if cell.intersect(excluded) is None:
                    rects.append(cell)
        return cls(DomainKind.LSHAPE, tuple(rects))

    @classmethod
    def union(cls, rects: Sequence[Box]) -> 'Domain':
        return cls(DomainKind.UNION, tuple(rects))

    @property
    def area(self) -> float:
        return float(sum(rect.area for rect in self.rects))

    @cached_property
    def bounding_box(self) -> Box:
        lo = np.min([rect.lo for rect in self.rects], axis=0)
        hi = np.max([rect.hi for rect in self.rects], axis=0)
        return Box(lo, hi)

    @property
    def centroid(self) -> np.ndarray:
        """Центр обмежувального прямокутника"""
        return self.bounding_box.center

    @property
    def half_diagonal(self) -> float:
        return 0.5 * float(np.linalg.norm(self.bounding_box.widths))

    @property
    def perimeter(self) -> float:
        return float(sum(edge.length for edge in self.edges))

    def contains(self, points: np.ndarray, tol: float = TOL) -> np.ndarray:
        """Належність точок замиканню області"""
        points = np.atleast_2d(points)
        inside = np.zeros(len(points), dtype=bool)
        for rect in self.rects:
            inside |= rect.contains(points, tol)
        return inside

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        """Ребра зовнішньої межі, злиті вздовж спільних прямих"""
        pieces = []
        for rect in self.rects:
            for axis, fixed, side in ((0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1)):
                value = rect.hi[fixed] if side else rect.lo[fixed]
                sign = 1.0 if side else -1.0
                intervals = [(rect.lo[axis], rect.hi[axis])]
                for other in self.rects:
                    if other is rect:
                        continue
                    # Сусід по інший бік лінії закриває частину ребра
                    touching = other.lo[fixed] if side else other.hi[fixed]
                    if not _close(touching, value):
                        continue
                    intervals = _subtract_interval(intervals, other.lo[axis], other.hi[axis])
                for s, t in intervals:
                    pieces.append((fixed, sign, value, s, t))
        merged = _merge_collinear(pieces)
        # Порядок: низ, право, верх, ліво - детермінований для відтворюваності
        order = {(1, -1.0): 0, (0, 1.0): 1, (1, 1.0): 2, (0, -1.0): 3}
        merged.sort(key=lambda p: (order[(p[0], p[1])], p[2], p[3]))
        edges = []
        for edge_id, (fixed, sign, value, s, t) in enumerate(merged):
            edges.append(_make_edge(fixed, sign, value, s, t, edge_id))
        return tuple(edges)


def _make_edge(fixed: int, sign: float, value: float, s: float, t: float, edge_id: int) -> Edge:
    normal = [0.0, 0.0]
    normal[fixed] = sign
    start = [0.0, 0.0]
    end = [0.0, 0.0]
    start[fixed] = end[fixed] = value
    start[1 - fixed], end[1 - fixed] = s, t
    return Edge(tuple(start), tuple(end), tuple(normal), edge_id)


def _subtract_interval(intervals: List[Tuple[float, float]], a: float, b: float) -> List[Tuple[float, float]]:
    result = []
    for s, t in intervals:
        if b <= s or a >= t:
            result.append((s, t))
            continue
        if a > s:
            result.append((s, a))
        if b < t:
            result.append((b, t))
    return [(s, t) for s, t in result if t - s > TOL]


def _merge_collinear(pieces: List[tuple]) -> List[tuple]:
    pieces = sorted(pieces)
    merged: List[tuple] = []
    for piece in pieces:
        if merged:
            fixed, sign, value, s, t = merged[-1]
            if (fixed, sign) == piece[:2] and _close(value, piece[2]) and _close(t, piece[3]):
                merged[-1] = (fixed, sign, value, s, piece[4])
                continue
        merged.append(piece)
    return merged


@dataclass(frozen=True)
class BoundarySample:
    point: np.ndarray
    outward_normal: np.ndarray
    edge_id: int


@dataclass(frozen=True)
class BoundarySamples:
    """Пакет граничних вибірок: точки, зовнішні нормалі та номери ребер"""

    points: np.ndarray
    normals: np.ndarray
    edge_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, index: int) -> BoundarySample:
        return BoundarySample(self.points[index], self.normals[index], int(self.edge_ids[index]))


def sample_boundary(domain: Domain, n_per_edge: int, mode: str = 'uniform_grid',
                    seed: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> BoundarySamples:
    """
    Вибірка точок на межі області

    Args:
        domain: Область
        n_per_edge: Кількість точок на кожному ребрі (не менше 2)
        mode: 'uniform_grid' (рівномірно з кінцями) або 'uniform_random'
        seed: Зерно для випадкового режиму
        rng: Готовий генератор (має пріоритет над seed)

    Returns:
        BoundarySamples з n_per_edge точками на кожному ребрі
    """
    if n_per_edge < 2:
        raise ValueError(f"Потрібно щонайменше 2 точки на ребро, отримано {n_per_edge}")
    if mode not in ('uniform_grid', 'uniform_random'):
        raise ValueError(f"Невідомий режим вибірки межі: {mode}")
    if rng is None:
        rng = np.random.default_rng(seed)
    points, normals, ids = [], [], []
    for edge in domain.edges:
        if edge.length <= 0.0:
            raise GeometryError(f"Ребро нульової довжини: {edge}")
        if mode == 'uniform_grid':
            ts = np.linspace(0.0, 1.0, n_per_edge)
        else:
            ts = rng.uniform(0.0, 1.0, n_per_edge)
        points.append(edge.points(ts))
        normals.append(np.tile(edge.normal, (n_per_edge, 1)))
        ids.append(np.full(n_per_edge, edge.edge_id))
    return BoundarySamples(np.vstack(points), np.vstack(normals), np.concatenate(ids))


def sample_interior(domain: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Рівномірна вибірка всередині області методом відхилення з обмежувального прямокутника"""
    if n <= 0:
        raise ValueError(f"Кількість точок має бути додатною, отримано {n}")
    box = domain.bounding_box
    accepted: List[np.ndarray] = []
    total = 0
    while total < n:
        batch = rng.uniform(box.lo, box.hi, size=(max(2 * (n - total), 16), 2))
        batch = batch[domain.contains(batch, tol=0.0)]
        accepted.append(batch)
        total += len(batch)
    return np.vstack(accepted)[:n]


def _merge_boxes(boxes: List[Box]) -> List[Box]:
    """Злиття сусідніх паралелепіпедів, що мають спільну цілу грань"""
    boxes = list(boxes)
    changed = True
    while changed:
        changed = False
        for i, j in itertools.combinations(range(len(boxes)), 2):
            a, b = boxes[i], boxes[j]
            merged = None
            for k in range(a.dim):
                others_equal = all(_close(a.lo[m], b.lo[m]) and _close(a.hi[m], b.hi[m])
                                   for m in range(a.dim) if m != k)
                if not others_equal:
                    continue
                if _close(a.hi[k], b.lo[k]) or _close(b.hi[k], a.lo[k]):
                    lo = list(a.lo)
                    hi = list(a.hi)
                    lo[k], hi[k] = min(a.lo[k], b.lo[k]), max(a.hi[k], b.hi[k])
                    merged = Box(lo, hi)
                    break
            if merged is not None:
                boxes = [box for idx, box in enumerate(boxes) if idx not in (i, j)] + [merged]
                changed = True
                break
    return boxes


def clip_box(domain: Domain, box: Box) -> List[Box]:
    """
    Перетин паралелепіпеда з областю

    Args:
        domain: Область
        box: Невироджений паралелепіпед

    Returns:
        Список паралелепіпедів з попарно неперетинними внутрішностями,
        об'єднання яких дорівнює box ∩ Ω (порожній, якщо перетину немає)
    """
    if box.is_degenerate:
        raise GeometryError(f"Вироджений паралелепіпед: {box}")
    pieces = [piece for piece in (rect.intersect(box) for rect in domain.rects) if piece is not None]
    return _merge_boxes(pieces)


@dataclass(frozen=True)
class Interface:
    """Спільний відрізок межі двох підобластей з нормаллю з left у right"""

    left: int
    right: int
    start: Tuple[float, float]
    end: Tuple[float, float]
    normal: Tuple[float, float]
    kappa_left: float = 1.0
    kappa_right: float = 1.0

    def __post_init__(self):
        if not (_close(self.start[0], self.end[0]) or _close(self.start[1], self.end[1])):
            raise GeometryError("Підтримуються лише інтерфейси, паралельні осям")
        if not _close(float(np.hypot(*self.normal)), 1.0):
            raise GeometryError("Нормаль інтерфейсу має бути одиничною")

    @property
    def length(self) -> float:
        return float(np.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.start) + np.asarray(self.end))

    def contains(self, points: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        points = np.atleast_2d(points)
        lo = np.minimum(self.start, self.end) - tol
        hi = np.maximum(self.start, self.end) + tol
        return np.all((points >= lo) & (points <= hi), axis=1)


@dataclass(frozen=True)
class InterfaceSamples:
    points: np.ndarray
    normal: np.ndarray
    interface_idx: int


@dataclass(frozen=True)
class PartitionLayout:
    """Неперекривне розбиття області на підобласті з інтерфейсами"""

    domain: Domain
    subdomains: Tuple[Domain, ...]
    interfaces: Tuple[Interface, ...]
    basis_sizes: Tuple[int, ...] = field(default=())

    @classmethod
    def build(cls, domain: Domain, subdomains: Sequence[Domain], basis_sizes: Optional[Sequence[int]] = None,
              kappa: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> 'PartitionLayout':
        """
        Побудова розбиття з автоматичним пошуком інтерфейсів

        Args:
            domain: Уся область Ω
            subdomains: Підобласті, замикання яких покривають Ω̄
            basis_sizes: Кількість нейронів M^(ℓ) у кожній підобласті
            kappa: Поле κ для односторонніх значень на інтерфейсах

        Returns:
            PartitionLayout
        """
        subdomains = tuple(subdomains)
        all_rects = [rect for sub in subdomains for rect in sub.rects]
        _check_disjoint(all_rects)
        covered = sum(sub.area for sub in subdomains)
        if not _close(covered, domain.area) or abs(covered - domain.area) > 1e-10 * domain.area:
            raise GeometryError(f"Підобласті покривають площу {covered}, а площа області {domain.area}")
        for sub in subdomains:
            inside = sum(piece.area for rect in sub.rects for piece in clip_box(domain, rect))
            if abs(inside - sub.area) > 1e-10 * domain.area:
                raise GeometryError("Підобласть виходить за межі області")
        interfaces = _find_interfaces(subdomains, kappa)
        if basis_sizes is None:
            basis_sizes = (0,) * len(subdomains)
        if len(basis_sizes) != len(subdomains):
            raise GeometryError("Кількість розмірів базисів не збігається з кількістю підобластей")
        logger.debug(f"Розбиття: {len(subdomains)} підобластей, {len(interfaces)} інтерфейсів")
        return cls(domain, subdomains, tuple(interfaces), tuple(int(m) for m in basis_sizes))

    @classmethod
    def single(cls, domain: Domain, basis_size: int = 0) -> 'PartitionLayout':
        """Тривіальне розбиття з однією підобластю"""
        return cls(domain, (domain,), (), (int(basis_size),))

    @property
    def n_subdomains(self) -> int:
        return len(self.subdomains)

    def membership(self, points: np.ndarray) -> np.ndarray:
        """Матриця (n, L) належності точок замиканням підобластей"""
        points = np.atleast_2d(points)
        return np.stack([sub.contains(points) for sub in self.subdomains], axis=1)

    def chi(self, points: np.ndarray) -> np.ndarray:
        """
        Значення функцій розбиття одиниці χ^(ℓ) у точках

        1 усередині Ω^(ℓ), 1/(|Λ^(ℓ)(x)|+1) на межі, 0 поза замиканням.
        """
        member = self.membership(points)
        counts = member.sum(axis=1, keepdims=True)
        with np.errstate(divide='ignore', invalid='ignore'):
            weights = np.where(member, 1.0 / np.maximum(counts, 1), 0.0)
        return weights

    def outer_edges(self, subdomain_idx: int) -> Tuple[Edge, ...]:
        """Частини межі ∂Ω, що належать межі підобласті"""
        sub = self.subdomains[subdomain_idx]
        result = []
        for edge in sub.edges:
            for outer in self.domain.edges:
                if outer.normal != edge.normal:
                    continue
                fixed = 1 - outer.axis
                if not _close(outer.start[fixed], edge.start[fixed]):
                    continue
                a, b = sorted((edge.start[outer.axis], edge.end[outer.axis]))
                c, d = sorted((outer.start[outer.axis], outer.end[outer.axis]))
                s, t = max(a, c), min(b, d)
                if t - s <= 0.0:
                    continue
                result.append(_make_edge(fixed, outer.normal[fixed], outer.start[fixed], s, t, outer.edge_id))
        return tuple(result)


def _find_interfaces(subdomains: Sequence[Domain], kappa) -> List[Interface]:
    raw = []
    for left, right in itertools.combinations(range(len(subdomains)), 2):
        for a in subdomains[left].rects:
            for b in subdomains[right].rects:
                for fixed in (0, 1):
                    axis = 1 - fixed
                    if _close(a.hi[fixed], b.lo[fixed]):
                        value, sign = a.hi[fixed], 1.0
                    elif _close(a.lo[fixed], b.hi[fixed]):
                        value, sign = a.lo[fixed], -1.0
                    else:
                        continue
                    s, t = max(a.lo[axis], b.lo[axis]), min(a.hi[axis], b.hi[axis])
                    if t - s > TOL:
                        raw.append((left, right, fixed, sign, value, s, t))
    raw.sort()
    merged: List[tuple] = []
    for item in raw:
        if merged:
            prev = merged[-1]
            if prev[:4] == item[:4] and _close(prev[4], item[4]) and _close(prev[6], item[5]):
                merged[-1] = prev[:6] + (item[6],)
                continue
        merged.append(item)
    interfaces = []
    for left, right, fixed, sign, value, s, t in merged:
        edge = _make_edge(fixed, sign, value, s, t, 0)
        kappa_left = kappa_right = 1.0
        if kappa is not None:
            mid = 0.5 * (np.asarray(edge.start) + np.asarray(edge.end))
            shift = 1e-9 * np.asarray(edge.normal)
            kappa_left = float(np.asarray(kappa((mid - shift)[None, :])).ravel()[0])
            kappa_right = float(np.asarray(kappa((mid + shift)[None, :])).ravel()[0])
        interfaces.append(Interface(left, right, edge.start, edge.end, edge.normal, kappa_left, kappa_right))
    return interfaces


def sample_interface(layout: PartitionLayout, interface_idx: int, n: int) -> InterfaceSamples:
    """
    Рівномірна вибірка точок на інтерфейсі (з кінцями)

    Args:
        layout: Розбиття
        interface_idx: Номер інтерфейсу
        n: Кількість точок (не менше 2)

    Returns:
        InterfaceSamples з точками та нормаллю n⃗^(ℓ,q)
    """
    if not 0 <= interface_idx < len(layout.interfaces):
        raise GeometryError(f"Номер інтерфейсу {interface_idx} поза межами [0, {len(layout.interfaces)})")
    if n < 2:
        raise ValueError(f"Потрібно щонайменше 2 точки на інтерфейсі, отримано {n}")
    iface = layout.interfaces[interface_idx]
    ts = np.linspace(0.0, 1.0, n)[:, None]
    points = (1.0 - ts) * np.asarray(iface.start) + ts * np.asarray(iface.end)
    return InterfaceSamples(points, np.asarray(iface.normal, dtype=float), interface_idx)


def count_neighbors(layout: PartitionLayout, subdomain_idx: int, point: Sequence[float]) -> int:
    """
    Кількість сусідніх підобластей |Λ^(ℓ)(x)|

    Args:
        layout: Розбиття
        subdomain_idx: Номер підобласті ℓ
        point: Точка із замикання Ω^(ℓ)

    Returns:
        Кількість q ≠ ℓ, для яких точка належить замиканню Ω^(q)
    """
    if not 0 <= subdomain_idx < layout.n_subdomains:
        raise GeometryError(f"Номер підобласті {subdomain_idx} поза межами")
    member = layout.membership(np.asarray(point, dtype=float)[None, :])[0]
    if not member[subdomain_idx]:
        raise GeometryError(f"Точка {tuple(point)} не належить замиканню підобласті {subdomain_idx}")
    return int(member.sum()) - 1
