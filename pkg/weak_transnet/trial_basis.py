"""
Нейронні базиси TransNet: значення, градієнти, лапласіани, Фур'є-підйом,
жорстке обмеження множником-бульбашкою та локалізовані базиси розбиття одиниці
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from weak_transnet.geometry import Box, Domain, PartitionLayout
from weak_transnet.utils import GeometryError

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]
GammaSpec = Union[float, Sequence[float]]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    directions = rng.standard_normal((count, dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def resolve_gammas(gamma: GammaSpec, M: int) -> np.ndarray:
    """Перетворює скалярний або поелементний параметр форми у вектор довжини M"""
    gammas = np.asarray(gamma, dtype=float)
    if gammas.ndim == 0:
        gammas = np.full(M, float(gammas))
    if gammas.shape != (M,):
        raise ValueError(f"Очікувалось {M} параметрів форми, отримано {gammas.size}")
    if np.any(gammas <= 0.0):
        raise ValueError("Параметри форми мають бути додатними")
    return gammas


def mixed_gammas(M: int, values: Sequence[float] = (1.0, 5.0, 10.0)) -> np.ndarray:
    """Змішані параметри форми: нейрони ділляться на рівні групи за значеннями"""
    return np.concatenate([np.full(len(chunk), float(v))
                           for chunk, v in zip(np.array_split(np.arange(M), len(values)), values)])


def empirical_gamma(C: float, M: int, d: int, R: float) -> float:
    """Емпірична оцінка параметра форми γ ≈ C·M^(1/d)/R"""
    if M <= 0 or d <= 0 or R <= 0.0:
        raise ValueError("M, d та R мають бути додатними")
    return float(C) * M ** (1.0 / d) / float(R)


@dataclass(frozen=True)
class FourierMap:
    """
    Випадкове Фур'є-відображення 𝔉(x) = [cos(2π𝔅x); sin(2π𝔅x)]

    Образ лежить на сфері радіуса √P, тому базис будується у кулі радіуса √P + ε_F.
    """

    matrix: np.ndarray
    sigmas: Tuple[float, ...] = (1.0, 3.0)
    margin: float = 1.0

    @classmethod
    def build(cls, P: int, d: int, sigmas: Sequence[float] = (1.0, 3.0), margin: float = 1.0,
              seed: SeedLike = None) -> 'FourierMap':
        """
        Args:
            P: Кількість рядків 𝔅
            d: Розмірність простору
            sigmas: Стандартні відхилення груп рядків (перші ⌈P/k⌉ рядків - перше значення)
            margin: Запас ε_F до радіуса кулі
            seed: Зерно
        """
        if P <= 0:
            raise ValueError(f"P має бути додатним, отримано {P}")
        if margin <= 0.0:
            raise ValueError("Запас ε_F має бути додатним")
        rng = _rng(seed)
        rows = []
        for chunk, sigma in zip(np.array_split(np.arange(P), len(sigmas)), sigmas):
            rows.append(float(sigma) * rng.standard_normal((len(chunk), d)))
        return cls(np.vstack(rows), tuple(float(s) for s in sigmas), float(margin))

    @property
    def P(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_dim(self) -> int:
        return 2 * self.P

    @property
    def radius(self) -> float:
        return math.sqrt(self.P) + self.margin

    def phases(self, points: np.ndarray) -> np.ndarray:
        return 2.0 * np.pi * np.atleast_2d(points) @ self.matrix.T

    def lift(self, points: np.ndarray) -> np.ndarray:
        theta = self.phases(points)
        return np.hstack([np.cos(theta), np.sin(theta)])


def _bubble(box: Box, points: np.ndarray):
    """Значення, градієнт та лапласіан h(x) = ∏(x_k - lo_k)(hi_k - x_k)"""
    lo = np.asarray(box.lo)
    hi = np.asarray(box.hi)
    factors = (points - lo) * (hi - points)
    dfactors = hi + lo - 2.0 * points
    d = points.shape[1]
    h = np.prod(factors, axis=1)
    grad = []
    lap = np.zeros(len(points))
    for k in range(d):
        rest = np.prod(np.delete(factors, k, axis=1), axis=1) if d > 1 else np.ones(len(points))
        grad.append(dfactors[:, k] * rest)
        lap += -2.0 * rest
    return h, grad, lap


@dataclass(frozen=True)
class NeuralBasis:
    """
    Базис φ_j(x) = tanh(γ_j(a_jᵀ(y - x_c) + R·r_j)), y = x або y = 𝔉(x), плюс φ₀ ≡ 1

    Стовпець 0 - сталий, тож кількість функцій M+1.
    """

    directions: np.ndarray
    offsets: np.ndarray
    gammas: np.ndarray
    center: np.ndarray
    radius: float
    fourier: Optional[FourierMap] = None
    constraint: str = 'none'
    constraint_box: Optional[Box] = None
    activation: str = 'tanh'

    @property
    def M(self) -> int:
        return len(self.offsets)

    @property
    def size(self) -> int:
        return self.M + 1

    @property
    def hyperplane_offsets(self) -> np.ndarray:
        """Відстані гіперплощин від центру кулі, R·r_j"""
        return self.radius * self.offsets

    def with_bubble(self, box: Box) -> 'NeuralBasis':
        """Копія базису, помножена на бульбашку h, що зникає на межі box"""
        return dataclasses.replace(self, constraint='bubble_h', constraint_box=box)

    def _features(self, points: np.ndarray):
        """Аргумент s_j(x) = a_jᵀ(y - x_c), його похідні по x_k та лапласіан"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n, d = points.shape
        if self.fourier is None:
            s = (points - self.center) @ self.directions.T
            ds = [np.broadcast_to(self.directions[:, k], (n, self.M)) for k in range(d)]
            lap_s = np.zeros((n, self.M))
            return s, ds, lap_s
        fmap = self.fourier
        theta = fmap.phases(points)
        cos, sin = np.cos(theta), np.sin(theta)
        a_cos = self.directions[:, :fmap.P]
        a_sin = self.directions[:, fmap.P:]
        s = cos @ a_cos.T + sin @ a_sin.T - self.center @ self.directions.T
        ds = []
        for k in range(d):
            freq = 2.0 * np.pi * fmap.matrix[:, k]
            ds.append((-sin * freq) @ a_cos.T + (cos * freq) @ a_sin.T)
        weight = -4.0 * np.pi ** 2 * np.sum(fmap.matrix ** 2, axis=1)
        lap_s = (cos * weight) @ a_cos.T + (sin * weight) @ a_sin.T
        return s, ds, lap_s

    def _raw(self, points: np.ndarray, order: int):
        s, ds, lap_s = self._features(points)
        t = np.tanh(self.gammas * (s + self.radius * self.offsets))
        n = t.shape[0]
        values = np.hstack([np.ones((n, 1)), t])
        if order == 0:
            return values, None, None
        dt = self.gammas * (1.0 - t ** 2)
        grads = [np.hstack([np.zeros((n, 1)), dt * dsk]) for dsk in ds]
        if order == 1:
            return values, grads, None
        d2t = -2.0 * self.gammas ** 2 * t * (1.0 - t ** 2)
        sq = sum(dsk ** 2 for dsk in ds)
        lap = np.hstack([np.zeros((n, 1)), dt * lap_s + d2t * sq])
        return values, grads, lap

    def eval(self, points: np.ndarray) -> np.ndarray:
        """Матриця Φ розміру (n, M+1)"""
        values, _, _ = self._raw(points, 0)
        if self.constraint == 'bubble_h':
            h, _, _ = _bubble(self.constraint_box, np.atleast_2d(points))
            values = h[:, None] * values
        return values

    def eval_grad(self, points: np.ndarray) -> List[np.ndarray]:
        """Список матриць Φ_{x_k}, по одній на кожну координату"""
        values, grads, _ = self._raw(points, 1)
        if self.constraint == 'bubble_h':
            h, dh, _ = _bubble(self.constraint_box, np.atleast_2d(points))
            grads = [dh[k][:, None] * values + h[:, None] * g for k, g in enumerate(grads)]
        return grads

    def eval_laplacian(self, points: np.ndarray) -> np.ndarray:
        """Матриця Δφ_j(x^(m))"""
        values, grads, lap = self._raw(points, 2)
        if self.constraint == 'bubble_h':
            h, dh, lap_h = _bubble(self.constraint_box, np.atleast_2d(points))
            cross = sum(dh[k][:, None] * g for k, g in enumerate(grads))
            lap = lap_h[:, None] * values + 2.0 * cross + h[:, None] * lap
        return lap


def build_transnet(M: int, d: int, gammas: GammaSpec, center: Sequence[float], radius: float,
                   seed: SeedLike = None) -> NeuralBasis:
    """
    Побудова базису TransNet з гіперплощинами, рівномірно розподіленими у кулі

    Args:
        M: Кількість нейронів
        d: Розмірність
        gammas: Параметр форми (скаляр або M значень)
        center: Центр кулі x_c
        radius: Радіус кулі R
        seed: Зерно або SeedSequence

    Returns:
        NeuralBasis з M+1 функцій
    """
    if M <= 0:
        raise ValueError(f"Кількість нейронів має бути додатною, отримано {M}")
    if radius <= 0.0:
        raise ValueError(f"Радіус має бути додатним, отримано {radius}")
    gammas = resolve_gammas(gammas, M)
    rng = _rng(seed)
    directions = _unit_directions(rng, M, d)
    offsets = rng.uniform(0.0, 1.0, M)
    logger.debug(f"TransNet: M={M}, d={d}, R={radius:.4f}")
    return NeuralBasis(directions, offsets, gammas, np.asarray(center, dtype=float), float(radius))


def build_fourier_basis(M: int, fourier: FourierMap, gammas: GammaSpec, seed: SeedLike = None) -> NeuralBasis:
    """Базис у піднятому просторі ℝ^{2P}: куля B_R(0), R = √P + ε_F"""
    if M <= 0:
        raise ValueError(f"Кількість нейронів має бути додатною, отримано {M}")
    gammas = resolve_gammas(gammas, M)
    rng = _rng(seed)
    directions = _unit_directions(rng, M, fourier.output_dim)
    offsets = rng.uniform(0.0, 1.0, M)
    logger.debug(f"F-TransNet: M={M}, P={fourier.P}, R={fourier.radius:.4f}")
    return NeuralBasis(directions, offsets, gammas, np.zeros(fourier.output_dim), fourier.radius, fourier=fourier)


@dataclass(frozen=True)
class BasisConfig:
    """Параметри побудови базису для конвеєрів розв'язувача"""

    M: int
    gamma: GammaSpec = 1.0
    center: Optional[Tuple[float, ...]] = None
    radius: Optional[float] = None

    def build(self, domain: Domain, seed: SeedLike = None) -> NeuralBasis:
        """Куля за замовчуванням - центр обмежувального прямокутника та півдіагональ"""
        center = domain.centroid if self.center is None else self.center
        radius = domain.half_diagonal if self.radius is None else self.radius
        return build_transnet(self.M, 2, self.gamma, center, radius, seed)


@dataclass(frozen=True)
class FourierConfig:
    P: int = 64
    sigmas: Tuple[float, ...] = (1.0, 3.0)
    margin: float = 1.0


@dataclass(frozen=True)
class PoUBasis:
    """
    Глобальний базис ζ_ν = χ^(ℓ)φ_j^(ℓ), ν нумерує пари (ℓ, j) по підобластях
    """

    layout: PartitionLayout
    bases: Tuple[NeuralBasis, ...]

    @property
    def size(self) -> int:
        return sum(basis.size for basis in self.bases)

    @property
    def block_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([basis.size for basis in self.bases])])

    def block(self, subdomain_idx: int) -> slice:
        offsets = self.block_offsets
        return slice(int(offsets[subdomain_idx]), int(offsets[subdomain_idx + 1]))

    def _scaled(self, points: np.ndarray, local) -> np.ndarray:
        points = np.atleast_2d(points)
        chi = self.layout.chi(points)
        blocks = [chi[:, [idx]] * local(basis) for idx, basis in enumerate(self.bases)]
        return np.hstack(blocks)

    def eval(self, points: np.ndarray) -> np.ndarray:
        return self._scaled(points, lambda basis: basis.eval(points))

    def eval_grad(self, points: np.ndarray) -> List[np.ndarray]:
        # χ кусково-стала, тож похідна береться від внутрішнього значення
        points = np.atleast_2d(points)
        chi = self.layout.chi(points)
        per_block = [basis.eval_grad(points) for basis in self.bases]
        return [np.hstack([chi[:, [idx]] * grads[k] for idx, grads in enumerate(per_block)])
                for k in range(points.shape[1])]

    def eval_laplacian(self, points: np.ndarray) -> np.ndarray:
        return self._scaled(points, lambda basis: basis.eval_laplacian(points))


def build_pou_basis(layout: PartitionLayout, bases: Sequence[NeuralBasis]) -> PoUBasis:
    """Об'єднання локальних базисів підобластей у глобальний базис розміру Σ(M^(ℓ)+1)"""
    if len(bases) != layout.n_subdomains:
        raise GeometryError(f"Підобластей {layout.n_subdomains}, а базисів {len(bases)}")
    return PoUBasis(layout, tuple(bases))
