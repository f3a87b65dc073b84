"""
Розв'язання складених систем найменших квадратів та наскрізні конвеєри
WTN, F-WTN, PoU-WTN, SF, PoU-SF, DRM, F-DRM
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from weak_transnet.assembly import (AssembledSystem, ProblemSpec, assemble_boundary, assemble_drm,
                                    assemble_interface, assemble_sf, assemble_weak, sf_beta_tilde,
                                    stack_blocks, weak_beta_tilde)
from weak_transnet.geometry import PartitionLayout, sample_boundary, sample_interior
from weak_transnet.quadrature import QuadratureConfig
from weak_transnet.test_space import build_test_set
from weak_transnet.trial_basis import (BasisConfig, FourierConfig, FourierMap, NeuralBasis, PoUBasis,
                                       build_fourier_basis, build_pou_basis)
from weak_transnet.utils import SolverError, stage_rng, stage_seed

logger = logging.getLogger(__name__)

METHODS = ('WTN', 'FWTN', 'POU_WTN', 'SF', 'POU_SF', 'DRM', 'FDRM')
DEFAULT_RCOND = 1e-10
BETA_GRID = (0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class TestConfig:
    """Параметри набору тестових функцій"""

    __test__ = False

    N: int
    sigma: Tuple[float, float] = (0.05, 0.05)
    n_l: int = 10


@dataclass(frozen=True)
class SampleConfig:
    """Вибірки для колокації та граничних рядків"""

    interior: int = 1000
    boundary_per_edge: int = 200
    boundary_mode: str = 'uniform_grid'


@dataclass
class Solution:
    """Коефіцієнти α, базис та діагностика розв'язання"""

    coefficients: np.ndarray
    basis: Union[NeuralBasis, PoUBasis]
    method: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    system: Optional[AssembledSystem] = None

    def __post_init__(self):
        if len(self.coefficients) != self.basis.size:
            raise SolverError(f"Довжина α {len(self.coefficients)} не збігається з розміром базису {self.basis.size}")

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """u(x) = Σ α_ν ζ_ν(x)"""
        return self.basis.eval(np.atleast_2d(points)) @ self.coefficients


def _lstsq(L: np.ndarray, r: np.ndarray, rcond: float) -> Tuple[np.ndarray, float, int]:
    if L.shape[0] < 1:
        raise SolverError("Система без жодного рядка")
    if not (np.all(np.isfinite(L)) and np.all(np.isfinite(r))):
        raise SolverError("Система містить нескінченні або NaN значення")
    alpha, _, rank, _ = scipy.linalg.lstsq(L, r, cond=rcond, lapack_driver='gelsd', check_finite=False)
    return alpha, float(np.linalg.norm(L @ alpha - r)), int(rank)


def lstsq(L: np.ndarray, r: np.ndarray, rcond: float = DEFAULT_RCOND) -> Tuple[np.ndarray, float]:
    """
    Розв'язок найменших квадратів з мінімальною нормою через SVD

    Args:
        L: Матриця системи
        r: Права частина
        rcond: Сингулярні числа, менші за rcond·σ_max, вважаються нульовими

    Returns:
        (alpha, residual_norm)
    """
    alpha, residual, _ = _lstsq(L, r, rcond)
    return alpha, residual


def _finish(system: AssembledSystem, basis, method: str, started: float, rcond: float,
            alpha: Optional[np.ndarray] = None, rank: Optional[int] = None) -> Solution:
    if alpha is None:
        alpha, residual, rank = _lstsq(system.matrix, system.rhs, rcond)
    else:
        residual = float(np.linalg.norm(system.matrix @ alpha - system.rhs))
    if rank is not None and rank < basis.size / 2:
        logger.warning(f"{method}: ранг {rank} менший за половину кількості стовпців {basis.size}")
    blocks = {name: float(np.linalg.norm(system.block_residual(name, alpha))) for name in system.blocks}
    for name in ('interface_value', 'interface_flux'):
        if name in system.blocks:
            blocks[f'{name}_max'] = float(np.max(np.abs(system.block_residual(name, alpha)), initial=0.0))
    elapsed = time.perf_counter() - started
    diagnostics = {
        'residual_norm': residual,
        'block_residuals': blocks,
        'rank': rank,
        'shape': list(system.shape),
        'beta_tilde': system.beta_tilde,
        'solve_time': elapsed,
    }
    logger.info(f"{method}: система {system.shape}, нев'язка {residual:.3e}, ранг {rank}, {elapsed:.2f} с")
    return Solution(alpha, basis, method, diagnostics, system)


def _basis_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    return stage_seed(seed, 'basis').spawn(count)


def _boundary_samples(problem: ProblemSpec, sample_cfg: SampleConfig, seed: int):
    return sample_boundary(problem.domain, sample_cfg.boundary_per_edge, sample_cfg.boundary_mode,
                           rng=stage_rng(seed, 'boundary'))


def _apply_constraint(problem: ProblemSpec, basis: NeuralBasis) -> NeuralBasis:
    if problem.constraint == 'hard':
        return basis.with_bubble(problem.domain.bounding_box)
    return basis


def _weak_system(problem: ProblemSpec, basis, test_cfg: TestConfig, quad_cfg: QuadratureConfig,
                 beta: float, sample_cfg: SampleConfig, seed: int,
                 layout: Optional[PartitionLayout] = None, lam: float = 1.0,
                 interface_samples: int = 200) -> AssembledSystem:
    tests = build_test_set(problem.domain, test_cfg.N, test_cfg.sigma, test_cfg.n_l, rng=stage_rng(seed, 'tests'))
    A, f = assemble_weak(basis, tests, problem, quad_cfg, rng=stage_rng(seed, 'quadrature'))
    blocks = [('weak', A, f, 1.0)]
    beta_tilde = 0.0
    if problem.constraint == 'soft':
        samples = _boundary_samples(problem, sample_cfg, seed)
        B, g = assemble_boundary(basis, samples, problem)
        beta_tilde = weak_beta_tilde(beta, problem.domain.perimeter, len(samples))
        blocks.append(('boundary', B, g, beta_tilde))
    blocks.extend(_interface_blocks(layout, basis, lam, interface_samples))
    return stack_blocks(blocks, beta_tilde=beta_tilde, interface_weight=lam if layout is not None else 0.0)


def _interface_blocks(layout: Optional[PartitionLayout], basis, lam: float, interface_samples: int):
    if layout is None or not layout.interfaces:
        return []
    matrices = assemble_interface(layout, basis, interface_samples)
    zeros = np.zeros(matrices.value.shape[0])
    return [('interface_value', matrices.value, zeros, lam), ('interface_flux', matrices.flux, zeros.copy(), lam)]


def solve_wtn(problem: ProblemSpec, basis_cfg: BasisConfig, test_cfg: TestConfig,
              quad_cfg: QuadratureConfig = QuadratureConfig(), beta: Optional[float] = None,
              sample_cfg: SampleConfig = SampleConfig(), seed: int = 0,
              rcond: float = DEFAULT_RCOND) -> Solution:
    """
    Слабкий TransNet: базис, тестові функції, збирання (A, f) і (B, g), МНК

    Args:
        problem: Задача
        basis_cfg: Параметри базису
        test_cfg: Параметри тестових функцій
        quad_cfg: Квадратури
        beta: Вага межі (за замовчуванням з задачі)
        sample_cfg: Граничні вибірки
        seed: Головне зерно
        rcond: Поріг сингулярних чисел

    Returns:
        Solution з міткою 'WTN'
    """
    started = time.perf_counter()
    beta = problem.beta if beta is None else beta
    basis = _apply_constraint(problem, basis_cfg.build(problem.domain, _basis_seeds(seed, 1)[0]))
    system = _weak_system(problem, basis, test_cfg, quad_cfg, beta, sample_cfg, seed)
    return _finish(system, basis, 'WTN', started, rcond)


def build_fourier(basis_cfg: BasisConfig, fourier_cfg: FourierConfig, seed: int) -> NeuralBasis:
    fmap = FourierMap.build(fourier_cfg.P, 2, fourier_cfg.sigmas, fourier_cfg.margin,
                            seed=stage_seed(seed, 'fourier'))
    return build_fourier_basis(basis_cfg.M, fmap, basis_cfg.gamma, seed=_basis_seeds(seed, 1)[0])


def solve_fwtn(problem: ProblemSpec, fourier_cfg: FourierConfig, basis_cfg: BasisConfig, test_cfg: TestConfig,
               quad_cfg: QuadratureConfig = QuadratureConfig(), beta: Optional[float] = None,
               sample_cfg: SampleConfig = SampleConfig(), seed: int = 0,
               rcond: float = DEFAULT_RCOND) -> Solution:
    """Слабкий TransNet з Фур'є-піднятим базисом"""
    started = time.perf_counter()
    beta = problem.beta if beta is None else beta
    basis = _apply_constraint(problem, build_fourier(basis_cfg, fourier_cfg, seed))
    system = _weak_system(problem, basis, test_cfg, quad_cfg, beta, sample_cfg, seed)
    return _finish(system, basis, 'FWTN', started, rcond)


def build_layout_basis(layout: PartitionLayout, basis_cfgs: Union[BasisConfig, Sequence[BasisConfig]],
                       seed: int, problem: Optional[ProblemSpec] = None) -> PoUBasis:
    """
    Локальні базиси в кулях, що описують кожну підобласть

    При жорсткому обмеженні задачі problem кожен локальний базис множиться на
    бульбашку Ω, тож уся сума Σχ_i u_i зникає на межі.
    """
    if isinstance(basis_cfgs, BasisConfig):
        basis_cfgs = [basis_cfgs] * layout.n_subdomains
    if len(basis_cfgs) != layout.n_subdomains:
        raise SolverError(f"Підобластей {layout.n_subdomains}, а конфігурацій базису {len(basis_cfgs)}")
    seeds = _basis_seeds(seed, layout.n_subdomains)
    bases = [cfg.build(sub, s) for cfg, sub, s in zip(basis_cfgs, layout.subdomains, seeds)]
    if problem is not None:
        bases = [_apply_constraint(problem, local) for local in bases]
    return build_pou_basis(layout, bases)


def solve_pou_wtn(problem: ProblemSpec, layout: PartitionLayout,
                  basis_cfgs: Union[BasisConfig, Sequence[BasisConfig]], test_cfg: TestConfig,
                  quad_cfg: QuadratureConfig = QuadratureConfig(), beta: Optional[float] = None,
                  lam: float = 1.0, sample_cfg: SampleConfig = SampleConfig(), seed: int = 0,
                  interface_samples: int = 200, rcond: float = DEFAULT_RCOND) -> Solution:
    """
    PoU-WTN: глобальна A з локальних блоків підобластей, граничний блок та
    інтерфейсний блок ℳ з вагою λ
    """
    started = time.perf_counter()
    beta = problem.beta if beta is None else beta
    basis = build_layout_basis(layout, basis_cfgs, seed, problem)
    system = _weak_system(problem, basis, test_cfg, quad_cfg, beta, sample_cfg, seed,
                          layout=layout, lam=lam, interface_samples=interface_samples)
    return _finish(system, basis, 'POU_WTN', started, rcond)


def _sf_system(problem: ProblemSpec, basis, sample_cfg: SampleConfig, beta_sf: float, seed: int,
               layout: Optional[PartitionLayout] = None, lam: float = 1.0,
               interface_samples: int = 200) -> AssembledSystem:
    interior = sample_interior(problem.domain, sample_cfg.interior, stage_rng(seed, 'interior'))
    A, f = assemble_sf(basis, interior, problem)
    blocks = [('strong', A, f, 1.0)]
    beta_tilde = 0.0
    if problem.constraint == 'soft':
        samples = _boundary_samples(problem, sample_cfg, seed)
        B, g = assemble_boundary(basis, samples, problem)
        beta_tilde = sf_beta_tilde(beta_sf, problem.domain.perimeter, problem.domain.area,
                                   len(interior), len(samples))
        blocks.append(('boundary', B, g, beta_tilde))
    blocks.extend(_interface_blocks(layout, basis, lam, interface_samples))
    return stack_blocks(blocks, beta_tilde=beta_tilde, interface_weight=lam if layout is not None else 0.0)


def solve_sf(problem: ProblemSpec, basis_cfg: BasisConfig, sample_cfg: SampleConfig = SampleConfig(),
             beta_sf: float = 1.0, seed: int = 0, rcond: float = DEFAULT_RCOND) -> Solution:
    """Колокація сильної форми з випадковими внутрішніми точками"""
    started = time.perf_counter()
    basis = _apply_constraint(problem, basis_cfg.build(problem.domain, _basis_seeds(seed, 1)[0]))
    system = _sf_system(problem, basis, sample_cfg, beta_sf, seed)
    return _finish(system, basis, 'SF', started, rcond)


def solve_pou_sf(problem: ProblemSpec, layout: PartitionLayout,
                 basis_cfgs: Union[BasisConfig, Sequence[BasisConfig]], sample_cfg: SampleConfig = SampleConfig(),
                 beta_sf: float = 1.0, lam: float = 1.0, seed: int = 0, interface_samples: int = 200,
                 rcond: float = DEFAULT_RCOND) -> Solution:
    """Колокація сильної форми з локалізованими базисами та інтерфейсним блоком"""
    started = time.perf_counter()
    basis = build_layout_basis(layout, basis_cfgs, seed, problem)
    system = _sf_system(problem, basis, sample_cfg, beta_sf, seed, layout=layout, lam=lam,
                        interface_samples=interface_samples)
    return _finish(system, basis, 'POU_SF', started, rcond)


def _solve_ritz(system: AssembledSystem, ridge: float, rcond: float) -> Tuple[np.ndarray, Optional[int]]:
    if system.linear_term is None:
        alpha, _, rank = _lstsq(system.matrix, system.rhs, rcond)
        return alpha, rank
    L, r = system.matrix, system.rhs
    normal = L.T @ L + ridge * np.eye(L.shape[1])
    rhs = L.T @ r + 0.5 * system.linear_term
    try:
        alpha = scipy.linalg.solve(normal, rhs, assume_a='sym')
    except np.linalg.LinAlgError as e:
        raise SolverError(f"Вироджена нормальна матриця (εI з ε={ridge:.3e}): {e}") from e
    if not np.all(np.isfinite(alpha)):
        raise SolverError(f"Нормальна система не має скінченного розвʼязку (ε={ridge:.3e})")
    return alpha, None


def _ritz(problem: ProblemSpec, basis, method: str, sample_cfg: SampleConfig, beta_drm: float,
          epsilon: float, seed: int, rcond: float, started: float) -> Solution:
    interior = sample_interior(problem.domain, sample_cfg.interior, stage_rng(seed, 'interior'))
    samples = _boundary_samples(problem, sample_cfg, seed)
    system = assemble_drm(basis, interior, samples, problem, beta_drm)
    # ε задано для рядків без множника √(|Ω|/2N_Ω), тож у масштабованій системі він менший
    ridge = epsilon * problem.domain.area / (2.0 * len(interior))
    alpha, rank = _solve_ritz(system, ridge, rcond)
    solution = _finish(system, basis, method, started, rcond, alpha=alpha, rank=rank)
    if system.linear_term is not None:
        gradient = (2.0 * (system.matrix.T @ (system.matrix @ alpha - system.rhs)) + 2.0 * ridge * alpha
                    - system.linear_term)
        solution.diagnostics['stationarity'] = float(np.linalg.norm(gradient))
        solution.diagnostics['ridge'] = ridge
    return solution


def solve_drm(problem: ProblemSpec, basis_cfg: BasisConfig, sample_cfg: SampleConfig = SampleConfig(),
              beta_drm: float = 1.0, epsilon: float = 1e-5, seed: int = 0,
              rcond: float = DEFAULT_RCOND) -> Solution:
    """
    Метод Рітца

    При f ≡ 0 - звичайні найменші квадрати по [Φ_x; Φ_y; β̃B]; інакше
    α = (LᵀL + ε(|Ω|/2N_Ω)I)⁻¹(Lᵀr + (|Ω|/2N_Ω)Φᵀf); ε відповідає збуренню εI
    нормальної матриці з немасштабованими рядками [Φ_x; Φ_y; β̃B].
    """
    started = time.perf_counter()
    basis = basis_cfg.build(problem.domain, _basis_seeds(seed, 1)[0])
    return _ritz(problem, basis, 'DRM', sample_cfg, beta_drm, epsilon, seed, rcond, started)


def solve_fdrm(problem: ProblemSpec, fourier_cfg: FourierConfig, basis_cfg: BasisConfig,
               sample_cfg: SampleConfig = SampleConfig(), beta_drm: float = 1.0, epsilon: float = 1e-5,
               seed: int = 0, rcond: float = DEFAULT_RCOND) -> Solution:
    """Метод Рітца з Фур'є-піднятим базисом"""
    started = time.perf_counter()
    basis = build_fourier(basis_cfg, fourier_cfg, seed)
    return _ritz(problem, basis, 'FDRM', sample_cfg, beta_drm, epsilon, seed, rcond, started)


def search_beta(run: Callable[[float], Solution], score: Callable[[Solution], float],
                betas: Sequence[float] = BETA_GRID) -> Tuple[float, Dict[float, float]]:
    """
    Груба сітка пошуку ваги межі

    Args:
        run: Функція β -> Solution
        score: Оцінка розв'язку (менше - краще)
        betas: Кандидати

    Returns:
        (найкраще β, словник оцінок)
    """
    scores = {}
    for beta in betas:
        scores[float(beta)] = float(score(run(float(beta))))
        logger.debug(f"β={beta}: оцінка {scores[float(beta)]:.3e}")
    best = min(scores, key=scores.get)
    logger.info(f"Найкраще β = {best}")
    return best, scores
