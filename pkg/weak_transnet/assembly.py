"""
Збирання лінійних блоків: слабка матриця жорсткості, права частина, граничний блок,
інтерфейсні блоки, блоки сильної форми та методу Рітца
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from weak_transnet.geometry import (BoundarySamples, Domain, Edge, InterfaceSamples, PartitionLayout,
                                    sample_boundary, sample_interface)
from weak_transnet.quadrature import QuadratureConfig, clipped_rule, edge_rule, gaussian_samples
from weak_transnet.test_space import TestFunction, eval_test, eval_test_grad
from weak_transnet.trial_basis import NeuralBasis, PoUBasis
from weak_transnet.utils import GeometryError

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray], np.ndarray]
VectorField = Callable[[np.ndarray], np.ndarray]
Basis = Union[NeuralBasis, PoUBasis]


@dataclass(frozen=True)
class ProblemSpec:
    """
    Крайова задача -∇·(κ∇u) = f в Ω, u = g на ∂Ω

    constraint: 'soft' - штраф β на граничних рядках, 'hard' - множник-бульбашка,
    що вимагає g ≡ 0.
    breaks: лінії x_axis = value, на яких κ, f або похідні розвʼязку мають розрив;
    квадратури Сімпсона розрізають по них області інтегрування.
    """

    domain: Domain
    kappa: ScalarField
    source: ScalarField
    boundary: ScalarField
    kappa_grad: Optional[VectorField] = None
    exact: Optional[ScalarField] = None
    constraint: str = 'soft'
    beta: float = 1.0
    kappa_constant: bool = False
    boundary_operator: str = 'dirichlet'
    breaks: Tuple[Tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.constraint not in ('soft', 'hard'):
            raise ValueError(f"Невідомий тип обмеження: {self.constraint}")
        if self.boundary_operator != 'dirichlet':
            raise ValueError("Підтримується лише умова Діріхле")
        if self.beta < 0.0:
            raise ValueError(f"β має бути невід'ємним, отримано {self.beta}")
        object.__setattr__(self, 'breaks', tuple((int(axis), float(value)) for axis, value in self.breaks))
        if any(axis not in (0, 1) for axis, _ in self.breaks):
            raise ValueError(f"Вісь лінії розриву має бути 0 або 1, отримано {self.breaks}")
        if self.constraint == 'hard':
            edge_points = sample_boundary(self.domain, 9).points
            if np.max(np.abs(self.boundary(edge_points))) > 1e-12:
                raise ValueError("Жорстке обмеження вимагає g ≡ 0 на межі")

    def kappa_gradient(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kappa_grad is not None:
            return np.asarray(self.kappa_grad(points), dtype=float)
        if self.kappa_constant:
            return np.zeros_like(points)
        raise ValueError("Для змінного κ потрібен аналітичний градієнт ∇κ")


@dataclass
class AssembledSystem:
    """Складена система L α ≈ r з діапазонами рядків кожного блоку"""

    matrix: np.ndarray
    rhs: np.ndarray
    blocks: Dict[str, Tuple[int, int]]
    beta_tilde: float = 0.0
    interface_weight: float = 0.0
    linear_term: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def rows(self, name: str) -> slice:
        start, stop = self.blocks[name]
        return slice(start, stop)

    def block_residual(self, name: str, alpha: np.ndarray) -> np.ndarray:
        rows = self.rows(name)
        return self.matrix[rows] @ alpha - self.rhs[rows]


def stack_blocks(blocks: Sequence[Tuple[str, np.ndarray, np.ndarray, float]], **kwargs) -> AssembledSystem:
    """Складання блоків (назва, матриця, права частина, вага) у одну систему"""
    matrices, rhs, ranges = [], [], {}
    start = 0
    for name, matrix, vector, weight in blocks:
        matrices.append(weight * matrix)
        rhs.append(weight * vector)
        ranges[name] = (start, start + matrix.shape[0])
        start += matrix.shape[0]
    return AssembledSystem(np.vstack(matrices), np.concatenate(rhs), ranges, **kwargs)


def weak_beta_tilde(beta: float, perimeter: float, n_boundary: int) -> float:
    """β̃ = √(β|∂Ω|/N_∂Ω)"""
    return math.sqrt(beta * perimeter / n_boundary)


def sf_beta_tilde(beta: float, perimeter: float, area: float, n_interior: int, n_boundary: int) -> float:
    """β̃ = √(β|∂Ω|N_Ω/(|Ω|N_∂Ω))"""
    return math.sqrt(beta * perimeter * n_interior / (area * n_boundary))


def drm_beta_tilde(beta: float, perimeter: float, area: float, n_interior: int, n_boundary: int) -> float:
    """β̃ = √(2βN_Ω|∂Ω|/(N_∂Ω|Ω|)), відношення ваги граничних рядків до ваги рядків градієнта"""
    return math.sqrt(2.0 * beta * n_interior * perimeter / (n_boundary * area))


def _weak_pieces(basis: Basis, problem: ProblemSpec):
    """Пари (підобласть, локальний базис, стовпці, ребра ∂Ω підобласті)"""
    if isinstance(basis, PoUBasis):
        layout = basis.layout
        for idx, local in enumerate(basis.bases):
            yield layout.subdomains[idx], local, basis.block(idx), layout.outer_edges(idx)
    else:
        yield problem.domain, basis, slice(0, basis.size), problem.domain.edges


def assemble_weak(basis: Basis, tests: Sequence[TestFunction], problem: ProblemSpec,
                  quad_cfg: QuadratureConfig, rng: Optional[np.random.Generator] = None,
                  include_boundary_term: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Слабка матриця A та права частина f

    A_ij = ∫ κ∇φ_j·∇ψ_i dx - ∫_∂Ω κψ_i ∂φ_j/∂n ds, f_i = ∫ fψ_i dx, де інтеграли
    по області беруться лише по носію ψ_i, обрізаному областю (або підобластю).

    Args:
        basis: NeuralBasis або PoUBasis
        tests: Тестові функції
        problem: Задача
        quad_cfg: Налаштування квадратур
        rng: Генератор для режиму Монте-Карло
        include_boundary_term: Чи враховувати граничний член білінійної форми

    Returns:
        (A, f) розмірів (N, M+1) та (N,)
    """
    n_tests = len(tests)
    A = np.zeros((n_tests, basis.size))
    f = np.zeros(n_tests)
    if quad_cfg.mode == 'mc' and rng is None:
        rng = np.random.default_rng(quad_cfg.seed)
    for region, local, columns, edges in _weak_pieces(basis, problem):
        for i, psi in enumerate(tests):
            if len(psi.mean) != 2:
                raise GeometryError("Розмірність тестової функції не збігається з областю")
            if quad_cfg.mode == 'simpson':
                row, rhs = _weak_row_simpson(local, psi, region, problem, quad_cfg.points_per_axis)
            else:
                row, rhs = _weak_row_mc(local, psi, region, problem, quad_cfg.mc_samples, rng)
            if include_boundary_term:
                row = row - _boundary_term(local, psi, edges, problem, quad_cfg.boundary_points_per_edge)
            A[i, columns] += row
            f[i] += rhs
    logger.debug(f"Слабка система: {A.shape}, режим {quad_cfg.mode}")
    return A, f


def _weak_row_simpson(local: NeuralBasis, psi: TestFunction, region: Domain, problem: ProblemSpec, n: int):
    points, weights = clipped_rule(region, psi.support_box, n, problem.breaks)
    if len(weights) == 0:
        return np.zeros(local.size), 0.0
    kappa = np.asarray(problem.kappa(points), dtype=float)
    dpsi = eval_test_grad(psi, points)
    grads = local.eval_grad(points)
    row = sum((weights * kappa * dpsi[k]) @ grads[k] for k in range(len(grads)))
    rhs = float((weights * eval_test(psi, points)) @ np.asarray(problem.source(points), dtype=float))
    return row, rhs


def _weak_row_mc(local: NeuralBasis, psi: TestFunction, region: Domain, problem: ProblemSpec, n: int,
                 rng: np.random.Generator):
    # x ~ ψ, тож ∫ κ∇φ·∇ψ = E[κ∇φ·(-(x-μ)/σ²)], ∫ fψ = E[f]
    points = gaussian_samples(psi, n, rng)
    inside = region.contains(points).astype(float)
    kappa = np.asarray(problem.kappa(points), dtype=float) * inside / n
    grads = local.eval_grad(points)
    row = sum((kappa * (-(points[:, k] - psi.mean[k]) / psi.sigma[k] ** 2)) @ grads[k]
              for k in range(len(grads)))
    rhs = float(inside @ np.asarray(problem.source(points), dtype=float) / n)
    return row, rhs


def _boundary_term(local: NeuralBasis, psi: TestFunction, edges: Sequence[Edge], problem: ProblemSpec,
                   n: int) -> np.ndarray:
    """∫ κψ ∂φ/∂n по ребрах межі всередині носія ψ"""
    term = np.zeros(local.size)
    box = psi.support_box
    for edge in edges:
        piece = edge.clip(box)
        if piece is None:
            continue
        points, weights = edge_rule(piece, n, problem.breaks)
        grads = local.eval_grad(points)
        dn = sum(piece.normal[k] * grads[k] for k in range(len(grads)))
        kappa = np.asarray(problem.kappa(points), dtype=float)
        term += (weights * kappa * eval_test(psi, points)) @ dn
    return term


def assemble_boundary(basis: Basis, samples: BoundarySamples, problem: ProblemSpec) -> Tuple[np.ndarray, np.ndarray]:
    """B_mj = φ_j(x^(m)), g_m = g(x^(m)); вагу β̃ додає викликач"""
    if problem.constraint == 'hard':
        raise ValueError("Граничні рядки не збираються при жорсткому обмеженні")
    B = basis.eval(samples.points)
    g = np.asarray(problem.boundary(samples.points), dtype=float)
    return B, g


@dataclass(frozen=True)
class InterfaceMatrices:
    """Рядки неперервності розв'язку ℳ⁰ та потоку ℳ¹"""

    value: np.ndarray
    flux: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack([self.value, self.flux])


def assemble_interface(layout: PartitionLayout, pou_basis: PoUBasis,
                       interface_samples: Union[int, Sequence[InterfaceSamples]]) -> InterfaceMatrices:
    """
    Масковані матриці умов на інтерфейсах

    Рядки ℳ⁰ дають u^(ℓ) - u^(q), рядки ℳ¹ дають κ^(ℓ)∂u^(ℓ)/∂n - κ^(q)∂u^(q)/∂n
    у точках інтерфейсу. Використовуються локальні базиси без множника χ.

    Args:
        layout: Розбиття
        pou_basis: Глобальний базис розбиття
        interface_samples: Кількість точок на кожному інтерфейсі або готові вибірки

    Returns:
        InterfaceMatrices, по N_Γ рядків кожного типу на інтерфейс
    """
    if isinstance(interface_samples, int):
        interface_samples = [sample_interface(layout, idx, interface_samples)
                             for idx in range(len(layout.interfaces))]
    value_rows, flux_rows = [], []
    for samples in interface_samples:
        iface = layout.interfaces[samples.interface_idx]
        if not np.all(iface.contains(samples.points)):
            raise GeometryError(f"Точки вибірки не лежать на інтерфейсі {samples.interface_idx}")
        n = len(samples.points)
        value = np.zeros((n, pou_basis.size))
        flux = np.zeros((n, pou_basis.size))
        normal = np.asarray(iface.normal, dtype=float)
        for idx, sign, kappa in ((iface.left, 1.0, iface.kappa_left), (iface.right, -1.0, iface.kappa_right)):
            local = pou_basis.bases[idx]
            cols = pou_basis.block(idx)
            value[:, cols] = sign * local.eval(samples.points)
            grads = local.eval_grad(samples.points)
            flux[:, cols] = sign * kappa * sum(normal[k] * grads[k] for k in range(len(grads)))
        value_rows.append(value)
        flux_rows.append(flux)
    if not value_rows:
        empty = np.zeros((0, pou_basis.size))
        return InterfaceMatrices(empty, empty.copy())
    return InterfaceMatrices(np.vstack(value_rows), np.vstack(flux_rows))


def assemble_sf(basis: Basis, interior_points: np.ndarray, problem: ProblemSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(A_SF)_mj = -κΔφ_j - ∇κ·∇φ_j у точках колокації, f_SF = f(x^(m))"""
    points = np.atleast_2d(interior_points)
    kappa_grad = problem.kappa_gradient(points)
    kappa = np.asarray(problem.kappa(points), dtype=float)
    grads = basis.eval_grad(points)
    A = -kappa[:, None] * basis.eval_laplacian(points)
    A -= sum(kappa_grad[:, [k]] * grads[k] for k in range(len(grads)))
    return A, np.asarray(problem.source(points), dtype=float)


def assemble_drm(basis: Basis, interior_points: np.ndarray, boundary_samples: BoundarySamples,
                 problem: ProblemSpec, beta_drm: float) -> AssembledSystem:
    """
    Блоки методу Рітца

    Рядки √(|Ω|/2N_Ω)·√κ·Φ_{x_k} та √(β|∂Ω|/N_∂Ω)·B; лінійний член (|Ω|/N_Ω)Φᵀf
    повертається лише для ненульового джерела.
    """
    points = np.atleast_2d(interior_points)
    kappa = np.asarray(problem.kappa(points), dtype=float)
    if np.any(kappa < 0.0):
        raise ValueError("κ має бути невід'ємним у точках вибірки")
    domain = problem.domain
    n_interior, n_boundary = len(points), len(boundary_samples)
    scale = math.sqrt(domain.area / (2.0 * n_interior))
    root = np.sqrt(kappa)[:, None]
    blocks = [(f'gradient_{k}', root * grad, np.zeros(n_interior), scale)
              for k, grad in enumerate(basis.eval_grad(points))]
    B, g = assemble_boundary(basis, boundary_samples, problem)
    blocks.append(('boundary', B, g, math.sqrt(beta_drm * domain.perimeter / n_boundary)))
    source = np.asarray(problem.source(points), dtype=float)
    linear = None
    if np.any(source != 0.0):
        linear = (domain.area / n_interior) * (basis.eval(points).T @ source)
    beta_tilde = drm_beta_tilde(beta_drm, domain.perimeter, domain.area, n_interior, n_boundary)
    return stack_blocks(blocks, beta_tilde=beta_tilde, linear_term=linear)
