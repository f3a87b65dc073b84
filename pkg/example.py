#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Приклад використання Weak TransNet
Демонстрація основних можливостей бібліотеки
"""

import sys
import os

import numpy as np

# Додавання шляху до модуля
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from weak_transnet import problems
from weak_transnet.evaluation import GridSpec, evaluate_on_grid, field_on_grid, relative_l2
from weak_transnet.geometry import Domain, PartitionLayout
from weak_transnet.quadrature import QuadratureConfig
from weak_transnet.solvers import SampleConfig, TestConfig, solve_drm, solve_pou_wtn, solve_sf, solve_wtn
from weak_transnet.trial_basis import BasisConfig
from weak_transnet.utils import setup_logging


def _error(solution, entry) -> float:
    grid = GridSpec.for_domain(entry.problem.domain, 65)
    u_hat = evaluate_on_grid(solution, grid, entry.problem.domain)
    reference = field_on_grid(entry.problem.exact, grid, entry.problem.domain)
    return relative_l2(u_hat.values, reference.values)


def example_darcy():
    """Приклад: задача Darcy з розривним джерелом, WTN проти SF та DRM"""
    print("🔍 Приклад: Darcy з розривним джерелом")
    print("=" * 50)

    entry = problems.get('darcy_weak_only')
    basis_cfg = BasisConfig(M=100, gamma=1.0)
    sample_cfg = SampleConfig(interior=1000, boundary_per_edge=100)

    wtn = solve_wtn(entry.problem, basis_cfg, TestConfig(N=100), QuadratureConfig(points_per_axis=17),
                    sample_cfg=sample_cfg, seed=0)
    sf = solve_sf(entry.problem, basis_cfg, sample_cfg, seed=0)
    drm = solve_drm(entry.problem, basis_cfg, sample_cfg, seed=0)

    print("\n📊 ВІДНОСНІ ПОХИБКИ:")
    print("-" * 30)
    for solution in (wtn, sf, drm):
        print(f"  {solution.method:<4} {_error(solution, entry):.3e}   ранг {solution.diagnostics['rank']}")


def example_partition():
    """Приклад: розбиття одиниці на двох смугах"""
    print("\n🧩 Приклад: розбиття на дві підобласті")
    print("=" * 50)

    entry = problems.get('poisson_smooth')
    domain = entry.problem.domain
    layout = PartitionLayout.build(domain, [Domain.rectangle((0.0, 0.0), (0.5, 1.0)),
                                            Domain.rectangle((0.5, 0.0), (1.0, 1.0))], [80, 80])
    print(f"✅ Підобластей: {layout.n_subdomains}, інтерфейсів: {len(layout.interfaces)}")

    solution = solve_pou_wtn(entry.problem, layout, BasisConfig(M=80, gamma=1.0), TestConfig(N=150, sigma=(0.05, 0.05)),
                             QuadratureConfig(points_per_axis=17), seed=1)
    blocks = solution.diagnostics['block_residuals']
    print(f"📈 Похибка: {_error(solution, entry):.3e}")
    print(f"🔗 Стрибок значення на інтерфейсі: {blocks.get('interface_value_max', 0.0):.3e}")


def example_catalog():
    """Перелік задач каталогу"""
    print("\n📋 Каталог задач")
    print("=" * 50)
    for entry in problems.catalog():
        marker = '📐' if entry.reference == 'exact' else '🗂️ '
        print(f"{marker} {entry.id:<18} {entry.description}")
    points = np.array([[0.25, 0.25], [0.5, 0.5]])
    print(f"\nκ у двох точках багатомасштабної задачі: {problems.eval_kappa(problems.get('darcy_multiscale'), points)}")


def main():
    """Головна функція з прикладами"""
    print("🚀 ПРИКЛАДИ ВИКОРИСТАННЯ")
    print("🧮 Weak TransNet")
    print("=" * 60)

    setup_logging()

    example_catalog()
    example_darcy()

    print("\n" + "=" * 60)
    response = input("🤔 Виконати приклад з розбиттям одиниці (довше)? (y/n): ")
    if response.lower() == 'y':
        example_partition()

    print("\n🎉 Приклади завершено!")
    print("💡 Для запуску експериментів: python main.py run experiments/table2.ini")


if __name__ == "__main__":
    main()
