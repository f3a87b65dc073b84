"""
Тести квадратур: точність формули Сімпсона, обрізані області, ребра, Монте-Карло
"""

import numpy as np
import pytest
from scipy.special import erf

from weak_transnet.geometry import Box, Domain, Edge
from weak_transnet.quadrature import (QuadratureConfig, clipped_rule, edge_integral, edge_rule, integrate_clipped,
                                      mc_integrate, simpson_box, simpson_rule, split_box, tensor_rule)
from weak_transnet.test_space import TestFunction, eval_test


def test_simpson_exact_for_cubics():
    nodes, weights = simpson_rule(-1.0, 2.0, 5)
    assert len(nodes) == 5
    assert weights.sum() == pytest.approx(3.0)
    assert weights @ nodes ** 3 == pytest.approx((2.0 ** 4 - 1.0) / 4.0)


def test_simpson_rejects_even_counts():
    with pytest.raises(ValueError):
        simpson_rule(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        QuadratureConfig(points_per_axis=32)
    with pytest.raises(ValueError):
        QuadratureConfig(mode='gauss')


def test_tensor_rule_integrates_polynomial():
    box = Box((0.0, 1.0), (2.0, 3.0))
    points, weights = tensor_rule(box, 3)
    assert points.shape == (9, 2)
    value = weights @ (points[:, 0] ** 2 * points[:, 1] ** 3)
    assert value == pytest.approx((8.0 / 3.0) * (81.0 - 1.0) / 4.0)


def test_simpson_fourth_order_convergence():
    box = Box((0.0, 0.0), (1.0, 1.0))
    f = lambda p: np.exp(p[:, 0]) * np.sin(p[:, 1])
    exact = (np.e - 1.0) * (1.0 - np.cos(1.0))
    errors = [abs(simpson_box(f, box, n) - exact) for n in (5, 9, 17)]
    rates = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
    assert all(rate == pytest.approx(4.0, abs=0.3) for rate in rates)


def test_gaussian_integral_matches_erf():
    psi = TestFunction((0.5, 0.5), (0.1, 0.1))
    box = Box((0.5, 0.5), (0.7, 0.7))
    value = simpson_box(lambda p: eval_test(psi, p), box, 65)
    one_axis = 0.5 * erf(0.2 / (0.1 * np.sqrt(2.0)))
    assert value == pytest.approx(one_axis ** 2, rel=1e-7)


def test_clipped_rule_lshape_area():
    lshape = Domain.lshape(Box((-1.0, -1.0), (1.0, 1.0)), Box((-1.0, -1.0), (0.0, 0.0)))
    box = Box((-0.5, -0.5), (0.5, 0.5))
    points, weights = clipped_rule(lshape, box, 9)
    assert weights.sum() == pytest.approx(0.75)
    assert np.all(lshape.contains(points))


def test_integrate_clipped_empty_intersection():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    assert integrate_clipped(lambda p: np.ones(len(p)), unit, Box((2.0, 2.0), (3.0, 3.0)), 5) == 0.0


def test_support_truncation_matches_full_domain():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    psi = TestFunction((0.4, 0.55), (0.03, 0.03), n_l=10)
    f = lambda p: (1.0 + p[:, 0] ** 2) * eval_test(psi, p)
    truncated = integrate_clipped(f, unit, psi.support_box, 129)
    full = integrate_clipped(f, unit, unit.bounding_box, 1025)
    assert truncated == pytest.approx(full, rel=1e-6)


def test_edge_integral_perimeter():
    lshape = Domain.lshape(Box((-1.0, -1.0), (1.0, 1.0)), Box((-1.0, -1.0), (0.0, 0.0)))
    assert edge_integral(lambda p: np.ones(len(p)), lshape, 5) == pytest.approx(8.0)
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    value = edge_integral(lambda p: p[:, 0] ** 2, unit, 3)
    assert value == pytest.approx(1.0 / 3.0 + 1.0 + 1.0 / 3.0 + 0.0)


def _step(points):
    return np.where(points[:, 0] <= 0.5, points[:, 0] ** 2, 1.0 + points[:, 1])


def test_split_box_cuts_only_interior_lines():
    pieces = split_box(Box((0.0, 0.0), (1.0, 1.0)), ((0, 0.5), (0, 1.0), (1, 0.25)))
    assert len(pieces) == 4
    assert sum(piece.area for piece in pieces) == pytest.approx(1.0)
    assert split_box(Box((0.6, 0.0), (0.9, 1.0)), ((0, 0.5),)) == [Box((0.6, 0.0), (0.9, 1.0))]


def test_clipped_rule_integrates_piecewise_polynomial_across_jump():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    box = Box((0.2, 0.0), (0.9, 1.0))
    exact = (0.5 ** 3 - 0.2 ** 3) / 3.0 + 0.4 * 1.5
    assert integrate_clipped(_step, unit, box, 5, breaks=((0, 0.5),)) == pytest.approx(exact, rel=1e-8)
    assert simpson_box(_step, box, 5, breaks=((0, 0.5),)) == pytest.approx(exact, rel=1e-8)
    assert abs(integrate_clipped(_step, unit, box, 5) - exact) > 1e-3


def test_nodes_on_jump_line_take_one_sided_values():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    right = lambda p: np.where(p[:, 0] <= 0.5, 0.0, 1.0)
    points, weights = clipped_rule(unit, unit.bounding_box, 5, breaks=((0, 0.5),))
    assert weights @ right(points) == pytest.approx(0.5, abs=1e-12)
    assert edge_integral(right, unit, 3, breaks=((0, 0.5),)) == pytest.approx(2.0, abs=1e-12)


def test_edge_rule_splits_reversed_edge():
    edge = Edge((1.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    points, weights = edge_rule(edge, 3, breaks=((0, 0.5),))
    assert len(points) == 6
    assert weights.sum() == pytest.approx(1.0)
    assert weights @ _step(points) == pytest.approx(0.5 ** 3 / 3.0 + 0.5 * 2.0, rel=1e-8)


def test_mc_uniform_on_box():
    box = Box((0.0, 0.0), (2.0, 1.0))
    value = mc_integrate(lambda p: p[:, 0], 'uniform_on_region', 20000, seed=0, region=box)
    assert value == pytest.approx(2.0, rel=0.02)


def test_mc_uniform_on_domain_is_seeded():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    a = mc_integrate(lambda p: p[:, 1], 'uniform_on_region', 500, seed=3, region=unit)
    b = mc_integrate(lambda p: p[:, 1], 'uniform_on_region', 500, seed=3, region=unit)
    assert a == b


def test_mc_gaussian_importance_full_mass():
    psi = TestFunction((0.5, 0.5), (0.05, 0.05))
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    value = mc_integrate(lambda p: np.ones(len(p)), 'gaussian_importance', 1000, seed=1, psi=psi, domain=unit)
    assert value == pytest.approx(1.0)


def test_mc_gaussian_importance_half_mass_on_edge():
    psi = TestFunction((0.0, 0.5), (0.05, 0.05))
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    value = mc_integrate(lambda p: np.ones(len(p)), 'gaussian_importance', 40000, seed=2, psi=psi, domain=unit)
    assert value == pytest.approx(0.5, abs=0.02)


def test_mc_validation():
    with pytest.raises(ValueError):
        mc_integrate(lambda p: p[:, 0], 'uniform_on_region', 0)
    with pytest.raises(ValueError):
        mc_integrate(lambda p: p[:, 0], 'gaussian_importance', 10)
    with pytest.raises(ValueError):
        mc_integrate(lambda p: p[:, 0], 'sobol', 10, region=Box((0.0, 0.0), (1.0, 1.0)))
