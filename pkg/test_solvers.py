"""
Тести розв'язувачів: МНК з мінімальною нормою, конвеєри WTN/F-WTN/PoU-WTN/SF/DRM,
відтворюваність і діагностика
"""

import numpy as np
import pytest

from weak_transnet import problems
from weak_transnet.assembly import ProblemSpec
from weak_transnet.evaluation import relative_l2
from weak_transnet.geometry import Domain, PartitionLayout
from weak_transnet.quadrature import QuadratureConfig
from weak_transnet.solvers import (SampleConfig, Solution, TestConfig, lstsq, search_beta, solve_drm, solve_fdrm,
                                   solve_fwtn, solve_pou_sf, solve_pou_wtn, solve_sf, solve_wtn)
from weak_transnet.trial_basis import BasisConfig, FourierConfig, build_transnet
from weak_transnet.utils import SolverError

SMALL_SAMPLES = SampleConfig(interior=400, boundary_per_edge=40)


def _check_points(domain, n=400, seed=0):
    rng = np.random.default_rng(seed)
    box = domain.bounding_box
    points = rng.uniform(box.lo, box.hi, (4 * n, 2))
    return points[domain.contains(points)][:n]


def test_lstsq_minimum_norm():
    alpha, residual = lstsq(np.array([[1.0, 1.0]]), np.array([2.0]))
    assert np.allclose(alpha, [1.0, 1.0])
    assert residual == pytest.approx(0.0, abs=1e-12)


def test_lstsq_matches_pseudo_inverse_on_rank_deficient():
    rng = np.random.default_rng(0)
    L = rng.standard_normal((30, 4)) @ rng.standard_normal((4, 8))
    r = rng.standard_normal(30)
    alpha, residual = lstsq(L, r)
    expected = np.linalg.pinv(L) @ r
    assert np.allclose(alpha, expected, atol=1e-8)
    assert residual == pytest.approx(np.linalg.norm(L @ expected - r), rel=1e-8)


def test_lstsq_rejects_bad_systems():
    with pytest.raises(SolverError):
        lstsq(np.array([[1.0, np.nan]]), np.array([1.0]))
    with pytest.raises(SolverError):
        lstsq(np.zeros((0, 3)), np.zeros(0))


def test_solution_size_mismatch():
    basis = build_transnet(5, 2, 1.0, (0.0, 0.0), 1.0, seed=0)
    with pytest.raises(SolverError):
        Solution(np.zeros(5), basis, 'WTN')


def test_zero_problem_gives_zero_coefficients():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    zero = lambda p: np.zeros(len(p))
    problem = ProblemSpec(unit, lambda p: np.ones(len(p)), zero, zero, kappa_constant=True)
    solution = solve_wtn(problem, BasisConfig(30), TestConfig(40), sample_cfg=SMALL_SAMPLES)
    assert np.allclose(solution.coefficients, 0.0)


def test_wtn_darcy_weak_only_converges():
    entry = problems.get('darcy_weak_only')
    solution = solve_wtn(entry.problem, BasisConfig(150, 1.0), TestConfig(250), sample_cfg=SMALL_SAMPLES, seed=1)
    points = _check_points(entry.problem.domain)
    assert relative_l2(solution.evaluate(points), problems.eval_exact(entry, points)) < 5e-2
    diagnostics = solution.diagnostics
    assert set(diagnostics['block_residuals']) == {'weak', 'boundary'}
    assert diagnostics['shape'] == [250 + 160, 151]
    assert diagnostics['beta_tilde'] == pytest.approx(np.sqrt(4.0 / 160))


def test_wtn_hard_constraint_vanishes_on_boundary():
    entry = problems.get('poisson_smooth')
    solution = solve_wtn(entry.problem, BasisConfig(80), TestConfig(150, (0.03, 0.03)), seed=0)
    assert set(solution.system.blocks) == {'weak'}
    assert solution.diagnostics['beta_tilde'] == 0.0
    edge = np.array([[0.0, 0.3], [1.0, 0.7], [0.4, 1.0]])
    assert np.max(np.abs(solution.evaluate(edge))) < 1e-12
    points = _check_points(entry.problem.domain)
    assert relative_l2(solution.evaluate(points), problems.eval_exact(entry, points)) < 5e-2


def test_wtn_is_deterministic_per_seed():
    entry = problems.get('darcy_weak_only')
    run = lambda seed: solve_wtn(entry.problem, BasisConfig(40), TestConfig(60),
                                 QuadratureConfig(points_per_axis=17), sample_cfg=SMALL_SAMPLES, seed=seed)
    a, b, c = run(5), run(5), run(6)
    assert np.array_equal(a.coefficients, b.coefficients)
    assert not np.array_equal(a.coefficients, c.coefficients)


def test_single_subdomain_pou_equals_wtn():
    entry = problems.get('darcy_weak_only')
    domain = entry.problem.domain
    kwargs = dict(quad_cfg=QuadratureConfig(points_per_axis=17), sample_cfg=SMALL_SAMPLES, seed=2)
    wtn = solve_wtn(entry.problem, BasisConfig(40), TestConfig(60), **kwargs)
    pou = solve_pou_wtn(entry.problem, PartitionLayout.single(domain, 40), BasisConfig(40), TestConfig(60), **kwargs)
    assert np.array_equal(wtn.system.matrix, pou.system.matrix)
    assert np.array_equal(wtn.coefficients, pou.coefficients)
    assert pou.method == 'POU_WTN'


def test_pou_wtn_reports_interface_residuals():
    entry = problems.get('darcy_channel')
    layout = entry.layout('strips')
    solution = solve_pou_wtn(entry.problem, layout, BasisConfig(30), TestConfig(80),
                             sample_cfg=SMALL_SAMPLES, interface_samples=20)
    blocks = solution.diagnostics['block_residuals']
    assert {'weak', 'boundary', 'interface_value', 'interface_flux'} <= set(blocks)
    assert blocks['interface_value_max'] >= 0.0
    assert solution.basis.size == 3 * 31
    assert solution.system.rows('interface_value').stop - solution.system.rows('interface_value').start == 40


def test_pou_wtn_rejects_wrong_config_count():
    entry = problems.get('darcy_channel')
    with pytest.raises(SolverError):
        solve_pou_wtn(entry.problem, entry.layout('strips'), [BasisConfig(10)] * 2, TestConfig(10))


def test_pou_hard_constraint_applies_bubble_per_block():
    entry = problems.get('poisson_smooth')
    domain = entry.problem.domain
    layout = PartitionLayout.build(domain, [Domain.rectangle((0.0, 0.0), (0.5, 1.0)),
                                           Domain.rectangle((0.5, 0.0), (1.0, 1.0))], (30, 30))
    edge = np.array([[0.0, 0.3], [1.0, 0.7], [0.25, 1.0], [0.5, 0.0], [0.8, 0.0]])
    wtn = solve_pou_wtn(entry.problem, layout, BasisConfig(30), TestConfig(80, (0.03, 0.03)),
                        sample_cfg=SMALL_SAMPLES, interface_samples=20)
    sf = solve_pou_sf(entry.problem, layout, BasisConfig(30), SMALL_SAMPLES, interface_samples=20)
    for solution in (wtn, sf):
        assert all(local.constraint == 'bubble_h' for local in solution.basis.bases)
        assert 'boundary' not in solution.system.blocks
        assert np.max(np.abs(solution.evaluate(edge))) < 1e-12


def test_sharp_gradient_quadrants_beat_single_domain():
    entry = problems.get('poisson_sharp')
    kwargs = dict(sample_cfg=SampleConfig(interior=400, boundary_per_edge=100), seed=0)
    wtn = solve_wtn(entry.problem, BasisConfig(400, 5.0), TestConfig(1000), **kwargs)
    pou = solve_pou_wtn(entry.problem, entry.layout('quadrants'), entry.layouts['quadrants'].basis_configs(M=100),
                        TestConfig(1000), interface_samples=50, **kwargs)
    points = _check_points(entry.problem.domain)
    exact = problems.eval_exact(entry, points)
    assert relative_l2(pou.evaluate(points), exact) < relative_l2(wtn.evaluate(points), exact)


def test_lshape_corner_refinement_lowers_error():
    entry = problems.get('lshape_singular')
    points = _check_points(entry.problem.domain)
    exact = problems.eval_exact(entry, points)

    def median_error(name, M):
        spec = entry.layouts[name]
        errors = []
        for seed in (0, 1, 2):
            solution = solve_pou_wtn(entry.problem, entry.layout(name), spec.basis_configs(M=M), TestConfig(900),
                                     sample_cfg=SampleConfig(interior=400, boundary_per_edge=100), seed=seed,
                                     interface_samples=50)
            errors.append(relative_l2(solution.evaluate(points), exact))
        return float(np.median(errors))

    # однаковий сумарний розмір базису: 3 x 100 та 6 x 50
    three, six, six_mixed = median_error('three', 100), median_error('six', 50), median_error('six_mixed', 50)
    assert three > six > six_mixed


def test_fwtn_lifts_basis():
    entry = problems.get('darcy_weak_only')
    solution = solve_fwtn(entry.problem, FourierConfig(P=8), BasisConfig(50), TestConfig(80),
                          sample_cfg=SMALL_SAMPLES)
    assert solution.method == 'FWTN'
    assert solution.basis.center.shape == (16,)
    assert np.isfinite(solution.diagnostics['residual_norm'])


def test_sf_smooth_problem():
    entry = problems.get('poisson_smooth')
    solution = solve_sf(entry.problem, BasisConfig(80), SampleConfig(interior=600), seed=0)
    assert set(solution.system.blocks) == {'strong'}
    points = _check_points(entry.problem.domain)
    assert relative_l2(solution.evaluate(points), problems.eval_exact(entry, points)) < 5e-2


def test_sf_soft_constraint_weight():
    entry = problems.get('darcy_weak_only')
    solution = solve_sf(entry.problem, BasisConfig(30), SMALL_SAMPLES, beta_sf=1.0)
    assert solution.diagnostics['beta_tilde'] == pytest.approx(np.sqrt(4.0 * 400 / 160))


def test_pou_sf_runs_on_quadrants():
    entry = problems.get('poisson_sharp')
    solution = solve_pou_sf(entry.problem, entry.layout('quadrants'), BasisConfig(20, 5.0), SMALL_SAMPLES,
                            interface_samples=10)
    assert solution.method == 'POU_SF'
    assert solution.system.rows('interface_flux').stop == solution.system.shape[0]


def test_drm_stationarity():
    entry = problems.get('darcy_weak_only')
    solution = solve_drm(entry.problem, BasisConfig(40), SMALL_SAMPLES, epsilon=1e-5)
    system = solution.system
    L = system.matrix
    scale = 2.0 * np.linalg.norm(L.T @ L, 2) * np.linalg.norm(solution.coefficients) + np.linalg.norm(
        system.linear_term)
    assert solution.diagnostics['stationarity'] <= 1e-8 * scale
    assert solution.diagnostics['ridge'] == pytest.approx(1e-5 / (2.0 * SMALL_SAMPLES.interior))
    assert solution.diagnostics['rank'] is None


def test_drm_without_source_uses_least_squares():
    entry = problems.get('lshape_singular')
    solution = solve_drm(entry.problem, BasisConfig(40), SampleConfig(interior=500, boundary_per_edge=20))
    assert 'stationarity' not in solution.diagnostics
    assert solution.system.linear_term is None
    assert solution.diagnostics['rank'] > 0


def test_fdrm_basis_has_no_bubble():
    entry = problems.get('darcy_weak_only')
    solution = solve_fdrm(entry.problem, FourierConfig(P=8), BasisConfig(20), SMALL_SAMPLES)
    assert solution.basis.constraint == 'none'
    assert solution.method == 'FDRM'


def test_search_beta_picks_minimum():
    best, scores = search_beta(lambda beta: beta, lambda value: (value - 10.0) ** 2)
    assert best == 10.0
    assert list(scores) == [0.1, 1.0, 10.0, 100.0]


def test_lstsq_is_locally_optimal():
    rng = np.random.default_rng(1)
    L = rng.standard_normal((40, 10))
    r = rng.standard_normal(40)
    alpha, residual = lstsq(L, r)
    for _ in range(20):
        perturbed = alpha + 1e-3 * rng.standard_normal(10)
        assert np.linalg.norm(L @ perturbed - r) >= residual
