"""
Тести нейронних базисів: похідні проти скінченних різниць, Фур'є-підйом,
бульбашка жорсткого обмеження, змішані γ та локалізований базис
"""

import numpy as np
import pytest

from weak_transnet.geometry import Box, Domain, PartitionLayout, sample_boundary
from weak_transnet.trial_basis import (BasisConfig, FourierMap, build_fourier_basis, build_pou_basis,
                                       build_transnet, empirical_gamma, mixed_gammas, resolve_gammas)
from weak_transnet.utils import GeometryError


def _fd_gradient(basis, points, h=1e-6):
    grads = []
    for k in range(points.shape[1]):
        shift = np.zeros(points.shape[1])
        shift[k] = h
        grads.append((basis.eval(points + shift) - basis.eval(points - shift)) / (2.0 * h))
    return grads


def _fd_laplacian(basis, points, h=1e-4):
    total = -2.0 * points.shape[1] * basis.eval(points)
    for k in range(points.shape[1]):
        shift = np.zeros(points.shape[1])
        shift[k] = h
        total = total + basis.eval(points + shift) + basis.eval(points - shift)
    return total / h ** 2


def _assert_close(fd, exact, rel):
    scale = max(1.0, float(np.max(np.abs(exact))))
    assert np.max(np.abs(fd - exact)) <= rel * scale


@pytest.fixture
def sample_points():
    return np.random.default_rng(7).uniform(0.0, 1.0, (100, 2))


@pytest.fixture
def plain_basis():
    return build_transnet(30, 2, 2.0, (0.5, 0.5), np.sqrt(2.0) / 2.0, seed=11)


def test_constant_column_and_size(plain_basis, sample_points):
    values = plain_basis.eval(sample_points)
    assert values.shape == (100, 31)
    assert np.array_equal(values[:, 0], np.ones(100))
    assert np.all(np.abs(values[:, 1:]) < 1.0)
    grads = plain_basis.eval_grad(sample_points)
    assert np.array_equal(grads[0][:, 0], np.zeros(100))


def test_hyperplanes_inside_ball(plain_basis):
    assert np.all(plain_basis.hyperplane_offsets >= 0.0)
    assert np.all(plain_basis.hyperplane_offsets <= plain_basis.radius)
    assert np.allclose(np.linalg.norm(plain_basis.directions, axis=1), 1.0)


def test_gradient_matches_finite_differences(plain_basis, sample_points):
    for fd, exact in zip(_fd_gradient(plain_basis, sample_points), plain_basis.eval_grad(sample_points)):
        _assert_close(fd, exact, 1e-5)


def test_laplacian_matches_finite_differences(plain_basis, sample_points):
    _assert_close(_fd_laplacian(plain_basis, sample_points), plain_basis.eval_laplacian(sample_points), 1e-5)


def test_gradient_at_hyperplane_equals_gamma_direction():
    basis = build_transnet(5, 2, 3.0, (0.0, 0.0), 1.0, seed=2)
    for j in range(basis.M):
        point = -basis.hyperplane_offsets[j] * basis.directions[j]
        grads = basis.eval_grad(point[None, :])
        gradient = np.array([grads[0][0, j + 1], grads[1][0, j + 1]])
        assert np.allclose(gradient, 3.0 * basis.directions[j])


def test_same_seed_same_basis():
    a = build_transnet(20, 2, 1.0, (0.0, 0.0), 1.0, seed=np.random.SeedSequence(5))
    b = build_transnet(20, 2, 1.0, (0.0, 0.0), 1.0, seed=np.random.SeedSequence(5))
    assert np.array_equal(a.directions, b.directions)
    assert np.array_equal(a.offsets, b.offsets)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_transnet(0, 2, 1.0, (0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        build_transnet(10, 2, 1.0, (0.0, 0.0), 0.0)
    with pytest.raises(ValueError):
        resolve_gammas([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        resolve_gammas(-1.0, 3)


def test_mixed_gammas_equal_thirds():
    gammas = mixed_gammas(9)
    assert gammas.tolist() == [1.0] * 3 + [5.0] * 3 + [10.0] * 3
    assert len(mixed_gammas(200)) == 200
    assert np.count_nonzero(mixed_gammas(200) == 1.0) == 67


def test_empirical_gamma():
    assert empirical_gamma(2.0, 100, 2, 1.0) == pytest.approx(20.0)
    with pytest.raises(ValueError):
        empirical_gamma(1.0, 0, 2, 1.0)


def test_fourier_lift_norm(sample_points):
    fmap = FourierMap.build(64, 2, seed=3)
    lifted = fmap.lift(sample_points)
    assert lifted.shape == (100, 128)
    assert np.allclose(np.linalg.norm(lifted, axis=1), np.sqrt(64.0), rtol=0.0, atol=1e-12)
    assert fmap.radius == pytest.approx(9.0)


def test_fourier_rows_follow_sigma_groups():
    fmap = FourierMap.build(4000, 2, sigmas=(1.0, 3.0), seed=0)
    first, second = fmap.matrix[:2000], fmap.matrix[2000:]
    assert np.std(first) == pytest.approx(1.0, rel=0.05)
    assert np.std(second) == pytest.approx(3.0, rel=0.05)


def test_fourier_basis_derivatives(sample_points):
    fmap = FourierMap.build(8, 2, sigmas=(1.0,), seed=4)
    basis = build_fourier_basis(20, fmap, 1.0, seed=5)
    assert basis.center.shape == (16,)
    for fd, exact in zip(_fd_gradient(basis, sample_points), basis.eval_grad(sample_points)):
        _assert_close(fd, exact, 1e-5)
    _assert_close(_fd_laplacian(basis, sample_points), basis.eval_laplacian(sample_points), 1e-4)


def test_bubble_vanishes_on_boundary_and_keeps_derivatives(sample_points):
    domain = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    basis = build_transnet(15, 2, 2.0, (0.5, 0.5), 0.8, seed=9).with_bubble(domain.bounding_box)
    boundary = sample_boundary(domain, 7).points
    assert np.max(np.abs(basis.eval(boundary))) < 1e-14
    for fd, exact in zip(_fd_gradient(basis, sample_points), basis.eval_grad(sample_points)):
        _assert_close(fd, exact, 1e-5)
    _assert_close(_fd_laplacian(basis, sample_points), basis.eval_laplacian(sample_points), 1e-5)


def test_basis_config_defaults_to_domain_ball():
    domain = Domain.rectangle((-1.0, -1.0), (1.0, 1.0))
    basis = BasisConfig(10, 2.0).build(domain, seed=0)
    assert np.allclose(basis.center, [0.0, 0.0])
    assert basis.radius == pytest.approx(np.sqrt(2.0))
    assert np.all(basis.gammas == 2.0)


@pytest.fixture
def strips():
    unit = Domain.rectangle((0.0, 0.0), (1.0, 1.0))
    return PartitionLayout.build(unit, [Domain.rectangle((0.0, 0.0), (0.5, 1.0)),
                                        Domain.rectangle((0.5, 0.0), (1.0, 1.0))], [6, 4])


def test_pou_basis_blocks(strips):
    bases = [BasisConfig(6).build(strips.subdomains[0], seed=1), BasisConfig(4).build(strips.subdomains[1], seed=2)]
    pou = build_pou_basis(strips, bases)
    assert pou.size == 12
    assert pou.block(1) == slice(7, 12)
    inside = np.array([[0.25, 0.5]])
    values = pou.eval(inside)
    assert np.array_equal(values[:, :7], bases[0].eval(inside))
    assert np.array_equal(values[:, 7:], np.zeros((1, 5)))


def test_pou_basis_halves_on_interface(strips):
    bases = [BasisConfig(6).build(strips.subdomains[0], seed=1), BasisConfig(4).build(strips.subdomains[1], seed=2)]
    pou = build_pou_basis(strips, bases)
    point = np.array([[0.5, 0.5]])
    assert np.allclose(pou.eval(point)[:, :7], 0.5 * bases[0].eval(point))
    assert np.allclose(pou.eval_laplacian(point)[:, 7:], 0.5 * bases[1].eval_laplacian(point))
    assert np.allclose(pou.eval_grad(point)[1][:, 7:], 0.5 * bases[1].eval_grad(point)[1])


def test_pou_basis_count_mismatch(strips):
    with pytest.raises(GeometryError):
        build_pou_basis(strips, [BasisConfig(6).build(strips.subdomains[0], seed=1)])


def test_constraint_box_is_domain_box():
    box = Box((0.0, 0.0), (2.0, 1.0))
    basis = build_transnet(3, 2, 1.0, (1.0, 0.5), 1.0, seed=0).with_bubble(box)
    assert basis.constraint == 'bubble_h'
    assert basis.eval(np.array([[2.0, 0.3]]))[0, 0] == 0.0
