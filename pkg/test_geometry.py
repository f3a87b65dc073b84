"""
Тести геометрії: області, ребра, вибірки, обрізання, розбиття та інтерфейси
"""

import numpy as np
import pytest

from weak_transnet.geometry import (Box, Domain, DomainKind, Interface, PartitionLayout, clip_box,
                                    count_neighbors, sample_boundary, sample_interface, sample_interior)
from weak_transnet.utils import GeometryError


@pytest.fixture
def unit():
    return Domain.rectangle((0.0, 0.0), (1.0, 1.0))


@pytest.fixture
def lshape():
    return Domain.lshape(Box((-1.0, -1.0), (1.0, 1.0)), Box((-1.0, -1.0), (0.0, 0.0)))


def test_rectangle_metrics(unit):
    assert unit.kind == DomainKind.RECTANGLE
    assert unit.area == pytest.approx(1.0)
    assert unit.perimeter == pytest.approx(4.0)
    assert np.allclose(unit.centroid, [0.5, 0.5])
    assert unit.half_diagonal == pytest.approx(np.sqrt(2.0) / 2.0)


def test_rectangle_edges_order_and_normals(unit):
    normals = [edge.normal for edge in unit.edges]
    assert normals == [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)]
    assert [edge.edge_id for edge in unit.edges] == [0, 1, 2, 3]


def test_lshape_has_six_edges(lshape):
    assert lshape.kind == DomainKind.LSHAPE
    assert len(lshape.rects) == 3
    assert lshape.area == pytest.approx(3.0)
    assert len(lshape.edges) == 6
    assert lshape.perimeter == pytest.approx(8.0)


def test_lshape_reentrant_edges_point_into_excluded_quadrant(lshape):
    reentrant = [edge for edge in lshape.edges
                 if np.isclose(edge.start[0], 0.0) and np.isclose(edge.end[0], 0.0)]
    assert len(reentrant) == 1
    assert reentrant[0].normal == (-1.0, 0.0)
    horizontal = [edge for edge in lshape.edges
                  if np.isclose(edge.start[1], 0.0) and np.isclose(edge.end[1], 0.0)]
    assert len(horizontal) == 1
    assert horizontal[0].normal == (0.0, -1.0)


def test_lshape_contains(lshape):
    points = np.array([[0.5, 0.5], [-0.5, 0.5], [0.5, -0.5], [-0.5, -0.5], [0.0, 0.0], [1.0, -1.0]])
    assert lshape.contains(points).tolist() == [True, True, True, False, True, True]


def test_lshape_rejects_non_corner_exclusion():
    with pytest.raises(GeometryError):
        Domain.lshape(Box((0.0, 0.0), (1.0, 1.0)), Box((0.2, 0.2), (0.4, 0.4)))


def test_degenerate_rectangle_rejected():
    with pytest.raises(GeometryError):
        Domain.rectangle((0.0, 0.0), (0.0, 1.0))


def test_overlapping_union_rejected():
    with pytest.raises(GeometryError):
        Domain.union([Box((0.0, 0.0), (1.0, 1.0)), Box((0.5, 0.5), (1.5, 1.5))])


def test_union_merges_collinear_edges():
    domain = Domain.union([Box((0.0, 0.0), (1.0, 1.0)), Box((1.0, 0.0), (2.0, 1.0))])
    assert len(domain.edges) == 4
    assert domain.perimeter == pytest.approx(6.0)


def test_sample_boundary_uniform_grid(unit):
    samples = sample_boundary(unit, 5)
    assert len(samples) == 20
    assert np.all(unit.contains(samples.points))
    bottom = samples.points[samples.edge_ids == 0]
    assert np.allclose(bottom[:, 1], 0.0)
    assert np.allclose(bottom[:, 0], np.linspace(0.0, 1.0, 5))
    assert np.allclose(samples.normals[samples.edge_ids == 3], [-1.0, 0.0])
    first = samples[0]
    assert first.edge_id == 0


def test_sample_boundary_random_is_seeded(lshape):
    a = sample_boundary(lshape, 10, 'uniform_random', seed=3)
    b = sample_boundary(lshape, 10, 'uniform_random', seed=3)
    assert np.array_equal(a.points, b.points)
    assert np.all(lshape.contains(a.points))


def test_sample_boundary_validates_arguments(unit):
    with pytest.raises(ValueError):
        sample_boundary(unit, 1)
    with pytest.raises(ValueError):
        sample_boundary(unit, 10, 'sobol')


def test_sample_interior_stays_inside(lshape):
    points = sample_interior(lshape, 500, np.random.default_rng(0))
    assert points.shape == (500, 2)
    assert not np.any((points[:, 0] < 0.0) & (points[:, 1] < 0.0))


def test_clip_box_cuts_corner(lshape):
    pieces = clip_box(lshape, Box((-0.5, -0.5), (0.5, 0.5)))
    assert sum(piece.area for piece in pieces) == pytest.approx(0.75)


def test_clip_box_outside_is_empty(unit):
    assert clip_box(unit, Box((2.0, 2.0), (3.0, 3.0))) == []


def test_clip_box_inside_is_identity(unit):
    box = Box((0.2, 0.2), (0.4, 0.5))
    pieces = clip_box(unit, box)
    assert len(pieces) == 1
    assert pieces[0] == box


def test_edge_clip(unit):
    edge = unit.edges[0]
    piece = edge.clip(Box((0.25, -0.1), (0.75, 0.1)))
    assert piece.length == pytest.approx(0.5)
    assert edge.clip(Box((0.25, 0.5), (0.75, 0.9))) is None


@pytest.fixture
def strips(unit):
    subdomains = [Domain.rectangle((0.0, 0.0), (0.5, 1.0)), Domain.rectangle((0.5, 0.0), (1.0, 1.0))]
    return PartitionLayout.build(unit, subdomains, [10, 10])


def test_layout_finds_single_interface(strips):
    assert len(strips.interfaces) == 1
    iface = strips.interfaces[0]
    assert (iface.left, iface.right) == (0, 1)
    assert iface.normal == (1.0, 0.0)
    assert iface.length == pytest.approx(1.0)


def test_chi_sums_to_one(strips):
    rng = np.random.default_rng(1)
    points = np.vstack([rng.uniform(0.0, 1.0, (200, 2)), [[0.5, 0.3], [0.5, 1.0], [0.0, 0.0]]])
    chi = strips.chi(points)
    assert np.array_equal(chi.sum(axis=1), np.ones(len(points)))
    assert chi[-3].tolist() == [0.5, 0.5]


def test_chi_four_corner_point():
    square = Domain.rectangle((-1.0, -1.0), (1.0, 1.0))
    quads = [Domain.rectangle((-1.0, -1.0), (0.0, 0.0)), Domain.rectangle((0.0, -1.0), (1.0, 0.0)),
             Domain.rectangle((-1.0, 0.0), (0.0, 1.0)), Domain.rectangle((0.0, 0.0), (1.0, 1.0))]
    layout = PartitionLayout.build(square, quads)
    assert len(layout.interfaces) == 4
    assert layout.chi(np.array([[0.0, 0.0]])).tolist() == [[0.25, 0.25, 0.25, 0.25]]
    assert count_neighbors(layout, 0, (0.0, 0.0)) == 3
    assert count_neighbors(layout, 0, (-0.5, -0.5)) == 0


def test_layout_rejects_gaps(unit):
    with pytest.raises(GeometryError):
        PartitionLayout.build(unit, [Domain.rectangle((0.0, 0.0), (0.5, 1.0))])


def test_layout_rejects_overlap(unit):
    with pytest.raises(GeometryError):
        PartitionLayout.build(unit, [Domain.rectangle((0.0, 0.0), (0.6, 1.0)),
                                     Domain.rectangle((0.4, 0.0), (1.0, 1.0))])


def test_interface_kappa_sides(unit):
    kappa = lambda p: np.where(p[:, 0] > 0.5, 100.0, 1.0)
    layout = PartitionLayout.build(unit, [Domain.rectangle((0.0, 0.0), (0.5, 1.0)),
                                          Domain.rectangle((0.5, 0.0), (1.0, 1.0))], kappa=kappa)
    iface = layout.interfaces[0]
    assert iface.kappa_left == 1.0
    assert iface.kappa_right == 100.0


def test_outer_edges_of_strip(strips):
    edges = strips.outer_edges(0)
    assert sum(edge.length for edge in edges) == pytest.approx(2.0)
    assert all(edge.normal != (1.0, 0.0) for edge in edges)


def test_sample_interface(strips):
    samples = sample_interface(strips, 0, 11)
    assert samples.points.shape == (11, 2)
    assert np.allclose(samples.points[:, 0], 0.5)
    assert np.allclose(samples.points[[0, -1], 1], [0.0, 1.0])
    with pytest.raises(GeometryError):
        sample_interface(strips, 3, 11)


def test_interface_must_be_axis_aligned():
    with pytest.raises(GeometryError):
        Interface(0, 1, (0.0, 0.0), (1.0, 1.0), (1.0, 0.0))


def test_single_layout(unit):
    layout = PartitionLayout.single(unit, 50)
    assert layout.n_subdomains == 1
    assert layout.interfaces == ()
    assert np.array_equal(layout.chi(np.array([[0.3, 0.3], [1.0, 1.0]])), [[1.0], [1.0]])
