"""Grid construction, masks, and metric handling."""

import numpy as np
import pytest

from mvlab import (
    FLAT_BOUNDARY,
    INTERIOR,
    conformal_metric,
    identity_metric,
    make_ball_domain,
    make_half_ball_domain,
    metric_deviation,
    polynomial_metric,
    sine_metric,
)
from mvlab.errors import (
    CenterBelowBoundary,
    CenterOffGrid,
    MetricNotPositiveDefinite,
    MVLabError,
    ResolutionTooCoarse,
)


def test_euclidean_disk_node_count():
    h = 1 / 64
    dom = make_ball_domain([0, 0], 1.0, h, 2)
    expected = np.pi / h**2
    boundary_layer = 2 * np.pi / h  # one node ring
    assert abs(dom.node_count - expected) < boundary_layer


def test_resolution_too_coarse():
    with pytest.raises(ResolutionTooCoarse):
        make_ball_domain([0, 0], 1.0, 1 / 4, 2)


def test_center_is_node():
    dom = make_ball_domain([0.25, -0.5], 0.5, 1 / 32, 2)
    idx = dom.node_index([0.25, -0.5])
    assert np.allclose(dom.node_point(idx), [0.25, -0.5])
    assert dom.mask[idx] == INTERIOR


def test_conformal_metric_mask_matches_bruteforce():
    # oracle: for g = (1 + c x1) * identity centered at 0 the first-order
    # corrected distance is |x| (1 + c x1 / 4), solved in closed form
    h = 1 / 64
    c = 0.01
    metric = conformal_metric(2, c, axis=1)
    dom = make_ball_domain([0, 0], 1.0, h, 2, metric)

    pts = dom.points()
    corrected = np.linalg.norm(pts, axis=-1) * (1.0 + 0.25 * c * pts[:, 1])
    oracle_count = int(np.count_nonzero(corrected < 1.0))
    assert dom.node_count == oracle_count

    euclid = make_ball_domain([0, 0], 1.0, h, 2)
    assert abs(dom.node_count - euclid.node_count) / euclid.node_count < 0.02


def test_half_ball_flat_segment():
    h = 1 / 64
    dom = make_half_ball_domain([0.0, 0.0], 1.0, h, 2)
    flat = np.argwhere(dom.mask == FLAT_BOUNDARY)
    assert flat.size > 0
    coords = dom.origin + h * flat
    assert np.all(np.abs(coords[:, 0]) < 1e-12)
    width = dom.flat_node_count * h
    assert abs(width - 2.0) < 3 * h


def test_half_ball_center_above_radius_equals_ball():
    h = 1 / 64
    hb = make_half_ball_domain([2.0, 0.0], 1.0, h, 2)
    ball = make_ball_domain([2.0, 0.0], 1.0, h, 2)
    assert hb.flat_node_count == 0
    assert hb.shape == ball.shape
    assert np.array_equal(hb.in_mask, ball.in_mask)


def test_half_ball_clipped_width():
    h = 1 / 64
    dom = make_half_ball_domain([0.5, 0.0], 1.0, h, 2)
    width = dom.flat_node_count * h
    assert abs(width - np.sqrt(3.0)) <= 2 * h


def test_half_ball_errors():
    with pytest.raises(CenterBelowBoundary):
        make_half_ball_domain([-0.1, 0.0], 1.0, 1 / 64, 2)
    with pytest.raises(CenterOffGrid):
        make_half_ball_domain([0.013, 0.0], 1.0, 1 / 64, 2)


def test_interior_nodes_have_full_neighborhoods():
    dom = make_half_ball_domain([0.25, 0.0], 0.5, 1 / 16, 2)
    inside = dom.in_mask
    interior = dom.mask == INTERIOR
    for ax in range(2):
        for step in (+1, -1):
            shifted = np.roll(inside, -step, axis=ax)
            # roll wraps; wrapped entries are outside the ball anyway
            assert np.all(shifted[interior])


def test_mask_monotone_in_radius():
    h = 1 / 32
    small = make_ball_domain([0, 0], 0.5, h, 2)
    big = make_ball_domain([0, 0], 0.75, h, 2)
    pts_small = {tuple(p) for p in np.round(small.in_mask_points() / h).astype(int)}
    pts_big = {tuple(p) for p in np.round(big.in_mask_points() / h).astype(int)}
    assert pts_small <= pts_big


def test_refinement_volume_consistency():
    vol = {}
    for h in (1 / 16, 1 / 32):
        dom = make_ball_domain([0, 0], 1.0, h, 2)
        vol[h] = dom.node_count * h**2
    assert abs(vol[1 / 16] - vol[1 / 32]) <= 2 * (1 / 16)
    assert abs(vol[1 / 32] - np.pi) < abs(vol[1 / 16] - np.pi) + 1e-12


def test_metric_deviation_values():
    dom = make_ball_domain([0, 0], 1.0, 1 / 64, 2)
    assert metric_deviation(identity_metric(2), dom) == 0.0

    const = polynomial_metric(2, [(0, 0, 0.03, (0, 0)), (1, 1, 0.03, (0, 0))], 0.03)
    dev = metric_deviation(const, dom)
    assert abs(dev - 0.03) < 1e-12

    h = 1 / 64
    wavy = sine_metric(2, 0.01, entry=(0, 0), axis=1)
    dev2 = metric_deviation(wavy, dom)
    assert abs(dev2 - 0.01) <= 10 * h**2


def test_metric_positive_definite_rejected():
    bad = polynomial_metric(2, [(0, 0, -2.0, (0, 0))], 2.0)
    with pytest.raises(MetricNotPositiveDefinite):
        make_ball_domain([0, 0], 1.0, 1 / 32, 2, bad)


def test_three_and_four_dimensional_masks():
    dom3 = make_ball_domain([0, 0, 0], 0.5, 1 / 16, 3)
    vol3 = dom3.node_count * (1 / 16) ** 3
    assert abs(vol3 - 4 * np.pi / 3 * 0.5**3) < 0.05
    dom4 = make_half_ball_domain([0.0, 0, 0, 0], 0.25, 1 / 32, 4)
    assert dom4.flat_node_count > 0
    vol4 = dom4.node_count * (1 / 32) ** 4
    assert abs(vol4 - 0.5 * np.pi**2 / 2 * 0.25**4) < 0.002


def test_density_field_validation():
    dom = make_ball_domain([0, 0], 0.5, 1 / 16, 2)
    with pytest.raises(MVLabError):
        dom.field_from_function(lambda p: p[:, 0])  # signed values as density
    f = dom.field_from_function(lambda p: p[:, 0], density=False)
    assert f.at([0.25, 0.0]) == 0.25


def test_understated_metric_deviation_rejected():
    # declared deviation must cover the measured W^{1,inf} distance
    lying = polynomial_metric(2, [(0, 0, 0.04, (0, 0)), (1, 1, 0.04, (0, 0))],
                              declared_deviation=0.001)
    with pytest.raises(MVLabError):
        make_ball_domain([0, 0], 1.0, 1 / 32, 2, lying)
