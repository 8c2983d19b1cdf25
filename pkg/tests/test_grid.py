"""Grid construction, boundary walk, and subdomain masks."""

import numpy as np
import pytest

from randbc.errors import ConfigError
from randbc.grid import build_grid, default_window, disk_mask, rect_mask


def test_coordinates_hit_endpoints_and_midpoint_exactly():
    g = build_grid(9)
    assert g.xs[0] == 0.0
    assert g.xs[-1] == 1.0
    assert g.xs[4] == 0.5
    assert g.h == pytest.approx(1.0 / 8.0, abs=0.0)


def test_mesh_arrays_use_ij_indexing():
    g = build_grid(9)
    assert g.X[3, 0] == g.xs[3]
    assert g.X[3, 7] == g.xs[3]
    assert g.Y[0, 3] == g.xs[3]


def test_grid_size_validation():
    with pytest.raises(ConfigError):
        build_grid(7)
    with pytest.raises(ConfigError):
        build_grid(8.5)


def test_boundary_walk_is_closed_ccw_loop():
    g = build_grid(9)
    ix, iy, s = g.boundary_ix, g.boundary_iy, g.boundary_s
    assert len(ix) == 4 * (g.n - 1)
    # starts at the origin corner and walks the bottom edge first
    assert (ix[0], iy[0]) == (0, 0)
    assert (ix[1], iy[1]) == (1, 0)
    # after the bottom edge comes the right edge, headed up
    j = g.n - 1
    assert (ix[j], iy[j]) == (g.n - 1, 0)
    assert (ix[j + 1], iy[j + 1]) == (g.n - 1, 1)
    # every boundary node appears exactly once
    pairs = set(zip(ix.tolist(), iy.tolist()))
    assert len(pairs) == len(ix)
    assert all(i == 0 or i == g.n - 1 or j == 0 or j == g.n - 1 for i, j in pairs)
    # uniform arclength over [0, 4) with step h
    assert s[0] == 0.0
    np.testing.assert_allclose(np.diff(s), g.h, rtol=0, atol=1e-15)
    assert s[-1] < 4.0


def test_boundary_and_interior_masks_partition_nodes():
    g = build_grid(9)
    b, i = g.boundary_mask, g.interior_mask
    assert not np.any(b & i)
    assert np.all(b | i)
    assert b.sum() == 4 * (g.n - 1)


def test_boundary_values_follow_walk_order():
    g = build_grid(9)
    field = 10.0 * g.X + g.Y
    vals = g.boundary_values(field)
    np.testing.assert_array_equal(vals, field[g.boundary_ix, g.boundary_iy])


def test_nearest_node_snaps_to_grid():
    g = build_grid(9)
    assert g.nearest_node((0.49, 0.74)) == (4, 6)
    assert g.nearest_node((0.0, 1.0)) == (0, 8)


def test_rect_mask_contents_and_validation():
    g = build_grid(17)
    m = rect_mask(g, (0.25, 0.25), (0.75, 0.75))
    assert m.kind == "rectangle"
    assert m.count == 9 * 9
    assert m.member[g.nearest_node((0.5, 0.5))]
    assert not m.member[0, 0]
    with pytest.raises(ConfigError):
        rect_mask(g, (0.0, 0.25), (0.75, 0.75))
    with pytest.raises(ConfigError):
        rect_mask(g, (0.5, 0.25), (0.4, 0.75))


def test_disk_mask_radius_floor_and_interior_containment():
    g = build_grid(17)
    m = disk_mask(g, (0.5, 0.5), 0.3)
    assert m.kind == "disk"
    assert m.count > 0
    ii, jj = m.indices
    r = np.hypot(g.xs[ii] - 0.5, g.xs[jj] - 0.5)
    assert np.all(r <= 0.3 + 1e-15)
    # radius below four mesh widths is rejected as unresolvable
    with pytest.raises(ConfigError):
        disk_mask(g, (0.5, 0.5), 0.2)
    # disk leaking outside the unit square is rejected
    with pytest.raises(ConfigError):
        disk_mask(g, (0.9, 0.5), 0.3)


def test_disk_node_count_approximates_its_area():
    g = build_grid(65)
    m = disk_mask(g, (0.5, 0.5), 0.2)
    expected = np.pi * 0.2 ** 2 / g.h ** 2
    assert abs(m.count - expected) <= 0.04 * expected


def test_default_window_is_central_rectangle():
    g = build_grid(17)
    w = default_window(g)
    assert w.kind == "rectangle"
    assert w.params["lo"] == (0.25, 0.25)
    assert w.params["hi"] == (0.75, 0.75)
