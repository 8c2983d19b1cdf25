"""Internal-data reconstructions: absorption and conductivity round trips."""

import numpy as np
import pytest

from randbc.errors import ConfigError, DomainError
from randbc.grid import build_grid, default_window
from randbc.inverse import (conductivity_forward, conductivity_reconstruct,
                            qpat_forward, qpat_reconstruct,
                            qpat_reconstruct_multi)


@pytest.fixture(scope="module")
def grid():
    return build_grid(65)


@pytest.fixture(scope="module")
def mu_bump(grid):
    return 1.0 + 0.5 * np.exp(-50.0 * ((grid.X - 0.5) ** 2 + (grid.Y - 0.5) ** 2))


def test_absorption_round_trip_from_exact_data(grid, mu_bump):
    bc = np.ones(grid.boundary_s.shape[0])
    data = qpat_forward(grid, mu_bump, bc)
    res = qpat_reconstruct(data, tau=0.1)
    w = default_window(grid)
    assert np.all(res.mask_valid[w.member])
    err = res.mu_hat[res.mask_valid] - mu_bump[res.mask_valid]
    rel = np.linalg.norm(err) / np.linalg.norm(mu_bump[res.mask_valid])
    assert rel <= 1e-8
    assert np.all(np.isnan(res.mu_hat[~res.mask_valid]))


def test_absorption_validation(grid, mu_bump):
    bc = np.ones(grid.boundary_s.shape[0])
    with pytest.raises(ConfigError):
        qpat_forward(grid, -mu_bump, bc)
    bad = mu_bump.copy()
    bad[3, 3] = np.nan
    with pytest.raises(DomainError):
        qpat_forward(grid, bad, bc)
    data = qpat_forward(grid, mu_bump, bc)
    with pytest.raises(ConfigError):
        qpat_reconstruct(data, tau=0.0)


def test_threshold_masks_out_the_small_field_region(grid, mu_bump):
    # an illumination vanishing on part of the boundary makes u small
    # near that part, which the validity mask must exclude
    s = grid.boundary_s
    bc = np.clip(np.sin(np.pi * s / 4.0), 0.0, None)
    data = qpat_forward(grid, mu_bump, bc)
    res = qpat_reconstruct(data, tau=0.2)
    assert not res.mask_valid.all()
    valid_err = np.abs(res.mu_hat[res.mask_valid] - mu_bump[res.mask_valid])
    assert valid_err.max() <= 1e-6 * mu_bump.max()


def test_multi_illumination_stitches_a_complete_cover(grid, mu_bump):
    s = grid.boundary_s
    bc1 = np.clip(np.sin(np.pi * s / 2.0), 0.0, None)
    bc2 = np.clip(-np.sin(np.pi * s / 2.0), 0.0, None)
    d1 = qpat_forward(grid, mu_bump, bc1)
    d2 = qpat_forward(grid, mu_bump, bc2)
    single = qpat_reconstruct(d1, tau=0.2)
    multi = qpat_reconstruct_multi([d1, d2], tau=0.2)
    assert multi.mask_valid.sum() > single.mask_valid.sum()
    assert set(np.unique(multi.labels)) <= {1, 2}
    err = multi.mu_hat[multi.mask_valid] - mu_bump[multi.mask_valid]
    assert np.abs(err).max() <= 1e-6 * mu_bump.max()
    # a constant illumination alone already covers the window
    bc = np.ones(grid.boundary_s.shape[0])
    full = qpat_reconstruct_multi([qpat_forward(grid, mu_bump, bc)], tau=0.1)
    assert full.complete


def test_conductivity_round_trip(grid):
    a = np.exp(grid.X)
    data = conductivity_forward(grid, a)
    res = conductivity_reconstruct(data, tau=1e-3)
    assert res.coverage == 1.0
    w = default_window(grid)
    sel = res.region & w.member
    err = res.log_a_hat[sel] - grid.X[sel]
    rel = np.linalg.norm(err) / np.linalg.norm(grid.X[sel])
    assert rel <= 1e-3
    assert np.all(np.isnan(res.log_a_hat[~res.region]))


def test_conductivity_gauge_scaling_invariance(grid):
    # multiplying the conductivity by a constant leaves the fields, hence
    # the anchored reconstruction, unchanged
    a = np.exp(grid.X)
    r1 = conductivity_reconstruct(conductivity_forward(grid, a),
                                  tau=1e-3, anchor_value=0.0)
    r2 = conductivity_reconstruct(conductivity_forward(grid, 2.0 * a),
                                  tau=1e-3, anchor_value=0.0)
    np.testing.assert_array_equal(r1.region, r2.region)
    np.testing.assert_allclose(r1.log_a_hat[r1.region],
                               r2.log_a_hat[r2.region], rtol=0, atol=1e-9)


def test_conductivity_anchor_defaults_to_the_true_value(grid):
    a = np.exp(grid.X)
    data = conductivity_forward(grid, a)
    res = conductivity_reconstruct(data, tau=1e-3)
    ia, ja = grid.nearest_node((0.5, 0.5))
    assert res.log_a_hat[ia, ja] == pytest.approx(grid.X[ia, ja], abs=1e-6)


def test_conductivity_warns_on_poor_jacobian_coverage(grid):
    a = np.exp(grid.X)
    data = conductivity_forward(grid, a)
    with pytest.warns(RuntimeWarning):
        res = conductivity_reconstruct(data, tau=0.95)
    assert res.coverage < 0.99
    # an unreachable threshold cannot be reconstructed at all
    with pytest.raises(DomainError), pytest.warns(RuntimeWarning):
        conductivity_reconstruct(data, tau=10.0)


def test_conductivity_custom_boundary_traces(grid):
    a = np.exp(grid.X)
    bcs = (grid.boundary_values(grid.X + grid.Y),
           grid.boundary_values(grid.X - grid.Y))
    data = conductivity_forward(grid, a, bcs=bcs)
    res = conductivity_reconstruct(data, tau=1e-3)
    assert res.coverage >= 0.99
    sel = res.region & default_window(grid).member
    err = res.log_a_hat[sel] - grid.X[sel]
    assert np.linalg.norm(err) / np.linalg.norm(grid.X[sel]) <= 1e-2


def test_conductivity_validation(grid):
    a = np.exp(grid.X)
    bad = a.copy()
    bad[2, 2] = -1.0
    with pytest.raises(ConfigError):
        conductivity_forward(grid, bad)
    with pytest.raises(ConfigError):
        conductivity_forward(grid, a, bcs=(np.zeros(grid.boundary_s.shape[0]),))
    data = conductivity_forward(grid, a)
    with pytest.raises(ConfigError):
        conductivity_reconstruct(data, tau=-1.0)
