"""Keyed random stream derivation."""

import numpy as np
import pytest

from randbc.errors import ConfigError
from randbc.streams import derive_rng


def test_same_key_reproduces_the_stream():
    a = derive_rng(42, 3, 7).standard_normal(5)
    b = derive_rng(42, 3, 7).standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_frozen_first_draws():
    # pinned so that a silent change of the derivation scheme is caught
    np.testing.assert_allclose(
        derive_rng(42, 3, 7).standard_normal(3),
        [-0.5902818792315019, -0.50873974642878, -1.0416544955971578],
        rtol=0, atol=1e-15)


def test_distinct_keys_decorrelate():
    a = derive_rng(42, 3, 7).standard_normal(100)
    b = derive_rng(42, 3, 8).standard_normal(100)
    c = derive_rng(43, 3, 7).standard_normal(100)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_key_validation():
    with pytest.raises(ConfigError):
        derive_rng(-1)
    with pytest.raises(ConfigError):
        derive_rng(0, -2)
