"""Shared fixtures.

Dictionary construction dominates test cost (one PDE solve per basis mode),
so dictionaries are built once per session and shared read-only.
"""

import pytest

from randbc.boundary import RandomBoundaryModel
from randbc.grid import build_grid
from randbc.runge import build_dictionary
from randbc.solver import CoefficientField


@pytest.fixture(scope="session")
def grid17():
    return build_grid(17)


@pytest.fixture(scope="session")
def grid33():
    return build_grid(33)


@pytest.fixture(scope="session")
def grid65():
    return build_grid(65)


@pytest.fixture(scope="session")
def ident17(grid17):
    return CoefficientField.isotropic(grid17)


@pytest.fixture(scope="session")
def ident33(grid33):
    return CoefficientField.isotropic(grid33)


@pytest.fixture(scope="session")
def ident65(grid65):
    return CoefficientField.isotropic(grid65)


@pytest.fixture(scope="session")
def model9():
    return RandomBoundaryModel.power_law(K=9, c=1.0, s=1.5, family="gaussian")


@pytest.fixture(scope="session")
def model33():
    return RandomBoundaryModel.power_law(K=33, c=1.0, s=1.5, family="gaussian")


@pytest.fixture(scope="session")
def dict17(grid17, ident17, model9):
    """Small Laplace dictionary for the fast experiment tests."""
    return build_dictionary(grid17, ident17, model9)


@pytest.fixture(scope="session")
def dict65(grid65, ident65, model33):
    """Full-size Laplace dictionary for the approximation tests."""
    return build_dictionary(grid65, ident65, model33)
