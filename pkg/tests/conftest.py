"""Shared fixtures.  Expensive objects (meshes, operators, spectra) are
session-scoped; tests must not mutate them."""

import numpy as np
import pytest

from electrosense.geometry import Material, make_shape
from electrosense.potentials import (assemble_neumann_poincare,
                                     assemble_single_layer,
                                     spectral_decomposition)
from electrosense.pulse import base_pulse


@pytest.fixture(scope="session")
def disk512():
    return make_shape("circle", 512)


@pytest.fixture(scope="session")
def disk256():
    return make_shape("circle", 256)


@pytest.fixture(scope="session")
def ellipse512():
    return make_shape("ellipse", 512)


@pytest.fixture(scope="session")
def disk_ops(disk512):
    return (assemble_single_layer(disk512), assemble_neumann_poincare(disk512))


@pytest.fixture(scope="session")
def ellipse_ops(ellipse512):
    return (assemble_single_layer(ellipse512),
            assemble_neumann_poincare(ellipse512))


@pytest.fixture(scope="session")
def ellipse_spectral(ellipse512, ellipse_ops):
    return spectral_decomposition(*ellipse_ops)


@pytest.fixture(scope="session")
def mat10():
    return Material(10.0, 1.0)


@pytest.fixture(scope="session")
def pulse0():
    return base_pulse()


def rng(seed=0):
    return np.random.default_rng(seed)
