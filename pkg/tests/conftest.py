import numpy as np
import pytest

from ends_sqfn.radial_model import EndProfile, build_model
from ends_sqfn.sqfn import SpectralGrid, SqfnEngine


@pytest.fixture(scope="session")
def model():
    """The workhorse two-ended model: dimensions (3, 4), 6 decades."""
    return build_model([EndProfile(3, 1.0, 1e9, 48), EndProfile(4, 1.0, 1e9, 48)])


@pytest.fixture(scope="session")
def engine(model):
    return SqfnEngine(model)


@pytest.fixture(scope="session")
def grid(model):
    return SpectralGrid.for_model(model, points_per_decade_k=24)


@pytest.fixture(scope="session")
def rough_field(model):
    """Random data supported on radii <= 1e3 of both ends plus the hub."""
    rng = np.random.default_rng(1)
    f = rng.standard_normal(model.num_nodes)
    for i in range(len(model.ends)):
        f[model.end_slice(i)] *= model.node_radius(i) <= 1e3
    return f
