import pytest

from horizonlab.regime import default_regime
from horizonlab.shear import ProfileSpec, build_profile
from horizonlab.sphere import get_grid


@pytest.fixture(scope="session")
def grid_small():
    return get_grid(16, 32)


@pytest.fixture(scope="session")
def grid_mid():
    return get_grid(32, 64)


@pytest.fixture(scope="session")
def params():
    return default_regime()


@pytest.fixture(scope="session")
def profile_mid(params, grid_mid):
    return build_profile(params, ProfileSpec(n_ubar=193), grid_mid)


@pytest.fixture(scope="session")
def profile_plain(params, grid_mid):
    """Wobble-free variant: f and zeta carry no angular dependence."""
    spec = ProfileSpec(n_ubar=193, wobble_frac=0.0, zeta_wobble_frac=0.0)
    return build_profile(params, spec, grid_mid)
