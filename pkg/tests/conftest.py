import pytest

from clft import variant_config
from clft.params import init_model_params, model_weights_from_params


@pytest.fixture(scope="session")
def base_config():
    return variant_config("base")


@pytest.fixture(scope="session")
def base_params(base_config):
    # ~840 MB and a few seconds; shared by every test that needs real weights.
    return init_model_params(base_config, seed=0)


@pytest.fixture(scope="session")
def base_weights(base_config, base_params):
    return model_weights_from_params(base_params, base_config)
