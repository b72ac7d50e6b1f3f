import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fcslab import zoo
from fcslab.popescu import chain_state

settings.register_profile(
    "fcslab", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fcslab")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def random_systems(draw, ks=(2, 3), ds=(2, 3, 4)):
    seed = draw(seeds)
    k = draw(st.sampled_from(ks))
    d = draw(st.sampled_from(ds))
    return zoo.random_system(np.random.default_rng(seed), k, d)


def zoo_systems():
    """Every fixed zoo member plus a few seeded random ones, with labels."""
    rng = np.random.default_rng(7)
    out = {
        "aklt": zoo.aklt(),
        "product": zoo.product(),
        "flip": zoo.flip(),
        "nonreal": zoo.nonreal_scalar(),
        "random_k2_d3": zoo.random_system(rng, 2, 3),
        "random_k3_d2": zoo.random_system(rng, 3, 2),
        "real_symmetric_k3_d3": zoo.random_real_symmetric_system(rng, 3, 3),
        "markov_b1_p3": zoo.classical_markov(rng, 1, 3),
    }
    return out


@pytest.fixture(scope="session")
def aklt_state():
    return chain_state(zoo.aklt())


@pytest.fixture(scope="session")
def product_state():
    return chain_state(zoo.product())
