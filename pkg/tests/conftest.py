import numpy as np
import pytest

from hkale.pipeline import Context, build_context


@pytest.fixture(scope="session")
def get_context():
    """Session-cached context builder; group construction is deterministic so
    sharing across tests is safe."""
    cache: dict[tuple, Context] = {}

    def get(family: str, k: int | None = None) -> Context:
        if (family, k) not in cache:
            cache[(family, k)] = build_context(family, k)
        return cache[(family, k)]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
