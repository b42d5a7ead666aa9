import pytest

from cstar_angles import m2
from cstar_angles import matrices as mx


@pytest.fixture(scope="session")
def inclusion():
    return m2.canonical_inclusion()


@pytest.fixture(scope="session")
def tower_level(inclusion):
    # materialized canonical 2x2 tower; immutable, safe to share
    return m2.canonical_tower(inclusion)


@pytest.fixture
def rng():
    return mx.default_rng(42)
