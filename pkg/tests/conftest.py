import pytest

from catalog import list_catalog, load_entry
from exactnum import RationalVector

CATALOG_IDS = ["P2", "P1xP1", "BlqP2", "Bl2P2", "BlpP3"]
SURFACE_IDS = ["P2", "P1xP1", "BlqP2", "Bl2P2"]


def vec(*values) -> RationalVector:
    return RationalVector(tuple(values))


@pytest.fixture(scope="session")
def catalog_models():
    """Все модели каталога, загруженные один раз на сессию"""
    return {entry.id: load_entry(entry.id) for entry in list_catalog()}


@pytest.fixture(scope="session")
def p2(catalog_models):
    return catalog_models["P2"]


@pytest.fixture(scope="session")
def p1xp1(catalog_models):
    return catalog_models["P1xP1"]


@pytest.fixture(scope="session")
def blq(catalog_models):
    return catalog_models["BlqP2"]


@pytest.fixture(scope="session")
def bl2(catalog_models):
    return catalog_models["Bl2P2"]


@pytest.fixture(scope="session")
def blp3(catalog_models):
    return catalog_models["BlpP3"]
