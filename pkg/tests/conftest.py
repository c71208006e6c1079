import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.algebra.lattices import PRESET_DIR, LatticeModule, PresetCatalog  # noqa: E402


@pytest.fixture(scope="session")
def catalog() -> PresetCatalog:
    return PresetCatalog(PRESET_DIR)


@pytest.fixture(scope="session")
def preset(catalog):
    cache: dict[str, LatticeModule] = {}

    def load(name: str) -> LatticeModule:
        if name not in cache:
            cache[name] = catalog.load(name)
        return cache[name]

    return load


@pytest.fixture
def pg(preset) -> LatticeModule:
    """One mirror on the rectangular lattice; class 1 is the glide."""
    return preset("rectangular_mirror")


@pytest.fixture
def square(preset) -> LatticeModule:
    return preset("square_axis_mirror")
