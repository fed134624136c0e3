import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crosstalk_arena.noise import default_model  # noqa: E402
from crosstalk_arena.topology import build_heavy_hex  # noqa: E402


@pytest.fixture(scope="session")
def hh():
    return build_heavy_hex(127)


@pytest.fixture(scope="session")
def model():
    return default_model()
