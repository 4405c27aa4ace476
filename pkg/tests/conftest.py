import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _reference import standard_basis, standard_shifts  # noqa: E402


@pytest.fixture(scope="session")
def basis():
    return standard_basis()


@pytest.fixture(scope="session")
def shifts():
    return standard_shifts()
