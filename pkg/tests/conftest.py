import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ghostimg import io  # noqa: E402
from ghostimg.patterns import GeneratorDescriptor  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_object():
    return io.read_pgm(FIXTURES / "cross32.pgm")


@pytest.fixture(scope="session")
def mseq():
    return GeneratorDescriptor("mseq", 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
