import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from osmosis._kernels import warm_up


@pytest.fixture(scope="session", autouse=True)
def jit_warmup():
    # Compile the relaxation kernel once so timed tests measure the
    # algorithm, not JIT compilation.
    warm_up()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
