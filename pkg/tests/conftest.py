import sys

import numpy as np
import pytest

from qassist.model import XyzParams


def random_params(rng, scale=2.0):
    return XyzParams(*rng.normal(0.0, scale, size=5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report(capsys):
    """Print a verdict line that survives output capture."""

    def emit(line):
        with capsys.disabled():
            sys.stdout.write("\n" + line + "\n")

    return emit
