import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pfclust import ExpressionMatrix

DATA_DIR = Path(__file__).parent / "data"

# parameters behind tests/data/synthetic_100x10.tsv; a test regenerates the
# file from these and compares bytes, so keep them in sync with the file
SYNTH_CLUSTERS = [
    ((5.0, 5.0, 5.0, 5.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1.0, 30),
    ((0.0, 0.0, 0.0, 0.0, 0.0, 5.0, 5.0, 5.0, 5.0, 5.0), 1.0, 30),
    ((5.0, 0.0, 5.0, 0.0, 5.0, 0.0, 5.0, 0.0, 5.0, 0.0), 1.0, 30),
]
SYNTH_NOISE = 10
SYNTH_SEED = 42


@pytest.fixture
def four_points():
    """The 1-D {0, 1, 10, 11} fixture behind several exact oracles."""
    return np.array([[0.0], [1.0], [10.0], [11.0]])


@pytest.fixture
def small_matrix():
    return ExpressionMatrix(
        ("g1", "g2", "g3"),
        ("s1", "s2", "s3"),
        [[2.0, 4.0, 6.0], [1.0, 2.0, 3.0], [5.0, 5.0, 5.0]],
    )


@pytest.fixture
def bundled_path():
    return DATA_DIR / "synthetic_100x10.tsv"
