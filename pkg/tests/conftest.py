from pathlib import Path

import numpy as np
import pytest

from gfdecode.ldpc import ParityCheckMatrix, parse_alist
from gfdecode.score import (
    ScoreNet,
    SegmentedChannelSpec,
    TrainConfig,
    correlated2d_sampler,
    train_score,
)

CODES_DIR = Path(__file__).resolve().parent.parent / "src" / "gfdecode" / "codes"

# Worked 3x6 example matrix used throughout: three checks over six bits,
# edges numbered row-major.
H3X6_DENSE = np.array(
    [
        [1, 1, 1, 0, 0, 0],
        [0, 0, 1, 1, 0, 0],
        [0, 0, 0, 1, 1, 1],
    ]
)

H3X6_ALIST = """\
6 3
2 3
1 1 2 2 1 1
3 2 3
1
1
1 2
2 3
3
3
1 2 3
3 4
4 5 6
"""

# same matrix, zero-padded index lines (the other published variant)
H3X6_ALIST_PADDED = """\
6 3
2 3
1 1 2 2 1 1
3 2 3
1 0
1 0
1 2
2 3
3 0
3 0
1 2 3
3 4 0
4 5 6
"""


@pytest.fixture
def rep2():
    return ParityCheckMatrix.from_dense([[1, 1]])


@pytest.fixture
def h3x6():
    return ParityCheckMatrix.from_dense(H3X6_DENSE)


@pytest.fixture(scope="session")
def code204():
    return parse_alist((CODES_DIR / "reg_3_6_n204.alist").read_text())


@pytest.fixture(scope="session")
def code48():
    return parse_alist((CODES_DIR / "reg_3_6_n48.alist").read_text())


@pytest.fixture(scope="session")
def code204_path():
    return str(CODES_DIR / "reg_3_6_n204.alist")


def make_cluster_cloud(count=1000, seed=42):
    """Correlated 2D error candidates: three tight clusters on the diagonal."""
    rng = np.random.default_rng(seed)
    centers = np.array([[-0.55, -0.55], [0.0, 0.0], [0.55, 0.55]])
    which = rng.integers(0, 3, size=count)
    return centers[which] + 0.01 * rng.normal(size=(count, 2))


@pytest.fixture(scope="session")
def correlated_cloud():
    """Candidate cloud plus a score net trained with the standard recipe
    (3 layers, 64 hidden units, batch 100, 1e4 iterations, lr 0.005,
    sigma 0.3). Session-scoped: trained once, shared by the property test
    and the acceptance fixture."""
    points = make_cluster_cloud()
    rng = np.random.default_rng(7)
    net = ScoreNet.init(2, hidden=64, rng=rng)
    spec = SegmentedChannelSpec(
        nu=2, K=102, error_sampler=correlated2d_sampler(points)
    )
    train_score(
        net, spec, TrainConfig(batch=100, iterations=10_000, sigma=0.3, lr=0.005),
        rng,
    )
    return points, net, spec
