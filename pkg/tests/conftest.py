import numpy as np
import pytest
from scipy import stats

from patails.config import LoopMode, ModelConfig


@pytest.fixture
def default_cfg():
    return ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL1)


@pytest.fixture
def bare_cfg():
    # a single vertex without edges, no loops: the benchmark convention
    return ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(1.0,))


def assorted_configs():
    """A small spread of valid model configurations for property tests."""
    return [
        ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL1),
        ModelConfig(l=1, beta=0.5, loop_mode=LoopMode.MODEL0, initial=(1.0,)),
        ModelConfig(l=2, beta=0.7, loop_mode=LoopMode.MODEL1, initial=(1.3,)),
        ModelConfig(l=3, beta=3.0, loop_mode=LoopMode.MODEL0, initial=(3.0,)),
        ModelConfig(l=2, beta=2.0, loop_mode=LoopMode.MODEL0, initial=(2.0, 0.5, 1.5)),
    ]


def chi2_two_sample(a_rows, b_rows, min_cell: int = 10):
    """Chi-square homogeneity p-value between two samples of tuples."""
    from collections import Counter

    ca = Counter(map(tuple, np.round(np.atleast_2d(a_rows), 6)))
    cb = Counter(map(tuple, np.round(np.atleast_2d(b_rows), 6)))
    keys = sorted(set(ca) | set(cb))
    f = np.array([ca.get(k, 0) for k in keys], float)
    g = np.array([cb.get(k, 0) for k in keys], float)
    pool = (f + g) >= min_cell
    f2 = np.append(f[pool], f[~pool].sum())
    g2 = np.append(g[pool], g[~pool].sum())
    keep = (f2 + g2) > 0
    table = np.vstack([f2[keep], g2[keep]])
    if table.shape[1] < 2:
        return 1.0
    return stats.chi2_contingency(table)[1]
