import numpy as np
import pytest

from bsp.matrix import make_dataset, prepare


def noise_dataset(n, p, q, seed=0):
    rng = np.random.default_rng(seed)
    return prepare(make_dataset(rng.standard_normal((n, p)), rng.standard_normal((n, q))))


def pearson(a, b):
    """Scalar-loop Pearson correlation."""
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    sab = sum((a[i] - ma) * (b[i] - mb) for i in range(n))
    saa = sum((a[i] - ma) ** 2 for i in range(n))
    sbb = sum((b[i] - mb) ** 2 for i in range(n))
    return sab / (saa * sbb) ** 0.5


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
