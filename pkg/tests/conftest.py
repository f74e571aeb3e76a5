import numpy as np
import pytest

from ddakit.discriminant import SampleSet

ACCEPTANCE_LINES = []


def fd_grad(f, x, h=1e-5):
    """Central finite differences of scalar ``f`` at every entry of ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat, gflat = x.reshape(-1), g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        up = f(x)
        flat[i] = old - h
        down = f(x)
        flat[i] = old
        gflat[i] = (up - down) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    scale = max(np.max(np.abs(b)), np.max(np.abs(a)), 1e-12)
    return float(np.max(np.abs(a - b)) / scale)


def random_sample_set(rng, max_n=500, max_d=8, max_l=5, min_l=2, full_rank=True):
    n_classes = int(rng.integers(min_l, max_l + 1))
    dim = int(rng.integers(1, max_d + 1))
    lo = dim + 2 if full_rank else 1
    hi = max(lo + 1, max_n // n_classes)
    counts = rng.integers(lo, hi, n_classes)
    means = rng.normal(scale=rng.uniform(0.1, 5.0), size=(n_classes, dim))
    xs, ys = [], []
    for k, c in enumerate(counts):
        mix = rng.normal(size=(dim, dim))
        xs.append(means[k] + rng.normal(size=(c, dim)) @ mix)
        ys.append(np.full(c, k))
    return SampleSet(np.vstack(xs), np.concatenate(ys), n_classes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
