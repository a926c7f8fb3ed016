import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from shrinkcov.estimators import SampleSet


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_orthogonal(rng, p):
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


def random_psd(rng, p, rank=None):
    rank = p if rank is None else rank
    a = rng.standard_normal((p, rank))
    return a @ a.T


@st.composite
def sample_sets(draw, min_p=2, max_p=12, max_n=15):
    p = draw(st.integers(min_p, max_p))
    n = draw(st.integers(1, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    # anisotropic scales so samples are not near-spherical by accident
    scales = np.exp(rng.uniform(-1.5, 1.5, size=p))
    return SampleSet(scales[:, None] * rng.standard_normal((p, n)))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
