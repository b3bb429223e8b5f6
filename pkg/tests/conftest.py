import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from calimetr.core import make_set  # noqa: E402


@st.composite
def prob_rows(draw, n=None, k=None, min_n=1, max_n=20, min_k=2, max_k=4):
    """(probs, labels) with rows drawn from softmax of bounded logits; one-hot-ish rows included."""
    k = draw(st.integers(min_k, max_k)) if k is None else k
    n = draw(st.integers(min_n, max_n)) if n is None else n
    seed = draw(st.integers(0, 2**32 - 1))
    scale = draw(st.sampled_from([0.1, 1.0, 3.0, 30.0]))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, k)) * scale
    z -= z.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    labels = rng.integers(0, k, n)
    return p, labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def four_set():
    # instance 2 is the only misclassification
    probs = [[0.9, 0.1], [0.6, 0.4], [0.3, 0.7], [0.8, 0.2]]
    return make_set([0, 0, 0, 0], probs=probs)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
