import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from calimetr.core import make_set
from calimetr.scores import (
    UnknownKind,
    brier,
    cross_entropy_instance,
    nll,
    normalized_entropy,
    score_all,
    variation_ratio,
)
from conftest import prob_rows
import oracles


@pytest.mark.parametrize("k", [2, 3, 19])
def test_entropy_extremes(k):
    assert normalized_entropy(np.full(k, 1.0 / k)) == pytest.approx(1.0, abs=1e-12)
    assert normalized_entropy(np.eye(k)[0]) == 0.0


def test_entropy_bracket_for_95_percent_top_class():
    # 95% on one of three classes leaves entropy between these two allocations
    assert normalized_entropy([0.95, 0.05, 0.0]) == pytest.approx(0.181, abs=1e-3)
    assert normalized_entropy([0.95, 0.025, 0.025]) == pytest.approx(0.212, abs=1e-3)


def test_variation_ratio_examples():
    assert variation_ratio([0.95, 0.04, 0.01]) == pytest.approx(0.05)
    assert variation_ratio([0.0, 1.0, 0.0]) == 0.0
    assert variation_ratio(np.full(4, 0.25)) == pytest.approx(0.75)


def test_cross_entropy_examples():
    assert cross_entropy_instance([1.0, 0.0], 0) == 0.0
    assert cross_entropy_instance([0.5, 0.5], 1) == pytest.approx(0.6931471805599453)
    # floor at 1e-12
    assert cross_entropy_instance([1.0, 0.0], 1) == pytest.approx(27.631021115928547)


def test_nll_examples():
    assert nll(make_set([0, 1], probs=[[1.0, 0.0], [0.0, 1.0]])) == 0.0
    assert nll(make_set([0, 0], probs=[[0.5, 0.5], [1.0, 0.0]])) == pytest.approx(0.34657359027997264)
    e = math.exp(-1)
    assert nll(make_set([0], probs=[[e, 1 - e]])) == pytest.approx(1.0)


def test_brier_examples():
    assert brier(make_set([0, 1], probs=[[1.0, 0.0], [0.0, 1.0]])) == 0.0
    assert brier(make_set([0, 1], probs=[[0.5, 0.5], [0.5, 0.5]])) == pytest.approx(0.5)
    assert brier(make_set([1], probs=[[1.0, 0.0]])) == pytest.approx(2.0)


def test_score_all_kinds(rng):
    s = make_set([0, 1, 2], probs=np.eye(3))
    assert score_all(s, "confidence").values.tolist() == [1.0, 1.0, 1.0]
    u = make_set([0, 1], probs=np.full((2, 4), 0.25))
    np.testing.assert_allclose(score_all(u, "entropy").values, 1.0)
    with pytest.raises(UnknownKind):
        score_all(s, "margin")


def test_score_all_cross_entropy_matches_loop(rng):
    z = rng.standard_normal((100, 5)) * 3
    y = rng.integers(0, 5, 100)
    s = make_set(y, logits=z)
    ref = [-math.log(max(p[l], 1e-12)) for p, l in zip(s.probs.tolist(), y.tolist())]
    np.testing.assert_allclose(score_all(s, "cross_entropy").values, ref, rtol=0, atol=1e-12)


@given(prob_rows(max_n=1, max_k=6))
def test_entropy_matches_oracle_and_permutation_invariant(data):
    p, _ = data
    row = p[0]
    assert normalized_entropy(row) == pytest.approx(oracles.entropy_norm(row.tolist()), abs=1e-12)
    assert normalized_entropy(row[::-1]) == pytest.approx(normalized_entropy(row), abs=1e-12)


@given(st.integers(2, 6), st.integers(0, 5), st.one_of(st.just(0.0), st.floats(1e-6, 1.0)))
def test_zero_uncertainty_iff_one_hot(k, hot, mix):
    hot %= k
    row = np.eye(k)[hot] * (1 - mix) + mix / k
    h, v = normalized_entropy(row), variation_ratio(row)
    one_hot = bool(np.max(row) == 1.0)
    assert (h == 0.0) == one_hot
    assert (v == 0.0) == one_hot


@given(prob_rows())
def test_nll_is_mean_cross_entropy(data):
    p, y = data
    s = make_set(y, probs=p)
    assert nll(s) == float(np.mean(score_all(s, "cross_entropy").values))
    assert brier(s) >= 0.0 and nll(s) >= 0.0
    assert 0.0 <= brier(s) <= 2.0


def test_scores_zero_exactly_for_correct_one_hot():
    s = make_set([2, 0], probs=[[0, 0, 1.0], [1.0, 0, 0]])
    assert nll(s) == 0.0 and brier(s) == 0.0
    s2 = make_set([2, 0], probs=[[0, 0.01, 0.99], [1.0, 0, 0]])
    assert nll(s2) > 0 and brier(s2) > 0
