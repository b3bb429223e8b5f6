import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from calimetr.core import EnsembleMisaligned, EnsemblePredictions, make_set
from calimetr.decompose import decompose, marginal


def _stack(rng, m, n, k, scale=2.0):
    z = rng.standard_normal((m, n, k)) * scale
    e = np.exp(z - z.max(-1, keepdims=True))
    return e / e.sum(-1, keepdims=True)


def test_single_member_has_no_epistemic_part():
    p = _stack(np.random.default_rng(0), 1, 50, 4)
    r = decompose(EnsemblePredictions.from_probs(p, np.zeros(50, int)))
    np.testing.assert_allclose(r.epistemic, 0.0, atol=1e-12)
    np.testing.assert_allclose(r.total, r.aleatoric, atol=1e-12)


def test_disagreeing_one_hot_members():
    ens = EnsemblePredictions.from_probs(np.array([[[1.0, 0.0]], [[0.0, 1.0]]]), [0])
    r = decompose(ens)
    assert r.aleatoric[0] == pytest.approx(0.0, abs=1e-12)
    assert r.total[0] == pytest.approx(1.0, abs=1e-12)
    assert r.epistemic[0] == pytest.approx(1.0, abs=1e-12)
    raw = decompose(ens, normalize=False)
    assert raw.total[0] == pytest.approx(math.log(2))
    assert not raw.normalized


@given(st.integers(0, 2**31), st.integers(1, 6), st.integers(2, 7))
def test_additive_and_matches_oracle(seed, m, k):
    rng = np.random.default_rng(seed)
    p = _stack(rng, m, 12, k, scale=rng.uniform(0.1, 8))
    r = decompose(EnsemblePredictions.from_probs(p, rng.integers(0, k, 12)))
    np.testing.assert_allclose(r.total, r.aleatoric + r.epistemic, atol=1e-9)
    assert (r.epistemic >= 0).all()
    for i in range(12):
        tot, alea = oracles.decomposition([list(p[j, i]) for j in range(m)])
        assert r.total[i] == pytest.approx(tot, abs=1e-9)
        assert r.aleatoric[i] == pytest.approx(alea, abs=1e-9)


def test_member_order_and_duplication_do_not_matter():
    rng = np.random.default_rng(4)
    p = _stack(rng, 3, 40, 5)
    y = rng.integers(0, 5, 40)
    base = decompose(EnsemblePredictions.from_probs(p, y))
    perm = decompose(EnsemblePredictions.from_probs(p[[2, 0, 1]], y))
    dup = decompose(EnsemblePredictions.from_probs(np.concatenate([p, p]), y))
    for other in (perm, dup):
        for a in ("total", "aleatoric", "epistemic"):
            np.testing.assert_allclose(getattr(base, a), getattr(other, a), atol=1e-12)


def test_marginal_is_member_average():
    rng = np.random.default_rng(5)
    p = _stack(rng, 4, 30, 3)
    ens = EnsemblePredictions.from_probs(p, rng.integers(0, 3, 30))
    expect = sum(m.probs for m in ens.members) / ens.m
    np.testing.assert_allclose(marginal(ens).probs, expect, atol=1e-12)
    assert set(decompose(ens).means) == {"total", "aleatoric", "epistemic"}


def test_misaligned_members_rejected():
    a = make_set([0, 1], probs=[[0.5, 0.5], [0.2, 0.8]])
    b = make_set([1, 1], probs=[[0.5, 0.5], [0.2, 0.8]])
    c = make_set([0, 1, 1], probs=[[0.5, 0.5], [0.2, 0.8], [0.1, 0.9]])
    with pytest.raises(EnsembleMisaligned):
        EnsemblePredictions((a, b))
    with pytest.raises(EnsembleMisaligned):
        EnsemblePredictions((a, c))
    with pytest.raises(EnsembleMisaligned):
        EnsemblePredictions(())
