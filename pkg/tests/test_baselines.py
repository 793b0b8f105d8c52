import numpy as np
import pytest

from rollout.baselines import cand_assign, cand_recommend, irf_recommend, irf_relevance
from rollout.catalog import synthetic_pair, top_k


def test_single_step_switches_everyone():
    a = cand_assign(7, 1, 0)
    assert a.switch_step.tolist() == [1] * 7


def test_exact_division_one_per_step():
    a = cand_assign(10, 10, 3)
    assert sorted(a.switch_step.tolist()) == list(range(1, 11))


def test_cohort_sizes_balanced_on_grid():
    for n in range(0, 25):
        for eta in range(1, 12):
            sizes = np.bincount(cand_assign(n, eta, n * 31 + eta).switch_step, minlength=eta + 1)[1:]
            assert sizes.sum() == n
            assert sizes.max() - sizes.min() <= 1


def test_switched_set_grows():
    a = cand_assign(40, 6, 1)
    prev = np.zeros(40, dtype=bool)
    for step in range(1, 7):
        now = a.switched(step)
        assert np.all(now >= prev)
        prev = now
    assert prev.all()


def test_cand_recommend_endpoints_and_mix():
    _, pair = synthetic_pair(20, 10, 5)
    a = cand_assign(20, 5, 2)
    for u in range(20):
        assert cand_recommend(u, 0, a, pair, 3).items == tuple(sorted(top_k(pair.v_old[u], 3).tolist()))
        assert cand_recommend(u, 5, a, pair, 3).items == tuple(sorted(top_k(pair.v_new[u], 3).tolist()))
        for step in range(1, 5):
            src = pair.v_new if a.switch_step[u] <= step else pair.v_old
            assert cand_recommend(u, step, a, pair, 3).items == tuple(sorted(top_k(src[u], 3).tolist()))


def test_cand_assign_accepts_sequences():
    assert cand_assign(["a", "b", "c"], 3, 0).switch_step.size == 3
    with pytest.raises(ValueError):
        cand_assign(3, 0, 0)


def test_irf_endpoints_exact():
    _, pair = synthetic_pair(6, 5, 4)
    np.testing.assert_array_equal(irf_relevance(pair, 0, 4), pair.v_old)
    np.testing.assert_array_equal(irf_relevance(pair, 4, 4), pair.v_new)


def test_irf_midpoint():
    _, pair = synthetic_pair(6, 5, 4)
    mid = irf_relevance(pair, 5, 10)
    for u in range(6):
        for s in range(5):
            assert mid[u, s] == pytest.approx((pair.v_old[u, s] + pair.v_new[u, s]) / 2, abs=1e-15)


def test_irf_recommend_matches_relevance():
    _, pair = synthetic_pair(15, 8, 6)
    for step in range(0, 5):
        rel = irf_relevance(pair, step, 4)
        for u in range(15):
            assert irf_recommend(u, step, pair, 3, 4).items == tuple(sorted(top_k(rel[u], 3).tolist()))
