import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from rollout.catalog import (
    Catalog,
    DegenerateCustomerError,
    Recommendation,
    RelevancePair,
    normalized_utility,
    rating_distance_scores,
    synthetic_pair,
    top_k,
    utility,
)

rows = arrays(np.float64, st.integers(1, 25), elements=st.floats(0, 10, allow_nan=False))
# exact float ranking needs values that a transform cannot round together
coarse_rows = arrays(np.float64, st.integers(1, 25), elements=st.integers(0, 50).map(float))


def test_top_k_strict_order():
    assert sorted(top_k([0.9, 0.8, 0.1, 0.2], 2).tolist()) == [0, 1]


def test_top_k_ties_go_to_lower_index():
    assert top_k([0.5, 0.5, 0.5, 0.5], 2).tolist() == [0, 1]
    assert top_k([0.1, 0.7, 0.7, 0.7], 2).tolist() == [1, 2]


def test_top_k_matches_full_sort():
    rng = np.random.default_rng(3)
    row = rng.random(20)
    ranked = sorted(range(20), key=lambda s: (-row[s], s))
    assert top_k(row, 5).tolist() == ranked[:5]


def test_top_k_rejects_oversized_k():
    with pytest.raises(ValueError):
        top_k([1.0, 2.0], 3)


def test_utility_sums_recommended_scores():
    assert utility(Recommendation(0, [0, 1]), [0.9, 0.8, 0.3]) == pytest.approx(1.7)
    assert utility(Recommendation(0, [0]), [0.5]) == 0.5


def test_utility_matches_naive_sum():
    rng = np.random.default_rng(11)
    row = rng.random(30)
    items = rng.choice(30, 7, replace=False)
    expected = 0.0
    for s in items:
        expected += row[s]
    assert utility(Recommendation(0, items), row) == pytest.approx(expected, abs=1e-12)


def test_normalized_utility_examples():
    row = [4.0, 3.0, 2.0, 1.0]
    assert normalized_utility(top_k(row, 2), row) == 1.0
    assert normalized_utility(Recommendation(0, [2, 3]), row, 2) == pytest.approx(3 / 7)


def test_normalized_utility_random_matches_ratio():
    rng = np.random.default_rng(5)
    row = rng.random(15)
    rec = Recommendation(0, rng.choice(15, 4, replace=False))
    expected = utility(rec, row) / utility(Recommendation(0, top_k(row, 4)), row)
    assert normalized_utility(rec, row, 4) == pytest.approx(expected, rel=1e-15)


def test_zero_relevance_customer_is_always_satisfied():
    assert normalized_utility([0, 1], np.zeros(4)) == 1.0


def test_negative_best_utility_is_degenerate():
    with pytest.raises(DegenerateCustomerError):
        normalized_utility([0], [-1.0, -2.0])


@given(rows, st.data())
def test_top_k_set_scores_one(row, data):
    k = data.draw(st.integers(1, row.size))
    if row[top_k(row, k)].sum() > 0:
        assert normalized_utility(top_k(row, k), row) == 1.0


@given(rows, st.data())
def test_normalized_utility_in_unit_interval(row, data):
    k = data.draw(st.integers(1, row.size))
    items = data.draw(st.lists(st.integers(0, row.size - 1), min_size=k, max_size=k, unique=True))
    value = normalized_utility(items, row)
    assert 0.0 <= value <= 1.0 + 1e-12


@given(rows, st.data())
def test_top_k_invariant_under_power_of_two_scaling(row, data):
    k = data.draw(st.integers(1, row.size))
    assert top_k(row, k).tolist() == top_k(np.ldexp(row, 5), k).tolist()


@given(coarse_rows, st.data())
def test_top_k_invariant_under_monotone_transform(row, data):
    k = data.draw(st.integers(1, row.size))
    assert top_k(row, k).tolist() == top_k(np.exp(row / 10) * 3 + row**3, k).tolist()


def test_rating_distance_formula():
    pair = rating_distance_scores([4.0], [[2.0]])
    assert pair.v_new[0, 0] == 2.0
    assert pair.v_old[0, 0] == 4.0


def test_unit_distance_keeps_old_scores():
    ratings = np.array([1.0, 3.5, 2.0])
    pair = rating_distance_scores(ratings, np.ones((4, 3)))
    np.testing.assert_array_equal(pair.v_new, pair.v_old)


def test_rating_distance_elementwise():
    rng = np.random.default_rng(2)
    ratings = rng.random(3) * 5
    dist = rng.random((3, 3)) + 0.1
    pair = rating_distance_scores(ratings, dist)
    for u in range(3):
        for s in range(3):
            assert pair.v_old[u, s] == ratings[s]
            assert pair.v_new[u, s] == ratings[s] / dist[u, s]


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_rating_distance_rejects_non_positive_distance(bad):
    with pytest.raises(ValueError):
        rating_distance_scores([1.0, 2.0], [[1.0, bad]])


def test_synthetic_pair_guards_and_determinism():
    with pytest.raises(ValueError):
        synthetic_pair(0, 5, 1)
    _, a = synthetic_pair(10, 4, 9)
    _, b = synthetic_pair(10, 4, 9)
    assert a.v_old.tobytes() == b.v_old.tobytes()
    assert a.v_new.tobytes() == b.v_new.tobytes()


def test_synthetic_pair_range():
    catalog, pair = synthetic_pair(100, 20, 7)
    assert pair.shape == (100, 20)
    assert catalog.n_items == 20
    for v in (pair.v_old, pair.v_new):
        assert v.min() >= 0.0 and v.max() < 1.0


def test_relevance_pair_validation():
    with pytest.raises(ValueError):
        RelevancePair(np.zeros((2, 3)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        RelevancePair(np.array([[np.nan]]), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        RelevancePair(np.array([[-0.1]]), np.zeros((1, 1)))


def test_catalog_invariants():
    with pytest.raises(ValueError):
        Catalog(["a", "a"], ["x"])
    with pytest.raises(ValueError):
        Catalog(["a"], ["x", "y"], producer_of={"x": "p"})
    cat = Catalog(["a"], ["x", "y", "z"], producer_of={"x": "q", "y": "p", "z": "q"})
    ids, groups = cat.producer_index()
    assert ids == ["p", "q"]
    assert groups.tolist() == [1, 0, 1]


def test_recommendation_rejects_duplicates():
    with pytest.raises(ValueError):
        Recommendation(0, [1, 1])
