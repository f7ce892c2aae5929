import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from services.rng import RandomSource


def test_same_seed_same_stream():
    first, second = RandomSource(7), RandomSource(7)
    assert [first.randbelow(1000) for _ in range(50)] == [second.randbelow(1000) for _ in range(50)]


def test_spawned_streams_are_reproducible_and_distinct():
    a1, b1 = RandomSource(7).spawn(2)
    a2, _ = RandomSource(7).spawn(2)
    draws_a1 = [a1.random() for _ in range(20)]
    assert draws_a1 == [a2.random() for _ in range(20)]
    assert draws_a1 != [b1.random() for _ in range(20)]


def test_describe_names_the_generator():
    description = RandomSource(11).describe()
    assert "PCG64" in description["generator"]
    assert description["entropy"] == 11


@settings(max_examples=50)
@given(st.integers(1, 500))
def test_randbelow_range(n):
    rng = RandomSource(n)
    assert all(0 <= rng.randbelow(n) < n for _ in range(100))


def test_geometric_mean_matches_stay_probability():
    rng = RandomSource(3)
    waits = np.array([rng.geometric(0.5) for _ in range(20000)])
    assert waits.min() >= 1
    assert waits.mean() == pytest.approx(2.0, abs=0.05)


def test_geometric_without_self_loops_is_one():
    rng = RandomSource(3)
    assert {rng.geometric(0.0) for _ in range(100)} == {1}
    with pytest.raises(ValueError):
        rng.geometric(1.0)


def test_weighted_index_follows_weights():
    rng = RandomSource(5)
    counts = np.bincount([rng.weighted_index([1.0, 0.0, 3.0]) for _ in range(8000)], minlength=3)
    assert counts[1] == 0
    assert counts[2] / counts.sum() == pytest.approx(0.75, abs=0.02)


def test_shuffle_is_a_permutation():
    rng = RandomSource(9)
    items = list(range(30))
    rng.shuffle(items)
    assert sorted(items) == list(range(30))
