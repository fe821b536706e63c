import random

import pytest

from flowsketch.bench.metrics import (
    HeavyHitterScore,
    compute_are,
    compute_f1,
    compute_fsc,
    compute_re,
    detect_heavy_hitters,
    true_heavy_hitters,
)
from flowsketch.core import FlowKey, FlowRecord
from flowsketch.exceptions import UsageError
from flowsketch.traffic import GroundTruth


def key(n: int) -> FlowKey:
    return FlowKey(n, n, 1, 1, 6)


@pytest.fixture
def truth():
    # sizes 1, 2, ... 10
    return GroundTruth({key(i): i for i in range(1, 11)})


def test_fsc_counts_distinct_correct_records(truth):
    reported = [FlowRecord(key(1), 1), FlowRecord(key(1), 4), FlowRecord(key(2), 2), FlowRecord(key(99), 5)]
    assert compute_fsc(reported, truth) == pytest.approx(0.2)
    assert compute_fsc([], truth) == 0.0
    assert compute_fsc(reported, GroundTruth({})) == 0.0


def test_are_of_exact_estimates_is_zero(truth):
    assert compute_are(truth.flows, truth) == 0.0
    assert compute_are(truth.size_of, truth) == 0.0


def test_are_counts_missing_flows_as_one(truth):
    assert compute_are({}, truth) == pytest.approx(1.0)
    assert compute_are(lambda k: 0, truth) == pytest.approx(1.0)


def test_are_restricted_to_a_subset(truth):
    estimates = {key(4): 6, key(10): 5}
    assert compute_are(estimates, truth, over=[key(4), key(10)]) == pytest.approx((0.5 + 0.5) / 2)
    with pytest.raises(UsageError):
        compute_are(estimates, truth, over=[])
    with pytest.raises(UsageError, match="no true size"):
        compute_are(estimates, truth, over=[key(50)])


def test_heavy_hitters_use_strict_threshold(truth):
    assert true_heavy_hitters(truth, 8) == {key(9), key(10)}
    reported = [FlowRecord(key(8), 8), FlowRecord(key(9), 12)]
    assert detect_heavy_hitters(reported, 8) == {key(9)}
    with pytest.raises(UsageError):
        detect_heavy_hitters(reported, 0)


def test_f1_of_perfect_detection(truth):
    score = compute_f1({key(9), key(10)}, truth, 8)
    assert score == HeavyHitterScore(1.0, 1.0, 1.0)


def test_f1_mixed(truth):
    # one true positive, one false positive, one missed
    score = compute_f1({key(10), key(3)}, truth, 8)
    assert score.precision == 0.5
    assert score.recall == 0.5
    assert score.f1 == 0.5


def test_f1_edge_cases(truth):
    assert compute_f1(set(), truth, 100) == HeavyHitterScore(1.0, 1.0, 1.0)
    assert compute_f1(set(), truth, 8) == HeavyHitterScore(0.0, 0.0, 0.0)
    score = compute_f1({key(1)}, truth, 100)
    assert (score.precision, score.recall) == (0.0, 1.0)
    assert score.f1 == 0.0


def test_f1_matches_brute_force():
    rng = random.Random(5)
    truth = GroundTruth({key(i): rng.randint(1, 200) for i in range(1, 301)})
    for threshold in (10, 50, 150):
        reported = {k for k in truth.flows if rng.random() < 0.5} | {key(1000 + i) for i in range(5)}
        real = [k for k, size in truth.flows.items() if size > threshold]
        tp = sum(1 for k in reported if k in real)
        precision = tp / len(reported)
        recall = tp / len(real)
        expected = 2 * precision * recall / (precision + recall) if tp else 0.0
        assert compute_f1(reported, truth, threshold).f1 == pytest.approx(expected)


def test_relative_error():
    assert compute_re(110, 100) == pytest.approx(0.1)
    assert compute_re(90, 100) == pytest.approx(0.1)
    assert compute_re(100, 100) == 0.0
    with pytest.raises(UsageError):
        compute_re(5, 0)
