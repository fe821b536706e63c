"""
The four measurement applications: flow record report (FSC), flow size
estimation (ARE), heavy hitter detection (F1, ARE) and cardinality (RE).
"""
from dataclasses import dataclass
from typing import Callable, Collection, Iterable, Mapping

import numpy as np

from flowsketch.core import FlowKey, FlowRecord
from flowsketch.exceptions import UsageError
from flowsketch.traffic import GroundTruth


Estimator = Callable[[FlowKey], int] | Mapping[FlowKey, int]


@dataclass(frozen=True, slots=True)
class HeavyHitterScore:
    precision: float
    recall: float
    f1: float


def compute_fsc(reported: Iterable[FlowRecord], truth: GroundTruth) -> float:
    """Share of true flows with a correct record; duplicate keys count once."""
    if not truth.total_flows:
        return 0.0
    correct = {record.key for record in reported if record.key in truth.flows}
    return len(correct) / truth.total_flows


def compute_are(estimator: Estimator, truth: GroundTruth, over: Collection[FlowKey] | None = None) -> float:
    keys = list(truth.flows if over is None else over)
    if not keys:
        raise UsageError("ARE over an empty flow set")
    estimate = estimator.get if isinstance(estimator, Mapping) else estimator

    real = np.empty(len(keys), dtype=np.float64)
    estimated = np.empty(len(keys), dtype=np.float64)
    for i, key in enumerate(keys):
        size = truth.flows.get(key, 0)
        if size < 1:
            raise UsageError(f"flow {key} has no true size")
        real[i] = size
        estimated[i] = estimate(key) or 0
    return float(np.mean(np.abs(estimated / real - 1)))


def detect_heavy_hitters(reported: Iterable[FlowRecord], threshold: int) -> set[FlowKey]:
    if threshold < 1:
        raise UsageError(f"heavy-hitter threshold must be at least 1, got {threshold}")
    return {record.key for record in reported if record.count > threshold}


def true_heavy_hitters(truth: GroundTruth, threshold: int) -> set[FlowKey]:
    return {key for key, size in truth.flows.items() if size > threshold}


def compute_f1(reported_hh: set[FlowKey], truth: GroundTruth, threshold: int) -> HeavyHitterScore:
    real = true_heavy_hitters(truth, threshold)
    correct = len(reported_hh & real)
    if reported_hh:
        precision = correct / len(reported_hh)
    else:
        precision = 1.0 if not real else 0.0
    recall = correct / len(real) if real else 1.0
    if precision + recall == 0:
        return HeavyHitterScore(precision, recall, 0.0)
    return HeavyHitterScore(precision, recall, 2 * precision * recall / (precision + recall))


def compute_re(estimate: float, true_n: int) -> float:
    if true_n < 1:
        raise UsageError(f"true flow count must be at least 1, got {true_n}")
    return abs(estimate / true_n - 1)
