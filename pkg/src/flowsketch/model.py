"""
Probabilistic utilization model of the HashFlow main table.

p_k is the probability that a bucket is still empty after the k-th round of
probing. In the multi-hash layout every round probes the whole table; in the
pipelined layout round k only sees stage k, whose size shrinks geometrically
with weight alpha.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import UsageError
from .hashflow import HashFlowSketch, Layout, pipeline_stage_sizes
from .traffic import random_flow_keys


logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ModelInput:
    m: int
    n: int
    d: int
    alpha: float | None = None

    def __post_init__(self):
        if self.m < 0:
            raise UsageError(f"flow count m must be non-negative, got {self.m}")
        if self.n < 1:
            raise UsageError(f"bucket count n must be positive, got {self.n}")
        if self.d < 1:
            raise UsageError(f"depth d must be positive, got {self.d}")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise UsageError(f"pipeline weight alpha must be in (0, 1), got {self.alpha}")

    @property
    def layout(self) -> Layout:
        return Layout.MULTIHASH if self.alpha is None else Layout.PIPELINED


@dataclass(frozen=True, slots=True)
class ModelOutput:
    empty_probs: tuple[float, ...]
    utilization: float


def multihash_model(m: int, n: int, d: int) -> ModelOutput:
    ModelInput(m, n, d)
    load = m / n
    # ln p_k = ln p_{k-1} + 1 - m/n - p_{k-1}
    log_p = -load
    probs = [math.exp(log_p)]
    for _ in range(1, d):
        log_p = log_p + 1 - load - probs[-1]
        probs.append(math.exp(log_p))
    return ModelOutput(tuple(probs), 1 - probs[-1])


def pipelined_model(m: int, n: int, d: int, alpha: float) -> ModelOutput:
    ModelInput(m, n, d, alpha)
    share = (1 - alpha) / (1 - alpha ** d)
    # -ln p_{k+1} = (-ln p_k - 1 + p_k) / alpha
    neg_log_p = m / (share * n)
    probs = [math.exp(-neg_log_p)]
    for _ in range(1, d):
        neg_log_p = (neg_log_p - 1 + probs[-1]) / alpha
        probs.append(math.exp(-neg_log_p))
    empty = sum(alpha ** k * p for k, p in enumerate(probs))
    return ModelOutput(tuple(probs), 1 - share * empty)


def evaluate(params: ModelInput) -> ModelOutput:
    if params.alpha is None:
        return multihash_model(params.m, params.n, params.d)
    return pipelined_model(params.m, params.n, params.d, params.alpha)


@dataclass(frozen=True, slots=True)
class ModelComparison:
    params: ModelInput
    model: ModelOutput
    simulated: tuple[float, ...]

    @property
    def simulated_mean(self) -> float:
        return float(np.mean(self.simulated))

    @property
    def simulated_std(self) -> float:
        return float(np.std(self.simulated))

    @property
    def gap(self) -> float:
        return self.model.utilization - self.simulated_mean


def simulate_occupancy(m: int, n: int, d: int, alpha: float | None, seed: int) -> float:
    """Feed m distinct single-packet flows into a fresh main table and measure its occupancy."""
    layout = Layout.MULTIHASH if alpha is None else Layout.PIPELINED
    sketch = HashFlowSketch(
        n,
        ancillary_cells=1,
        depth=d,
        layout=layout,
        alpha=alpha if alpha is not None else 0.5,
        seed=seed,
    )
    for key in random_flow_keys(m, np.random.default_rng(seed)):
        sketch.update(key)
    return sketch.occupancy()


def model_vs_simulation(
    m: int,
    n: int,
    d: int,
    alpha: float | None = None,
    seeds: int = 10,
    parallelism: int = 1,
    base_seed: int = 1,
) -> ModelComparison:
    if seeds < 1:
        raise UsageError(f"at least one simulation seed is needed, got {seeds}")
    params = ModelInput(m, n, d, alpha)
    if alpha is not None:
        pipeline_stage_sizes(n, d, alpha)

    run_seeds = [base_seed + i for i in range(seeds)]
    logger.info(f"Simulating {params.layout} m={m} n={n} d={d} alpha={alpha} over {seeds} seeds")
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            samples = list(pool.map(simulate_occupancy, *zip(*[(m, n, d, alpha, s) for s in run_seeds])))
    else:
        samples = [simulate_occupancy(m, n, d, alpha, s) for s in run_seeds]

    comparison = ModelComparison(params, evaluate(params), tuple(samples))
    logger.info(
        f"{params.layout} d={d}: model {comparison.model.utilization:.4f}, "
        f"simulated {comparison.simulated_mean:.4f} ± {comparison.simulated_std:.4f}"
    )
    return comparison


MODEL_CSV_COLUMNS = (
    "layout", "m", "n", "d", "alpha", "k", "p_k", "utilization", "simulated_mean", "simulated_std",
)


def model_rows(params: ModelInput, comparison: ModelComparison | None = None) -> list[dict]:
    """One CSV row per round k; simulation columns stay empty without a comparison."""
    output = comparison.model if comparison else evaluate(params)
    rows = []
    for k, p in enumerate(output.empty_probs, start=1):
        rows.append(dict(
            layout=str(params.layout),
            m=params.m,
            n=params.n,
            d=params.d,
            alpha=params.alpha,
            k=k,
            p_k=p,
            utilization=output.utilization,
            simulated_mean=comparison.simulated_mean if comparison else None,
            simulated_std=comparison.simulated_std if comparison else None,
        ))
    return rows
