"""
Experiment services: a single run, a grid of runs, and the tidy report
aggregation used for plotting.
"""
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from flowsketch.baselines import CountMinSketch, FlowRadarSketch
from flowsketch.exceptions import TraceInputError, UsageError
from flowsketch.settings import get_settings
from flowsketch.traffic import GroundTruth, SyntheticSpec, TraceEvent, generate_trace, parse_trace, select_flows

from .collectors import build_collector
from .metrics import compute_are, compute_f1, compute_fsc, compute_re, detect_heavy_hitters, true_heavy_hitters
from .schemas import CostCounters, ExperimentConfig, MetricsReport, ThresholdMetrics, error_row, row_sort_key


logger = logging.getLogger(__name__)


class ExperimentService:
    """Service running one experiment end to end."""

    @staticmethod
    def load_trace(config: ExperimentConfig) -> tuple[list[TraceEvent], GroundTruth]:
        if config.trace_path is not None:
            events = parse_trace(config.trace_path)
        else:
            events, _ = generate_trace(config.synthetic_spec())
        return select_flows(events, config.n_flows, config.random_selection, config.seed)

    @staticmethod
    def run_experiment(config: ExperimentConfig) -> MetricsReport:
        collector = build_collector(config)
        events, truth = ExperimentService.load_trace(config)
        logger.info(
            f"Running {config.algorithm_label} on {config.trace_label}: "
            f"{truth.total_flows} flows, {truth.total_packets} packets, {config.budget_bytes} bytes"
        )

        update = collector.update
        started = time.perf_counter()
        for event in events:
            update(event.key)
        wall_time = time.perf_counter() - started

        records = collector.report()
        estimate = collector.cardinality()
        if estimate.overflow:
            logger.warning(f"{config.algorithm_label}: cardinality estimate overflowed")

        heavy_hitters = []
        for threshold in config.thresholds:
            detected = detect_heavy_hitters(records, threshold)
            score = compute_f1(detected, truth, threshold)
            real = true_heavy_hitters(truth, threshold)
            correct = detected & real
            heavy_hitters.append(ThresholdMetrics(
                threshold=threshold,
                precision=score.precision,
                recall=score.recall,
                f1=score.f1,
                heavy_hitter_are=compute_are(collector.query, truth, over=correct) if correct else None,
                reported=len(detected),
                real=len(real),
            ))

        report = MetricsReport(
            config=config,
            fsc=compute_fsc(records, truth),
            are_all_flows=compute_are(collector.query, truth),
            cardinality_estimate=estimate.value,
            cardinality_overflow=estimate.overflow,
            cardinality_re=compute_re(estimate.value, truth.total_flows),
            heavy_hitters=heavy_hitters,
            costs=CostCounters.from_counter(collector.counter),
            records_reported=len(records),
            fully_decoded=collector.decode().fully_decoded if isinstance(collector, FlowRadarSketch) else None,
            wall_time=wall_time,
            packets_per_second=truth.total_packets / wall_time if wall_time > 0 else 0.0,
        )
        logger.info(
            f"{config.algorithm_label} seed={config.seed}: fsc={report.fsc:.4f} "
            f"are={report.are_all_flows:.4f} re={report.cardinality_re:.4f}"
        )
        return report


@dataclass
class GridResult:
    tasks: list = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    @property
    def reports(self) -> list[MetricsReport]:
        return [task.report for task in self.tasks if task.report is not None]


class GridService:
    """Service running independent experiments, one collector per worker."""

    @staticmethod
    def run_grid(configs: list[ExperimentConfig], parallelism: int | None = None) -> GridResult:
        from flowsketch.tasks import run_experiment_task

        parallelism = parallelism or get_settings()["PARALLELISM"]
        indexed = list(enumerate(configs))
        logger.info(f"Running grid of {len(indexed)} experiments with parallelism {parallelism}")

        if parallelism > 1 and len(indexed) > 1:
            with ProcessPoolExecutor(max_workers=parallelism) as pool:
                tasks = list(pool.map(run_experiment_task, *zip(*indexed)))
        else:
            tasks = [run_experiment_task(index, config) for index, config in indexed]

        rows = []
        for task in tasks:
            if task.report is not None:
                rows.extend(task.report.to_rows())
            else:
                rows.append(error_row(task.config, task.error))
        rows.sort(key=row_sort_key)

        failed = sum(1 for task in tasks if task.report is None)
        if failed:
            logger.warning(f"{failed} of {len(tasks)} grid experiments failed")
        return GridResult(tasks, rows)


FIGURE_METRICS = {
    "fsc": ("fsc",),
    "are": ("are",),
    "re": ("re",),
    "f1": ("precision", "recall", "f1"),
    "hh-are": ("hh_are",),
    "cost": ("hash_ops_mean", "hash_ops_max", "mem_accesses_mean", "mem_accesses_max"),
}

GROUP_COLUMNS = ["algorithm", "trace", "n_flows", "budget_bytes", "metric", "threshold"]


class ReportService:
    """Service aggregating result CSVs into one tidy table per figure."""

    @staticmethod
    def figure(path, fig: str) -> pd.DataFrame:
        if fig not in FIGURE_METRICS:
            raise UsageError(f"unknown figure '{fig}', expected one of {', '.join(FIGURE_METRICS)}")
        path = Path(path)
        if not path.exists():
            raise TraceInputError("result file not found", path=path)

        results = pd.read_csv(path, dtype={"value": str})
        missing = set(GROUP_COLUMNS + ["value", "seed"]) - set(results.columns)
        if missing:
            raise TraceInputError(f"missing columns {', '.join(sorted(missing))}", path=path, line=1)

        selected = results[results["metric"].isin(FIGURE_METRICS[fig])].copy()
        selected["value"] = pd.to_numeric(selected["value"], errors="coerce")
        selected = selected.dropna(subset=["value"])
        selected["threshold"] = selected["threshold"].astype("Int64")

        table = (
            selected.groupby(GROUP_COLUMNS, dropna=False)["value"]
            .agg(mean="mean", std="std", runs="count")
            .reset_index()
        )
        table["std"] = table["std"].fillna(0.0)
        return table.sort_values(GROUP_COLUMNS, na_position="first").reset_index(drop=True)

    @staticmethod
    def write_figure(table: pd.DataFrame, out=None, stdout=None):
        if out is None or str(out) == "-":
            (stdout or sys.stdout).write(table.to_csv(index=False, float_format="%.10g"))
        else:
            table.to_csv(out, index=False, float_format="%.10g")


def run_experiment(config: ExperimentConfig) -> MetricsReport:
    return ExperimentService.run_experiment(config)


def run_grid(configs: list[ExperimentConfig], parallelism: int | None = None) -> GridResult:
    return GridService.run_grid(configs, parallelism)


def countmin_are(
    n_flows: int,
    width: int = 2000,
    depth: int = 4,
    max_flow_size: int = 10_000,
    seed: int = 1,
) -> float:
    """ARE over every flow of a synthetic trace counted by a bare count-min sketch."""
    events, truth = generate_trace(SyntheticSpec(flow_count=n_flows, max_flow_size=max_flow_size, seed=seed))
    sketch = CountMinSketch(width, depth, seed=seed)
    for event in events:
        sketch.update(event.key)
    are = compute_are(sketch.query, truth)
    logger.info(f"count-min {depth}x{width}, {n_flows} flows: are={are:.4f}")
    return are
