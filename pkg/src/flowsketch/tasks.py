import enum
import logging
from dataclasses import dataclass

from .bench.schemas import ExperimentConfig, MetricsReport
from .bench.services import ExperimentService


class TaskStatus(enum.StrEnum):
    PENDING = "PENDING"
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"


@dataclass
class ExperimentTask:
    index: int
    config: ExperimentConfig
    status: TaskStatus = TaskStatus.PENDING
    report: MetricsReport | None = None
    error: str | None = None


def run_experiment_task(index: int, config: ExperimentConfig) -> ExperimentTask:
    """
    Runs one grid experiment; a failure is recorded on the task instead of
    aborting the grid.
    """
    task = ExperimentTask(index, config)
    try:
        task.report = ExperimentService.run_experiment(config)
        task.status = TaskStatus.SUCCESS
    except Exception as ex:
        logging.warning(f"Grid experiment {index} ({config.algorithm_label}, seed={config.seed}) failed: {ex}")
        task.status = TaskStatus.FAILURE
        task.error = f"{type(ex).__name__}: {ex}"
    return task
