from . import collectors  # registers the algorithm builders
from .schemas import CostCounters, ExperimentConfig, MetricsReport, ThresholdMetrics
from .services import ExperimentService, GridService, ReportService, run_experiment, run_grid
from .sizing import size_structures
