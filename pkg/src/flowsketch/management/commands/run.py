import logging

from flowsketch.bench.schemas import load_experiment, row_sort_key
from flowsketch.bench.services import ExperimentService
from flowsketch.csvio import write_results
from flowsketch.management.base import FlowSketchCommand


logger = logging.getLogger(__name__)


class Command(FlowSketchCommand):
    help = "Run a single experiment described by a flat key = value config file"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Experiment config file")
        parser.add_argument("--out", help="Result CSV, stdout when omitted")

    def handle(self, *args, **options):
        config = load_experiment(options["config"])
        report = ExperimentService.run_experiment(config)
        write_results(sorted(report.to_rows(), key=row_sort_key), options["out"], self.stdout)
        logger.info(
            f"{report.costs.packets} packets in {report.wall_time:.2f}s "
            f"({report.packets_per_second:.0f} packets/s, informational)"
        )
