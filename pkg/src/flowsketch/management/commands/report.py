from flowsketch.bench.services import FIGURE_METRICS, ReportService
from flowsketch.management.base import FlowSketchCommand


class Command(FlowSketchCommand):
    help = "Aggregate result CSVs into a tidy mean/std table for one figure"

    def add_arguments(self, parser):
        parser.add_argument("--in", dest="input", required=True, help="Result CSV from run or grid")
        parser.add_argument("--fig", required=True, choices=tuple(FIGURE_METRICS))
        parser.add_argument("--out", help="CSV output, stdout when omitted")

    def handle(self, *args, **options):
        table = ReportService.figure(options["input"], options["fig"])
        ReportService.write_figure(table, options["out"], self.stdout)
