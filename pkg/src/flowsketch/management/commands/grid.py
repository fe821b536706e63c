from flowsketch.bench.schemas import load_grid
from flowsketch.bench.services import GridService
from flowsketch.csvio import write_results
from flowsketch.management.base import FlowSketchCommand


class Command(FlowSketchCommand):
    help = "Run the cartesian product of a grid config; failed experiments become error rows"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Grid config file")
        parser.add_argument("--parallelism", type=int, help="Worker processes, defaults to PARALLELISM")
        parser.add_argument("--out", help="Result CSV, stdout when omitted")

    def handle(self, *args, **options):
        configs = load_grid(options["config"])
        result = GridService.run_grid(configs, options["parallelism"])
        write_results(result.rows, options["out"], self.stdout)

        failed = len(result.tasks) - len(result.reports)
        if failed:
            self.stderr.write(self.style.WARNING(f"{failed} of {len(result.tasks)} experiments failed"))
