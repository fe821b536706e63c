from flowsketch.csvio import write_rows
from flowsketch.hashflow import Layout
from flowsketch.management.base import FlowSketchCommand
from flowsketch.model import MODEL_CSV_COLUMNS, ModelInput, model_rows, model_vs_simulation
from flowsketch.settings import get_settings


class Command(FlowSketchCommand):
    help = "Evaluate the main-table utilization model, optionally against simulation"

    def add_arguments(self, parser):
        settings = get_settings()
        parser.add_argument("--m", type=int, required=True, help="Distinct flows")
        parser.add_argument("--n", type=int, required=True, help="Main-table buckets")
        parser.add_argument("--d", type=int, default=settings["DEPTH"], help="Depth")
        parser.add_argument("--alpha", type=float, default=settings["ALPHA"], help="Pipeline weight")
        parser.add_argument(
            "--layout", choices=("multihash", "pipelined", "both"), default=settings["LAYOUT"],
        )
        parser.add_argument("--seeds", type=int, default=0, help="Simulation runs; 0 skips simulation")
        parser.add_argument("--parallelism", type=int, default=settings["PARALLELISM"])
        parser.add_argument("--out", help="CSV output, stdout when omitted")

    def handle(self, *args, **options):
        if options["layout"] == "both":
            layouts = [Layout.MULTIHASH, Layout.PIPELINED]
        else:
            layouts = [Layout(options["layout"])]

        rows = []
        for layout in layouts:
            alpha = options["alpha"] if layout is Layout.PIPELINED else None
            params = ModelInput(options["m"], options["n"], options["d"], alpha)
            comparison = None
            if options["seeds"]:
                comparison = model_vs_simulation(
                    params.m, params.n, params.d, alpha,
                    seeds=options["seeds"],
                    parallelism=options["parallelism"],
                    base_seed=get_settings()["SEED"],
                )
            rows.extend(model_rows(params, comparison))

        write_rows(rows, MODEL_CSV_COLUMNS, options["out"], self.stdout)
