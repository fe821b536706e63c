from pydantic import ValidationError

from flowsketch.csvio import write_ground_truth, write_trace
from flowsketch.exceptions import ConfigurationError
from flowsketch.management.base import FlowSketchCommand
from flowsketch.settings import get_settings
from flowsketch.traffic import PRESETS, SyntheticSpec, generate_trace, summarize_truth


class Command(FlowSketchCommand):
    help = "Generate a seeded synthetic Zipf trace as ts,src,dst,sport,dport,proto CSV"

    def add_arguments(self, parser):
        parser.add_argument("--flows", type=int, help="Number of distinct flows")
        parser.add_argument("--zipf", type=float, help="Zipf exponent s")
        parser.add_argument("--cap", type=int, help="Largest flow size in packets")
        parser.add_argument("--seed", type=int, help="Defaults to FLOWSKETCH_SEED or 1")
        parser.add_argument("--preset", choices=sorted(PRESETS))
        parser.add_argument("--interleaving", choices=("shuffled", "sorted"))
        parser.add_argument("--out", help="Trace CSV, stdout when omitted")
        parser.add_argument("--truth-out", help="Also write the ground truth as src,dst,sport,dport,proto,count")

    def handle(self, *args, **options):
        overrides = dict(
            flow_count=options["flows"],
            zipf_exponent=options["zipf"],
            max_flow_size=options["cap"],
            seed=options["seed"] if options["seed"] is not None else get_settings()["SEED"],
            interleaving=options["interleaving"],
        )
        overrides = {key: value for key, value in overrides.items() if value is not None}
        try:
            if options["preset"]:
                spec = SyntheticSpec.from_preset(options["preset"], **overrides)
            else:
                spec = SyntheticSpec(**overrides)
        except ValidationError as ex:
            raise ConfigurationError(f"invalid trace parameters: {ex}") from ex

        events, truth = generate_trace(spec)
        write_trace(events, options["out"], self.stdout)
        if options["truth_out"]:
            write_ground_truth(truth, options["truth_out"])

        summary = summarize_truth(truth)
        self.stderr.write(self.style.SUCCESS(
            f"{summary.flows} flows, {summary.packets} packets, max flow {summary.max_flow_size}, "
            f"mean {summary.mean_flow_size:.2f}, top 10% carry {summary.top10_share:.1%}"
        ))
