from pathlib import Path

from django.conf import settings

from cli.base import InferenceCommand, add_experiment_arguments, experiment_from_options, workers_from_options
from harness.runner import PowerCurve, experiment_metadata, run_trials, traces_frame
from harness.utils import build_manifest, output_directory, write_manifest, write_power_curves, write_traces


class Command(InferenceCommand):
    help = "Run a Monte-Carlo experiment and write its power curves and manifest."

    def add_arguments(self, parser):
        add_experiment_arguments(parser)
        parser.add_argument("--null", action="store_true", help="Draw the data from the null instead.")
        parser.add_argument("--traces", action="store_true", help="Also write per-step e-values of every trial.")

    def handle(self, *args, **options):
        cfg = experiment_from_options(options)
        if options["null"]:
            cfg = cfg.for_null_data()
        workers = workers_from_options(options)
        directory = output_directory(
            options["output"] or Path(settings.SIMULATION_OUTPUT_DIR) / f"{cfg.name}-{cfg.config_hash()}")

        traces = run_trials(cfg, workers=workers)
        curve = PowerCurve.from_traces(traces, metadata=experiment_metadata(cfg))
        for path in write_power_curves(curve, directory):
            self.stdout.write(f"wrote {path}")
        if options["traces"]:
            self.stdout.write(f"wrote {write_traces(traces_frame(traces), directory)}")
        write_manifest(build_manifest(cfg, curve, workers, bound=cfg.tv_bound()), directory)

        for name in curve.processes:
            self.stdout.write(f"{name:<16} final rejection rate {curve.final_rate(name):.4f}"
                              f"  mean e {curve.e_value_summary[name]['mean_e_value']:.4f}")
        self.stdout.write(self.style.SUCCESS(f"results in {directory}"))
