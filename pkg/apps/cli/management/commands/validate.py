from cli.base import InferenceCommand, add_experiment_arguments, experiment_from_options, workers_from_options
from cli.constants import EXIT_ACCEPTANCE
from harness.runner import rejection_summary, run_experiment
from harness.utils import build_manifest, output_directory, write_manifest, write_power_curves


class Command(InferenceCommand):
    help = "Run an experiment on null data and check every process against its type-I envelope."

    def add_arguments(self, parser):
        add_experiment_arguments(parser)

    def handle(self, *args, **options):
        cfg = experiment_from_options(options).for_null_data()
        workers = workers_from_options(options)
        curve = run_experiment(cfg, workers=workers)
        bound = cfg.tv_bound()

        failed = []
        self.stdout.write(f"{'process':<16} {'rate':>8} {'envelope':>10}")
        for name, rate, envelope, passed in rejection_summary(curve, cfg, bound=bound):
            mark = "ok" if passed else "FAIL"
            self.stdout.write(f"{name:<16} {rate:>8.4f} {envelope:>10.4f}  {mark}")
            if not passed:
                failed.append(name)
        if bound is not None:
            self.stdout.write(f"estimated-null TV bound: {bound:.6f}")

        if options["output"]:
            directory = output_directory(options["output"])
            write_power_curves(curve, directory)
            write_manifest(build_manifest(cfg, curve, workers, bound=bound), directory)

        if failed:
            self.fail(f"Rejection rate above the envelope for: {', '.join(failed)}", EXIT_ACCEPTANCE)
        self.stdout.write(self.style.SUCCESS("all processes within their envelopes"))
