from cli.base import InferenceCommand
from cli.constants import BOUND_DIGITS, EXIT_USAGE
from robustness.bounds import TvBoundInputs, sequence_tv_bound


class Command(InferenceCommand):
    help = "Print the type-I inflation bound of the estimated-null test."

    def add_arguments(self, parser):
        parser.add_argument("--t", type=int, required=True, help="Number of steps.")
        parser.add_argument("--n", type=int, required=True)
        parser.add_argument("--N", dest="N", type=int, required=True)
        parser.add_argument("--M1", type=int, required=True, help="Labeled null samples per step.")
        parser.add_argument("--M2", type=int, required=True, help="Unlabeled null samples per step.")
        parser.add_argument("--delta", type=float, required=True)

    def handle(self, *args, **options):
        if not 0.0 < options["delta"] < 1.0:
            self.fail(f"--delta must lie in (0, 1), got {options['delta']}.", EXIT_USAGE)
        inputs = TvBoundInputs(t=options["t"], n=options["n"], N=options["N"],
                               M1=options["M1"], M2=options["M2"], delta=options["delta"])
        self.stdout.write(f"{sequence_tv_bound(inputs):.{BOUND_DIGITS}g}")
