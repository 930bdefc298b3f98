from django.conf import settings

from classifiers.classifier_kind import ClassifierKind
from classifiers.constants import DEFAULT_TAU
from cli.base import InferenceCommand
from cli.constants import EXIT_ACCEPTANCE, ORACLE_DEFAULT_NULLS, ORACLE_DIGITS, ORACLE_KINDS, VALIDITY_ORACLES
from core.distributions import joint_from_regime
from core.shift_regime import ShiftRegime
from harness.config import DEFAULT_CLASSIFIERS
from harness.oracles import brute_force_mean_e, expected_k, population_mean_e, ppi_mean_payoff


class Command(InferenceCommand):
    help = "Print an exact null expectation computed by enumeration."

    def add_arguments(self, parser):
        parser.add_argument("kind", choices=ORACLE_KINDS)
        parser.add_argument("--regime", default=ShiftRegime.LABEL_SHIFT.value,
                            choices=[r.value for r in ShiftRegime])
        parser.add_argument("--classifier", choices=[k.value for k in ClassifierKind])
        parser.add_argument("--gamma", type=float, default=1.0)
        parser.add_argument("--null", nargs=3, type=float, metavar="P",
                            help="Null parameters of the regime (theta, conditional at 0, conditional at 1).")
        parser.add_argument("--n", type=int, default=1)
        parser.add_argument("--N", dest="N", type=int, default=1, help="Unlabeled points (PPI: slice length).")
        parser.add_argument("--M", dest="M", type=int, default=1)
        parser.add_argument("--tau", type=float, default=DEFAULT_TAU)
        parser.add_argument("--lam", type=float, default=0.3)
        parser.add_argument("--epsilon", type=float, default=0.5)
        parser.add_argument("--one-sided", action="store_true")

    def handle(self, *args, **options):
        regime = ShiftRegime.parse(options["regime"])
        null_dist = joint_from_regime(regime, options["null"] or ORACLE_DEFAULT_NULLS[regime.value])
        classifier = ClassifierKind.parse(options["classifier"] or DEFAULT_CLASSIFIERS[regime])
        kind = options["kind"]
        common = dict(n=options["n"], N=options["N"], tau=options["tau"])

        if kind == "imputed":
            value = brute_force_mean_e(regime, null_dist, classifier, options["gamma"], M=options["M"], **common)
        elif kind == "expected-k":
            value = expected_k(regime, null_dist, classifier, options["gamma"], **common)
        elif kind == "population":
            value = population_mean_e(regime, null_dist, classifier, options["gamma"], **common)
        else:
            value = ppi_mean_payoff(null_dist, options["lam"], options["epsilon"], classifier=classifier,
                                    slice_size=options["N"], one_sided=options["one_sided"], tau=options["tau"])
        self.stdout.write(f"{value:.{ORACLE_DIGITS}f}")

        if kind in VALIDITY_ORACLES and abs(value - 1.0) > settings.ORACLE_TOLERANCE:
            self.fail(f"Exact null expectation {value!r} differs from 1 by more than "
                      f"{settings.ORACLE_TOLERANCE}.", EXIT_ACCEPTANCE)
