from cli.base import InferenceCommand
from core.distributions import phi_correlation
from harness.scenarios import paper_scenarios


class Command(InferenceCommand):
    help = "List the built-in scenarios."

    def handle(self, *args, **options):
        for name, cfg in paper_scenarios().items():
            self.stdout.write(f"{name:<40} {cfg.regime.value:<14} N={cfg.N:<4} "
                              f"phi={phi_correlation(cfg.null_dist):.3f}  {cfg.description}")
