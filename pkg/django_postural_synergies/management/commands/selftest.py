from django.core.management.base import CommandError

from django_postural_synergies.management.commands._base import SynergyCommand
from django_postural_synergies.selftest import CHECKS, run_selftest


class Command(SynergyCommand):
    help = "Run the synthetic closed-loop acceptance checks."

    def add_arguments(self, parser):
        parser.add_argument("checks", nargs="*", metavar="CHECK",
                            help=f"checks to run (default: all of {', '.join(CHECKS)})")
        parser.add_argument("--seeds", type=int, default=20, help="seeded runs for the recovery checks (default: 20)")

    def handle(self, *args, **options):
        unknown = sorted(set(options["checks"]) - set(CHECKS))
        if unknown:
            raise CommandError(f"Unknown checks: {', '.join(unknown)}")
        results = run_selftest(options["checks"] or None, seeds=options["seeds"])
        for result in results:
            style = self.style.SUCCESS if result.passed else self.style.ERROR
            self.stdout.write(style(f"{result.name}: {'ok' if result.passed else 'FAILED'} ({result.detail})"))
        failed = [result.name for result in results if not result.passed]
        if failed:
            raise CommandError(f"Failed checks: {', '.join(failed)}")
