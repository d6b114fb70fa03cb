from django.core.management.base import CommandError

from django_postural_synergies.management.commands._base import SynergyCommand
from django_postural_synergies.mixins import DataArtifact
from django_postural_synergies.simulator.cohort import Scenario, calibrate_rig, generate_synthetic_cohort, load_scenario


class Command(SynergyCommand):
    help = "Simulate the cable-robot protocol: calibrate perturbation thresholds or generate a synthetic cohort."

    def add_arguments(self, parser):
        parser.add_argument("action", choices=("calibrate", "run"))
        parser.add_argument("--scenario", help="scenario JSON (default: built-in 4 vs 8 synergy scenario)")
        parser.add_argument("--out", dest="output", help="output directory")
        parser.add_argument("--seed", type=int, help="root seed (default: the scenario's seed)")

    def handle(self, *args, **options):
        scenario = load_scenario(options["scenario"]) if options["scenario"] else Scenario()
        seed = scenario.seed if options["seed"] is None else options["seed"]
        if options["action"] == "calibrate":
            results = {direction.value: result for direction, result in calibrate_rig(scenario.rig).items()}
            self.write_json(results)
            if options["output"]:
                path = DataArtifact("calibration", results, {"seed": seed}).write(options["output"])
                self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
            return
        if not options["output"]:
            raise CommandError("sim run needs --out")
        cohort, _ = generate_synthetic_cohort(scenario, directory=options["output"], seed=seed)
        self.stdout.write(self.style.SUCCESS(
            f"Simulated {len(cohort)} trials for {len(cohort.subjects)} subjects into {options['output']}"
        ))
