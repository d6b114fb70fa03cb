from django_postural_synergies.management.commands._base import PipelineCommand
from django_postural_synergies.pipeline import run_pipeline


class Command(PipelineCommand):
    help = "Run the whole analysis and write every table, JSON report and SVG plot."
    option_groups = ("filter", "bins", "synergy", "cop")
    needs_output = True

    def handle(self, *args, **options):
        bundle = run_pipeline(self.get_config(options))
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {len(bundle.artifacts)} artifacts to {bundle.config.output} "
            f"(config hash {bundle.config.config_hash[:12]})"
        ))
