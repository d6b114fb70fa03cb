from django_postural_synergies.management.commands._base import PipelineCommand
from django_postural_synergies.pipeline import ReportBundle, cop_stage, load


class Command(PipelineCommand):
    help = "Compute center-of-pressure metrics per trial and per session."
    option_groups = ("cop",)
    needs_output = True

    def handle(self, *args, **options):
        config = self.get_config(options)
        bundle = ReportBundle(config=config, summary={})
        cop_stage(bundle, load(config))
        for path in bundle.write():
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
