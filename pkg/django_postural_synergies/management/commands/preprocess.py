from django_postural_synergies.management.commands._base import PipelineCommand
from django_postural_synergies.pipeline import ReportBundle, binned_stage, load


class Command(PipelineCommand):
    help = "Filter every trial's EMG, bin the envelopes and write binned.csv."
    option_groups = ("filter", "bins")
    needs_output = True

    def handle(self, *args, **options):
        config = self.get_config(options)
        bundle = ReportBundle(config=config, summary={})
        binned_stage(bundle, load(config))
        for path in bundle.write():
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
