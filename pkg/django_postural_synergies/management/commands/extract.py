from django_postural_synergies.management.commands._base import PipelineCommand
from django_postural_synergies.pipeline import ReportBundle, analysed_groups, binned_stage, load, synergy_stage


class Command(PipelineCommand):
    help = "Extract synergy sets per group and phase, with VAF scans, tuning curves and matching."
    option_groups = ("filter", "bins", "synergy")
    needs_output = True

    def handle(self, *args, **options):
        config = self.get_config(options)
        cohort = load(config)
        bundle = ReportBundle(config=config, summary={})
        trial_bins = binned_stage(bundle, cohort)
        synergy_stage(bundle, trial_bins, analysed_groups(cohort))
        bundle.write()
        self.write_json(bundle.summary["synergies"])
