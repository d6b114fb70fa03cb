from django_postural_synergies.core.ingest import save_cohort
from django_postural_synergies.management.commands._base import PipelineCommand
from django_postural_synergies.pipeline import load


class Command(PipelineCommand):
    help = "Load and validate a cohort manifest; with --out, write a normalized copy of the cohort."

    def handle(self, *args, **options):
        config = self.get_config(options)
        cohort = load(config)
        summary = {
            subject.subject_id: {
                "group": subject.group,
                "sessions": {str(number): len(trials) for number, trials in sorted(subject.sessions.items())},
                "dropped": sum(len(dropped) for dropped in subject.dropped.values()),
            }
            for subject in cohort.subjects
        }
        self.write_json(summary)
        if config.output:
            path = save_cohort(cohort, config.output)
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
