from django_postural_synergies.management.commands._base import CommaSeparated, PipelineCommand
from django_postural_synergies.mixins import DataArtifact
from django_postural_synergies.pipeline import ReportBundle, analysed_groups, cop_stage, load
from django_postural_synergies.stats import Alternative, Method, compare_groups, motor_performance


class Command(PipelineCommand):
    help = "Compare one motor or sway metric between two groups (Mann-Whitney U or independent t test)."
    option_groups = ("cop",)

    def add_arguments(self, parser):
        parser.add_argument("action", choices=("compare",))
        super().add_arguments(parser)
        parser.add_argument("--metric", required=True, help="performance or COP metric column, e.g. catches")
        parser.add_argument("--groups", nargs="+", action=CommaSeparated, metavar="GROUP",
                            help="the two groups, e.g. FF,NoFF (default: the cohort's groups)")
        parser.add_argument("--method", choices=[method.value for method in Method],
                            help="test to run (default: U test for motor metrics, t test otherwise)")
        parser.add_argument("--alternative", choices=[alternative.value for alternative in Alternative])

    def handle(self, *args, **options):
        config = self.get_config(options)
        cohort = load(config)
        groups = options["groups"] or [group.value for group in analysed_groups(cohort)]
        performance = motor_performance(cohort)
        if options["metric"] in performance.columns:
            table = performance
        else:
            table = cop_stage(ReportBundle(config=config, summary={}), cohort)
        result = compare_groups(table, options["metric"], groups, method=options["method"],
                                alternative=options["alternative"])
        self.write_json(result)
        if config.output:
            path = DataArtifact(f"stats_{options['metric']}", result, config.provenance).write(config.output)
            self.stdout.write(self.style.SUCCESS(f"Wrote {path}"))
