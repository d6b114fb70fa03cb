import argparse
import json
import logging

from django.core.management.base import BaseCommand, CommandError

from django_postural_synergies.exceptions import SynergyException
from django_postural_synergies.pipeline import PHASE_BOTH, PipelineConfig
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.synergy.utils import N_AUTO

VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}

# (flag, PipelineConfig field, type, settings key of the default, help); a type of None marks a switch
PIPELINE_OPTIONS = {
    "filter": (
        ("--band-low", "band_low", float, "BAND_LOW", "band-pass lower edge, Hz"),
        ("--band-high", "band_high", float, "BAND_HIGH", "band-pass upper edge, Hz"),
        ("--envelope-cutoff", "envelope_cutoff", float, "ENVELOPE_CUTOFF", "envelope low-pass cutoff, Hz"),
        ("--filter-order", "filter_order", int, "FILTER_ORDER", "Butterworth order (even)"),
    ),
    "bins": (
        ("--vpr-threshold", "vpr_threshold", float, "VPR_THRESHOLD", "VPR3 offset threshold as a fraction of peak"),
        ("--normalize-per-session", "normalize_per_session", None, "NORMALIZE_PER_SESSION",
         "normalize each session separately instead of each subject"),
    ),
    "synergy": (
        ("--criterion", "criterion", float, "VAF_CRITERION", "VAF criterion in percent"),
        ("--restarts", "restarts", int, "NMF_RESTARTS", "random restarts per factorization"),
        ("--max-iter", "max_iter", int, "NMF_MAX_ITER", "iteration cap per restart"),
        ("--tol", "tol", float, "NMF_TOL", "relative error change that stops a restart"),
        ("--workers", "workers", int, "NMF_WORKERS", "threads running restarts"),
        ("--pooling", "pooling", str, "POOLING", "pooled or per_subject"),
        ("--per-synergy-vaf", "per_synergy_vaf", str, "PER_SYNERGY_VAF", "rank1 or incremental"),
    ),
    "cop": (
        ("--cop-reference", "cop_reference", str, "COP_REFERENCE", "mean or start"),
        ("--load-threshold", "load_threshold", float, "LOAD_THRESHOLD", "plate load below which COP is invalid, N"),
    ),
}


class CommaSeparated(argparse.Action):
    """Collects values given as separate words, comma-separated, or both into one flat list."""

    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, [item for value in values for item in value.split(",") if item])


class SynergyCommand(BaseCommand):
    """Translates domain errors into CommandError and maps --verbosity onto the package logger."""

    def create_parser(self, prog_name, subcommand, **kwargs):
        # no prefix matching: --n must never resolve to another long option
        return super().create_parser(prog_name, subcommand, allow_abbrev=False, **kwargs)

    def execute(self, *args, **options):
        level = VERBOSITY_LEVELS.get(options.get("verbosity", 1), logging.DEBUG)
        logging.getLogger("django_postural_synergies").setLevel(level)
        try:
            return super().execute(*args, **options)
        except SynergyException as exc:
            raise CommandError(str(exc))

    def write_json(self, data):
        self.stdout.write(json.dumps(data, cls=synergy_settings.JSON_ENCODER, indent=2, sort_keys=True))


class PipelineCommand(SynergyCommand):
    """Shared pipeline flags; a flag overrides the --config file, which overrides the settings defaults."""
    option_groups = ()
    needs_output = False

    def add_arguments(self, parser):
        parser.add_argument("--manifest", help="cohort manifest JSON")
        parser.add_argument("--out", dest="output", required=self.needs_output, help="output directory")
        parser.add_argument("--config", help="JSON file with pipeline options")
        parser.add_argument("--seed", type=int, help=f"random seed (default: {synergy_settings.SEED})")
        for group in self.option_groups:
            for flag, dest, kind, setting, text in PIPELINE_OPTIONS[group]:
                text = f"{text} (default: {getattr(synergy_settings, setting)})"
                if kind is None:
                    parser.add_argument(flag, dest=dest, action="store_const", const=True, help=text)
                else:
                    parser.add_argument(flag, dest=dest, type=kind, help=text)
        if "bins" in self.option_groups:
            parser.add_argument("--include-bk", dest="include_bk", action="store_const", const=True,
                                help=f"add the background bin to every matrix (default: {synergy_settings.INCLUDE_BK})")
            parser.add_argument("--exclude-bk", dest="include_bk", action="store_const", const=False,
                                help="leave the background bin out")
        if "synergy" in self.option_groups:
            parser.add_argument("--n", "--n-syn", dest="n",
                                help=f"number of synergies, or '{N_AUTO}' to select it by VAF (default: {N_AUTO})")
            parser.add_argument("--phase", choices=("APR", "VPR", PHASE_BOTH),
                                help=f"phases to factorize (default: {PHASE_BOTH})")

    def get_config(self, options) -> PipelineConfig:
        names = set(PipelineConfig.field_names())
        overrides = {name: value for name, value in options.items() if name in names and value is not None}
        if options.get("config"):
            return PipelineConfig.from_file(options["config"], **overrides)
        return PipelineConfig(**overrides)
