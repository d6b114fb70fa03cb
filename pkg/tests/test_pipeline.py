import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from django_postural_synergies.core.types import Cohort
from django_postural_synergies.core.utils import Group, Phase
from django_postural_synergies.exceptions import FilterError, PipelineError
from django_postural_synergies.pipeline import PipelineConfig, ReportBundle, load, run_pipeline
from django_postural_synergies.simulator.cohort import generate_synthetic_cohort
from django_postural_synergies.synergy.matching import match_synergies
from tests.utils import small_scenario

FAST = {"restarts": 3, "max_iter": 1000, "tol": 1e-6}


class PipelineConfigTestCase(SimpleTestCase):
    def test_defaults(self):
        config = PipelineConfig()
        self.assertEqual(config.band_low, 20.0)
        self.assertEqual(config.restarts, 20)
        self.assertEqual(config.phases, (Phase.APR, Phase.VPR))
        self.assertEqual(PipelineConfig(phase="VPR").phases, (Phase.VPR,))

    def test_hash(self):
        self.assertEqual(PipelineConfig().config_hash, PipelineConfig().config_hash)
        self.assertNotEqual(PipelineConfig().config_hash, PipelineConfig(band_low=25.0).config_hash)
        self.assertEqual(PipelineConfig().config_hash, PipelineConfig(output="/tmp/elsewhere").config_hash)
        self.assertEqual(PipelineConfig(seed=4).provenance["seed"], 4)

    def test_validation(self):
        with self.assertRaisesMessage(PipelineError, "must be positive"):
            PipelineConfig(n=0)
        with self.assertRaises(FilterError):
            PipelineConfig(band_low=400.0)
        with self.assertRaises(ValueError):
            PipelineConfig(pooling="bogus")
        self.assertEqual(PipelineConfig(n="3").n, 3)

    def test_from_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "config.json"
            path.write_text(json.dumps({"restarts": 2, "seed": 5}), encoding="utf-8")
            config = PipelineConfig.from_file(path, seed=7, criterion=None)
            self.assertEqual((config.restarts, config.seed, config.criterion), (2, 7, 90.0))
            path.write_text(json.dumps({"bogus": 1}), encoding="utf-8")
            with self.assertRaisesMessage(PipelineError, "unknown config keys: bogus"):
                PipelineConfig.from_file(path)
            with self.assertRaisesMessage(PipelineError, "cannot read config file"):
                PipelineConfig.from_file(Path(directory) / "missing.json")


class PipelineErrorsTestCase(SimpleTestCase):
    def test_empty_cohort_writes_nothing(self):
        with tempfile.TemporaryDirectory() as directory:
            output = Path(directory) / "report"
            with self.assertRaisesMessage(PipelineError, "cohort has no valid trials"):
                run_pipeline(PipelineConfig(output=str(output)), cohort=Cohort(subjects=[]))
            self.assertFalse(output.exists())

    def test_missing_manifest(self):
        with self.assertRaisesMessage(PipelineError, "no manifest given"):
            load(PipelineConfig())
        with self.assertRaisesMessage(PipelineError, "[ingest]"):
            load(PipelineConfig(manifest="/nonexistent/manifest.json"))

    def test_write_needs_directory(self):
        with self.assertRaisesMessage(PipelineError, "no output directory given"):
            ReportBundle(config=PipelineConfig(), summary={}).write()


class RunPipelineTestCase(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.cohort, cls.ground_truths = generate_synthetic_cohort(small_scenario(subjects=2), seed=1)
        cls.directory = tempfile.TemporaryDirectory()
        cls.config = PipelineConfig(output=cls.directory.name, **FAST)
        cls.bundle = run_pipeline(cls.config, cohort=cls.cohort)

    @classmethod
    def tearDownClass(cls):
        cls.directory.cleanup()
        super().tearDownClass()

    def test_artifacts(self):
        written = sorted(path.name for path in Path(self.directory.name).iterdir())
        self.assertEqual(written, sorted(self.bundle.summary["artifacts"]))
        for name in ("report.json", "binned.csv", "matching.json", "stats.json", "cop_metrics.csv",
                     "synergies_FF_APR.json", "synergies_NoFF_VPR.svg", "W_FF_APR.csv", "vaf_scan.csv"):
            self.assertIn(name, written)

    def test_provenance(self):
        directory = Path(self.directory.name)
        first_line = (directory / "W_FF_APR.csv").read_text(encoding="utf-8").splitlines()[0]
        self.assertEqual(first_line, f"# config_hash={self.config.config_hash},seed=0")
        report = json.loads((directory / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(report["provenance"]["config_hash"], self.config.config_hash)
        self.assertEqual(report["data"]["groups"], ["FF", "NoFF"])

    def test_recovers_ground_truth(self):
        summary = self.bundle.summary["synergies"]
        self.assertEqual(summary["FF_APR"]["n_syn"], 4)
        self.assertTrue(summary["FF_APR"]["criterion_met"])
        matching = match_synergies(self.ground_truths[Group.FF].W, self.bundle.synergy_sets[(Group.FF, Phase.APR)])
        self.assertGreaterEqual(min(cosine for _, _, cosine in matching.pairs), 0.95)

    def test_matching(self):
        matching = json.loads((Path(self.directory.name) / "matching.json").read_text(encoding="utf-8"))["data"]
        self.assertEqual(sorted(matching), ["APR_vs_VPR_FF", "APR_vs_VPR_NoFF", "FF_vs_NoFF_APR", "FF_vs_NoFF_VPR"])

    def test_tables(self):
        self.assertEqual(sorted(self.bundle.performance["subject"]), ["FF01", "FF02", "NoFF01", "NoFF02"])
        self.assertEqual(len(self.bundle.cop_metrics), 16)
        self.assertEqual(sorted(self.bundle.summary["motor_summary"]), ["FF", "NoFF"])

    def test_byte_identical_rerun(self):
        with tempfile.TemporaryDirectory() as directory:
            config = PipelineConfig(output=directory, **FAST)
            run_pipeline(config, cohort=self.cohort)
            for path in Path(self.directory.name).iterdir():
                self.assertEqual((Path(directory) / path.name).read_bytes(), path.read_bytes(), msg=path.name)

    def test_single_phase_fixed_n(self):
        bundle = run_pipeline(PipelineConfig(phase="APR", n=3, pooling="per_subject", **FAST), cohort=self.cohort)
        self.assertEqual(sorted(bundle.summary["synergies"]), ["FF_APR", "NoFF_APR"])
        self.assertEqual(bundle.summary["synergies"]["FF_APR"]["n_syn"], 3)
        self.assertEqual(bundle.summary["synergies"]["FF_APR"]["selected_n_syn"], 4)
        self.assertEqual(sorted(bundle.summary["per_subject"]["FF_APR"]["n_syn"]), ["FF01", "FF02"])
        matching = next(artifact for artifact in bundle.artifacts if artifact.name == "matching").payload
        self.assertEqual(sorted(matching), ["FF_vs_NoFF_APR"])


class DefaultConfigRecoveryTestCase(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        scenario = small_scenario(trials_per_session=8, subjects=2)
        cls.cohort, cls.ground_truths = generate_synthetic_cohort(scenario, seed=4)
        cls.bundle = run_pipeline(PipelineConfig(), cohort=cls.cohort)

    def test_both_groups_both_phases(self):
        summary = self.bundle.summary["synergies"]
        self.assertEqual(sorted(summary), ["FF_APR", "FF_VPR", "NoFF_APR", "NoFF_VPR"])
        for group, expected in ((Group.FF, 4), (Group.NOFF, 8)):
            for phase in Phase:
                with self.subTest(group=group, phase=phase):
                    self.assertEqual(summary[f"{group.value}_{phase.value}"]["n_syn"], expected)
                    matching = match_synergies(self.ground_truths[group].W,
                                               self.bundle.synergy_sets[(group, phase)])
                    self.assertGreaterEqual(min(cosine for _, _, cosine in matching.pairs), 0.9)


class NoisyCohortTestCase(SimpleTestCase):
    def test_default_phases_complete(self):
        for noise in (0.0, 0.05, 0.1):
            for seed in (0, 1, 2):
                with self.subTest(noise=noise, seed=seed):
                    cohort, _ = generate_synthetic_cohort(small_scenario(noise=noise), seed=seed)
                    bundle = run_pipeline(PipelineConfig(restarts=2, max_iter=300), cohort=cohort)
                    self.assertEqual(sorted(bundle.summary["synergies"]),
                                     ["FF_APR", "FF_VPR", "NoFF_APR", "NoFF_VPR"])
