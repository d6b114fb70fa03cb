import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from django_postural_synergies.core.utils import DIRECTIONS
from django_postural_synergies.simulator.cohort import generate_synthetic_cohort
from tests.utils import small_scenario

FAST = {"restarts": 2, "max_iter": 300}


class CommandsTestCase(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.directory = tempfile.TemporaryDirectory()
        cls.root = Path(cls.directory.name)
        generate_synthetic_cohort(small_scenario(subjects=2), directory=cls.root / "cohort", seed=2)
        cls.manifest = str(cls.root / "cohort" / "manifest.json")

    @classmethod
    def tearDownClass(cls):
        cls.directory.cleanup()
        super().tearDownClass()

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **options)
        return out.getvalue()

    def output(self, name):
        return str(self.root / name)

    def test_ingest(self):
        summary = json.loads(self.call("ingest", manifest=self.manifest))
        self.assertEqual(sorted(summary), ["FF01", "FF02", "NoFF01", "NoFF02"])
        self.assertEqual(summary["FF01"], {"group": "FF", "sessions": {"1": 4}, "dropped": 0})

    def test_ingest_copy(self):
        self.call("ingest", manifest=self.manifest, output=self.output("copy"))
        self.assertTrue((self.root / "copy" / "manifest.json").is_file())

    def test_missing_manifest(self):
        with self.assertRaisesMessage(CommandError, "[ingest]"):
            self.call("ingest", manifest=self.output("missing.json"))

    def test_preprocess(self):
        self.call("preprocess", manifest=self.manifest, output=self.output("binned"), include_bk=False)
        lines = (self.root / "binned" / "binned.csv").read_text(encoding="utf-8").splitlines()
        self.assertTrue(lines[0].startswith("# config_hash="))
        self.assertEqual(lines[1], "subject,group,phase,muscle,side,bin,direction,value")
        self.assertFalse(any(",BK," in line for line in lines))

    def test_extract(self):
        summary = json.loads(self.call("extract", manifest=self.manifest, output=self.output("extract"),
                                       phase="APR", **FAST))
        self.assertEqual(sorted(summary), ["FF_APR", "NoFF_APR"])
        self.assertTrue((self.root / "extract" / "synergies_FF_APR.svg").is_file())
        self.assertFalse((self.root / "extract" / "synergies_FF_VPR.json").exists())

    def test_extract_fixed_n(self):
        summary = json.loads(self.call("extract", manifest=self.manifest, output=self.output("fixed"),
                                       phase="VPR", n="2", **FAST))
        self.assertEqual(summary["NoFF_VPR"]["n_syn"], 2)

    def test_config_file(self):
        config = self.root / "config.json"
        config.write_text(json.dumps({"phase": "APR", "restarts": 5, "max_iter": 300}), encoding="utf-8")
        summary = json.loads(self.call("extract", manifest=self.manifest, output=self.output("configured"),
                                       config=str(config), restarts=2))
        self.assertEqual(sorted(summary), ["FF_APR", "NoFF_APR"])
        data = json.loads((self.root / "configured" / "synergies_FF_APR.json").read_text(encoding="utf-8"))
        self.assertEqual(data["data"]["restarts"], 2)

    def test_cop(self):
        self.call("cop", manifest=self.manifest, output=self.output("cop"), cop_reference="start")
        lines = (self.root / "cop" / "cop_metrics.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 2 + 16)
        self.assertTrue((self.root / "cop" / "cop_traces_FF.svg").is_file())

    def test_report(self):
        message = self.call("report", manifest=self.manifest, output=self.output("report"), **FAST)
        self.assertIn("config hash", message)
        report = json.loads((self.root / "report" / "report.json").read_text(encoding="utf-8"))
        for name in report["data"]["artifacts"]:
            self.assertTrue((self.root / "report" / name).is_file(), msg=name)

    def test_stats(self):
        motor = json.loads(self.call("stats", "compare", manifest=self.manifest, metric="catches"))
        self.assertEqual(motor["method"], "mann_whitney_u")
        self.assertEqual((motor["n1"], motor["n2"]), (2, 2))
        self.call("stats", "compare", manifest=self.manifest, metric="rms_cop_mm", groups=["NoFF", "FF"],
                  method="mann_whitney_u", output=self.output("stats"))
        written = json.loads((self.root / "stats" / "stats_rms_cop_mm.json").read_text(encoding="utf-8"))
        self.assertEqual(written["data"]["details"]["groups"], ["NoFF", "FF"])

    def test_stats_comma_separated_groups(self):
        result = json.loads(self.call("stats", "compare", "--groups", "NoFF,FF", "--metric", "rms_cop_mm",
                                      manifest=self.manifest))
        self.assertEqual(result["details"]["groups"], ["NoFF", "FF"])
        result = json.loads(self.call("stats", "compare", "--groups", "FF", "NoFF", "--metric", "catches",
                                      manifest=self.manifest))
        self.assertEqual(result["details"]["groups"], ["FF", "NoFF"])
        with self.assertRaisesMessage(CommandError, "Exactly two groups are compared, got 3"):
            self.call("stats", "compare", "--groups", "FF,NoFF,FF", "--metric", "catches", manifest=self.manifest)

    def test_n_flag(self):
        summary = json.loads(self.call("extract", "--n", "2", "--phase", "APR", manifest=self.manifest,
                                       output=self.output("short_n"), **FAST))
        self.assertEqual(summary["FF_APR"]["n_syn"], 2)

    def test_abbreviated_flags_rejected(self):
        with self.assertRaises(CommandError):
            self.call("extract", "--n-s", "2", manifest=self.manifest, output=self.output("abbreviated"), **FAST)

    def test_stats_unknown_metric(self):
        with self.assertRaisesMessage(CommandError, "Unknown metric 'bogus'"):
            self.call("stats", "compare", manifest=self.manifest, metric="bogus")


class SimCommandTestCase(SimpleTestCase):
    def test_calibrate(self):
        with tempfile.TemporaryDirectory() as directory:
            out = StringIO()
            call_command("sim", "calibrate", output=directory, stdout=out, stderr=StringIO())
            results = json.loads(out.getvalue().split("\nWrote")[0])
            self.assertEqual(sorted(results), sorted(direction.value for direction in DIRECTIONS))
            data = json.loads((Path(directory) / "calibration.json").read_text(encoding="utf-8"))
            self.assertEqual(sorted(data["data"]), sorted(results))

    def test_run(self):
        scenario = {
            "groups": [{"group": "FF", "subjects": 1, "n_syn": 3}],
            "trials_per_session": 4,
            "sessions": 1,
            "thresholds_N": {direction.value: 150.0 for direction in DIRECTIONS},
        }
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "scenario.json"
            path.write_text(json.dumps(scenario), encoding="utf-8")
            out = StringIO()
            call_command("sim", "run", scenario=str(path), output=str(Path(directory) / "cohort"), seed=4, stdout=out)
            self.assertIn("Simulated 4 trials for 1 subjects", out.getvalue())
            self.assertTrue((Path(directory) / "cohort" / "ground_truth.json").is_file())

    def test_run_needs_output(self):
        with self.assertRaisesMessage(CommandError, "needs --out"):
            call_command("sim", "run", stdout=StringIO())


class SelftestCommandTestCase(SimpleTestCase):
    def test_selected_checks(self):
        out = StringIO()
        call_command("selftest", "vaf", "mann_whitney", stdout=out)
        self.assertIn("vaf: ok", out.getvalue())
        self.assertIn("mann_whitney: ok", out.getvalue())

    def test_unknown_check(self):
        with self.assertRaisesMessage(CommandError, "Unknown checks: bogus"):
            call_command("selftest", "bogus", stdout=StringIO())
