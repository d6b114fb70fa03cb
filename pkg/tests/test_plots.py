import tempfile

import numpy as np
from django.test import SimpleTestCase

from django_postural_synergies.balance import CopTrace
from django_postural_synergies.core.utils import BINS, DIRECTIONS
from django_postural_synergies.exceptions import PipelineError
from django_postural_synergies.plots import CopTracePlot, SynergyBarsPlot, TuningPlot, VafScanPlot, emit_plots
from django_postural_synergies.simulator.synthesis import ground_truth_synergies
from django_postural_synergies.synergy.factorization import SynergySet
from django_postural_synergies.synergy.tuning import tuning_curves

PROVENANCE = {"seed": 0, "config_hash": "f00"}
LABELS = tuple((name, direction) for name in BINS[:4] for direction in DIRECTIONS)


def synergy_set(n=4):
    truth = ground_truth_synergies(n, seed=0)
    return SynergySet(W=truth.W, C=truth.C[:, :16], n_syn=n, vaf_total=95.0, vaf_per_muscle=np.full(14, 95.0),
                      rng_seed=0, restarts=1, column_labels=LABELS)


class SynergyBarsPlotTestCase(SimpleTestCase):
    def test_panels(self):
        svg = SynergyBarsPlot("synergies_FF_APR", synergy_set(4), per_synergy_vaf=[30, 25, 20, 15],
                              provenance=PROVENANCE).render()
        self.assertEqual(svg.count('class="panel"'), 4)
        self.assertEqual(svg.count('class="bar"'), 56)
        self.assertIn("W1 (30.0% VAF)", svg)
        self.assertIn("<!-- config_hash=f00,seed=0 -->", svg)

    def test_deterministic(self):
        first = SynergyBarsPlot("synergies", synergy_set(4), provenance=PROVENANCE).render()
        second = SynergyBarsPlot("synergies", synergy_set(4), provenance=PROVENANCE).render()
        self.assertEqual(first, second)

    def test_missing_set(self):
        with self.assertRaisesMessage(PipelineError, "no synergy set for 'synergies'"):
            SynergyBarsPlot("synergies", None)


class TuningPlotTestCase(SimpleTestCase):
    def test_cells(self):
        svg = TuningPlot("tuning_FF_APR", tuning_curves(synergy_set(3))).render()
        self.assertEqual(svg.count('class="cell"'), 12)
        self.assertIn("bins: BK APR1 APR2 APR3", svg)


class VafScanPlotTestCase(SimpleTestCase):
    def test_points(self):
        scan = {n: min(100.0, 50.0 + 6.0 * n) for n in range(1, 11)}
        svg = VafScanPlot("vaf_scan_FF_APR", scan, 90.0).render()
        self.assertEqual(svg.count('class="point"'), 10)
        self.assertIn("n=10: 100.00%", svg)
        self.assertEqual(svg.count('class="criterion"'), 1)

    def test_empty(self):
        with self.assertRaisesMessage(PipelineError, "empty VAF scan"):
            VafScanPlot("vaf_scan", {}, 90.0)


class CopTracePlotTestCase(SimpleTestCase):
    def test_traces(self):
        t = np.linspace(0.0, 1.0, 11)
        xy = np.column_stack([np.cos(t), np.sin(t)]) * 10.0
        traces = [(f"s1t{index:03d}", CopTrace(t=t, xy=xy + index, valid_mask=np.ones(11, dtype=bool)))
                  for index in range(3)]
        svg = CopTracePlot("cop_traces_FF", traces).render()
        self.assertEqual(svg.count('class="trace"'), 3)
        self.assertIn("<title>s1t002</title>", svg)


class EmitPlotsTestCase(SimpleTestCase):
    def test_writes_every_plot(self):
        plots = [SynergyBarsPlot("synergies", synergy_set(2)), VafScanPlot("vaf_scan", {1: 80.0, 2: 95.0}, 90.0)]
        with tempfile.TemporaryDirectory() as directory:
            paths = emit_plots(plots, directory)
            self.assertEqual([path.name for path in paths], ["synergies.svg", "vaf_scan.svg"])
            self.assertEqual(paths[0].read_text(encoding="utf-8"), plots[0].render())

    def test_nothing_to_emit(self):
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaisesMessage(PipelineError, "no plots to emit"):
                emit_plots([], directory)
