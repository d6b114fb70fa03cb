import numpy as np
from django.test import SimpleTestCase

from django_postural_synergies.balance import (
    METRICS_COLUMNS, CopMetrics, CopReference, CopTrace, cop_from_wrench, cop_metrics, net_cop, session_metrics,
    trial_cop
)
from django_postural_synergies.exceptions import BalanceError

from tests.utils import make_trial


def trace(xy, rate=1000.0):
    xy = np.asarray(xy, dtype=float)
    t = np.arange(len(xy)) / rate
    return CopTrace(t=t, xy=xy, valid_mask=np.ones(len(xy), dtype=bool))


def wrench(fz, mx=0.0, my=0.0, samples=3):
    values = [np.full(samples, value, dtype=float) for value in (0.0, 0.0, fz, mx, my)]
    return values


class CopFromWrenchTestCase(SimpleTestCase):
    def test_vertical_load_at_origin(self):
        result = cop_from_wrench(*wrench(700.0))
        np.testing.assert_allclose(result.xy, 0.0)
        self.assertTrue(result.valid_mask.all())

    def test_formula(self):
        result = cop_from_wrench(*wrench(500.0, mx=50.0, my=-25.0))
        np.testing.assert_allclose(result.xy[0], [50.0, 100.0])

    def test_plate_origin(self):
        result = cop_from_wrench(*wrench(500.0, mx=50.0, my=-25.0), plate_origin=(-100.0, 10.0))
        np.testing.assert_allclose(result.xy[0], [-50.0, 110.0])

    def test_threshold(self):
        fx, fy, _, mx, my = wrench(0.0, samples=2)
        result = cop_from_wrench(fx, fy, np.array([2.0, 400.0]), mx, my, threshold=20.0)
        np.testing.assert_array_equal(result.valid_mask, [False, True])
        self.assertTrue(np.isnan(result.xy[0]).all())

    def test_all_invalid(self):
        with self.assertRaisesMessage(BalanceError, "No sample reaches the load threshold of 20.0 N"):
            cop_from_wrench(*wrench(2.0), threshold=20.0)


class NetCopTestCase(SimpleTestCase):
    def test_equal_load_midpoint(self):
        left = cop_from_wrench(*wrench(400.0), plate_origin=(-100.0, 0.0))
        right = cop_from_wrench(*wrench(400.0), plate_origin=(100.0, 20.0))
        np.testing.assert_allclose(net_cop(left, right).xy, [[0.0, 10.0]] * 3)

    def test_weighted(self):
        left = cop_from_wrench(*wrench(300.0), plate_origin=(-100.0, 0.0))
        right = cop_from_wrench(*wrench(100.0), plate_origin=(100.0, 0.0))
        np.testing.assert_allclose(net_cop(left, right).xy[:, 0], -50.0)

    def test_unloaded_plate(self):
        fx, fy, _, mx, my = wrench(0.0)
        left = cop_from_wrench(*wrench(300.0), plate_origin=(-100.0, 0.0))
        right = cop_from_wrench(fx, fy, np.array([0.0, 0.0, 50.0]), mx, my, plate_origin=(100.0, 0.0))
        np.testing.assert_allclose(net_cop(left, right).xy[:2], left.xy[:2])

    def test_grid_mismatch(self):
        with self.assertRaisesMessage(BalanceError, "not on the same time grid"):
            net_cop(trace(np.zeros((3, 2))), trace(np.zeros((4, 2))))


class CopMetricsTestCase(SimpleTestCase):
    def test_stationary(self):
        metrics = cop_metrics(trace(np.full((100, 2), 5.0)))
        self.assertDictEqual(metrics.as_data(), {
            "total_excursion_mm": 0.0,
            "rms_cop_mm": 0.0,
            "rms_cop_vel_mm_s": 0.0,
            "max_ap_mm": 0.0,
            "max_ml_mm": 0.0
        })

    def test_square_path(self):
        square = [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]]
        self.assertAlmostEqual(cop_metrics(trace(square)).total_excursion, 40.0)

    def test_circle(self):
        angles = np.linspace(0.0, 2 * np.pi, 2001)[:-1]
        circle = 7.0 * np.column_stack([np.cos(angles), np.sin(angles)]) + [3.0, -4.0]
        metrics = cop_metrics(trace(circle))
        self.assertAlmostEqual(metrics.rms_cop, 7.0, places=6)
        self.assertAlmostEqual(metrics.max_ml_displacement, 7.0, places=3)
        self.assertAlmostEqual(metrics.max_ap_displacement, 7.0, places=3)

    def test_translation_and_time_reversal(self):
        rng = np.random.default_rng(0)
        path = np.cumsum(rng.normal(size=(500, 2)), axis=0)
        base = cop_metrics(trace(path))
        shifted = cop_metrics(trace(path + [40.0, -15.0]))
        reversed_ = cop_metrics(trace(path[::-1]))
        self.assertAlmostEqual(base.total_excursion, shifted.total_excursion)
        self.assertAlmostEqual(base.rms_cop, shifted.rms_cop)
        self.assertAlmostEqual(base.rms_cop_velocity, shifted.rms_cop_velocity)
        self.assertAlmostEqual(base.total_excursion, reversed_.total_excursion)

    def test_sampling_rate_stability(self):
        def path(rate):
            t = np.arange(int(2.0 * rate) + 1) / rate
            return trace(np.column_stack([5 * np.sin(2 * np.pi * t), 3 * np.sin(np.pi * t)]), rate=rate)
        coarse = cop_metrics(path(1000.0)).total_excursion
        fine = cop_metrics(path(2000.0)).total_excursion
        self.assertLess(abs(fine - coarse) / fine, 0.02)

    def test_start_reference(self):
        metrics = cop_metrics(trace([[0.0, 0.0], [0.0, 4.0]]), reference=CopReference.START)
        self.assertAlmostEqual(metrics.max_ap_displacement, 4.0)
        self.assertAlmostEqual(metrics.max_ml_displacement, 0.0)

    def test_invalid_samples_are_skipped(self):
        xy = np.array([[0.0, 0.0], [np.nan, np.nan], [3.0, 4.0]])
        result = cop_metrics(CopTrace(t=np.arange(3) / 1000.0, xy=xy, valid_mask=np.array([True, False, True])))
        self.assertAlmostEqual(result.total_excursion, 5.0)

    def test_insufficient_samples(self):
        with self.assertRaisesMessage(BalanceError, "At least 2 valid COP samples are required, got 1"):
            cop_metrics(trace([[0.0, 0.0]]))


class SessionTestCase(SimpleTestCase):
    def test_aggregate(self):
        first = CopMetrics(10.0, 1.0, 20.0, 3.0, 2.0)
        second = CopMetrics(30.0, 3.0, 40.0, 1.0, 5.0)
        result = session_metrics([first, second])
        self.assertEqual(result, CopMetrics(40.0, 2.0, 30.0, 3.0, 5.0))
        self.assertEqual(tuple(result.as_row("S01", "FF", 1)), METRICS_COLUMNS)

    def test_empty(self):
        with self.assertRaisesMessage(BalanceError, "No trial metrics to aggregate"):
            session_metrics([])

    def test_trial_cop(self):
        trial = make_trial(t_robust_onset=0.5, t_end=2.0)
        result = trial_cop(trial, ((-100.0, 0.0), (100.0, 0.0)))
        self.assertAlmostEqual(result.t[0], 0.5)
        self.assertAlmostEqual(result.t[-1], 2.0)
        np.testing.assert_allclose(result.xy, 0.0, atol=1e-9)
