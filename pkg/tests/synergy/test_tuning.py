import numpy as np
from django.test import SimpleTestCase

from django_postural_synergies.core.utils import Bin, Direction
from django_postural_synergies.exceptions import FactorizationError
from django_postural_synergies.synergy.factorization import SynergySet
from django_postural_synergies.synergy.tuning import tuning_curves

BINS = (Bin.BK, Bin.APR1, Bin.APR2, Bin.APR3)
DIRECTIONS = (Direction.FORWARD, Direction.BACKWARD, Direction.DOMINANT, Direction.NONDOMINANT)
LABELS = tuple((name, direction) for name in BINS for direction in DIRECTIONS)


def synergy_set(C, column_labels=LABELS):
    n = C.shape[0]
    return SynergySet(W=np.ones((14, n)), C=C, n_syn=n, vaf_total=100.0, vaf_per_muscle=np.full(14, 100.0),
                      rng_seed=0, restarts=1, column_labels=column_labels)


class TuningCurvesTestCase(SimpleTestCase):
    def test_reshape(self):
        C = np.arange(32, dtype=float).reshape(2, 16)
        curves = tuning_curves(synergy_set(C))
        self.assertEqual(curves.grids.shape, (2, 4, 4))
        self.assertEqual(curves.bins, BINS)
        self.assertEqual(curves.directions, DIRECTIONS)
        np.testing.assert_array_equal(curves.curve(1, Bin.APR1), [20.0, 21.0, 22.0, 23.0])
        self.assertEqual(curves.value(0, "APR3", "dominant"), 14.0)
        np.testing.assert_array_equal(curves.flatten(), C)

    def test_explicit_labels(self):
        C = np.ones((1, 16))
        curves = tuning_curves(synergy_set(C, column_labels=()), column_labels=LABELS)
        self.assertEqual(curves.as_data()["bins"], ["BK", "APR1", "APR2", "APR3"])

    def test_label_count(self):
        with self.assertRaisesMessage(FactorizationError, "0 column labels for 16 columns"):
            tuning_curves(synergy_set(np.ones((1, 16)), column_labels=()))

    def test_label_order(self):
        shuffled = LABELS[1:] + LABELS[:1]
        with self.assertRaisesMessage(FactorizationError, "not ordered bins-major"):
            tuning_curves(synergy_set(np.ones((1, 16)), column_labels=shuffled))
