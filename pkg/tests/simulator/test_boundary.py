import numpy as np
from django.test import SimpleTestCase

from django_postural_synergies.exceptions import BoundaryError, SimulationError
from django_postural_synergies.simulator.boundary import (
    BalanceBoundary, assistive_force, build_boundary, circular_boundary
)

SQUARE = [[-10.0, -10.0], [10.0, -10.0], [10.0, 10.0], [-10.0, 10.0]]


class BoundaryTestCase(SimpleTestCase):
    def test_hull(self):
        boundary = build_boundary(SQUARE + [[1.0, 2.0]])
        self.assertEqual(len(boundary.polygon), 4)
        self.assertTrue(boundary.contains([0.0, 0.0]))
        self.assertTrue(boundary.contains([10.0, 0.0]))
        self.assertFalse(boundary.contains([10.5, 0.0]))

    def test_origin_is_part_of_the_hull(self):
        boundary = build_boundary([[10.0, 0.0], [10.0, 10.0], [0.0, 10.0]], origin=(0.0, 0.0))
        self.assertTrue(boundary.contains([0.0, 0.0]))
        self.assertEqual(len(boundary.polygon), 4)

    def test_distance(self):
        boundary = build_boundary(SQUARE)
        self.assertEqual(boundary.distance([0.0, 0.0]), 0.0)
        self.assertAlmostEqual(boundary.distance([15.0, 0.0]), 5.0)
        self.assertAlmostEqual(boundary.distance([13.0, 14.0]), 5.0)

    def test_degenerate(self):
        with self.assertRaisesMessage(BoundaryError, "collinear"):
            build_boundary([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        with self.assertRaisesMessage(BoundaryError, "At least 3 points"):
            build_boundary([[1.0, 0.0]])

    def test_circular(self):
        boundary = circular_boundary(30.0, sides=16)
        self.assertEqual(len(boundary.polygon), 16)
        self.assertTrue(boundary.contains([29.0, 0.0]))
        self.assertFalse(boundary.contains([0.0, 31.0]))


class AssistiveForceTestCase(SimpleTestCase):
    def setUp(self):
        self.boundary = build_boundary(SQUARE)

    def test_inside(self):
        np.testing.assert_array_equal(assistive_force(self.boundary, [5.0, 5.0], gain=300.0), np.zeros(2))

    def test_restores_toward_origin(self):
        force = assistive_force(self.boundary, [0.0, 20.0], gain=300.0, saturation=100.0)
        np.testing.assert_allclose(force, [0.0, -3.0])

    def test_saturation(self):
        force = assistive_force(self.boundary, [-1010.0, 0.0], gain=300.0, saturation=100.0)
        np.testing.assert_allclose(force, [100.0, 0.0])

    def test_origin_outside(self):
        boundary = BalanceBoundary(polygon=np.array(SQUARE), origin=np.array([50.0, 50.0]))
        with self.assertRaisesMessage(SimulationError, "at the origin"):
            assistive_force(boundary, [50.0, 50.0])
