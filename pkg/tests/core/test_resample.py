import numpy as np
from django.test import SimpleTestCase

from django_postural_synergies.core.resample import resample_to_grid
from django_postural_synergies.exceptions import ResampleError


class ResampleTestCase(SimpleTestCase):
    def test_constant_stream(self):
        t = np.array([0.0, 0.13, 0.5, 0.77, 1.0])
        stream = resample_to_grid(t, np.full(t.size, 3.3), 1000.0)
        np.testing.assert_array_equal(stream.values, 3.3)
        self.assertFalse(stream.truncated)

    def test_hand_interpolation(self):
        stream = resample_to_grid([0.0, 1.0], [0.0, 10.0], 4.0)
        np.testing.assert_allclose(stream.t, [0.0, 0.25, 0.5, 0.75, 1.0])
        np.testing.assert_allclose(stream.values, [0.0, 2.5, 5.0, 7.5, 10.0])

    def test_affine_signal_is_exact(self):
        rng = np.random.default_rng(3)
        t = np.cumsum(rng.uniform(0.0005, 0.0015, 500))
        stream = resample_to_grid(t, 2.0 * t - 1.0, 1000.0)
        np.testing.assert_allclose(stream.values, 2.0 * stream.t - 1.0, rtol=0, atol=1e-9)

    def test_multichannel(self):
        t = np.linspace(0.0, 1.0, 11)
        values = np.column_stack([t, 2 * t])
        stream = resample_to_grid(t, values, 20.0)
        self.assertEqual(stream.values.shape, (21, 2))
        np.testing.assert_allclose(stream.values[:, 1], 2 * stream.values[:, 0])

    def test_grid_past_last_sample_is_truncated(self):
        with self.assertLogs("django_postural_synergies.core.resample", "WARNING"):
            stream = resample_to_grid([0.0, 1.0], [0.0, 1.0], 10.0, t_stop=2.0)
        self.assertTrue(stream.truncated)
        self.assertAlmostEqual(stream.t[-1], 1.0)

    def test_invalid_input(self):
        with self.assertRaisesMessage(ResampleError, "At least 2 samples are required"):
            resample_to_grid([0.0], [1.0], 10.0)
        with self.assertRaisesMessage(ResampleError, "Timestamps must be strictly increasing"):
            resample_to_grid([0.0, 0.2, 0.1], [1.0, 2.0, 3.0], 10.0)
