import dataclasses

from django.test import SimpleTestCase

from django_postural_synergies.core.types import MUSCLE_CHANNELS, Outcome, channel
from django_postural_synergies.core.utils import Direction, Handedness, Muscle, Side, canonical_direction
from django_postural_synergies.exceptions import IngestError

from tests.utils import make_cohort, make_trial


class MuscleChannelTestCase(SimpleTestCase):
    def test_fourteen_distinct_channels(self):
        self.assertEqual(len(MUSCLE_CHANNELS), 14)
        self.assertEqual(len({(item.side, item.muscle) for item in MUSCLE_CHANNELS}), 14)
        for side in Side:
            self.assertEqual(sum(item.side == side for item in MUSCLE_CHANNELS), len(Muscle))

    def test_channel_lookup(self):
        self.assertEqual(channel(0).id, 0)
        self.assertEqual(channel(13).label, "nondominant ES")
        with self.assertRaisesMessage(IngestError, "Invalid channel id 14"):
            channel(14)

    def test_as_data(self):
        self.assertDictEqual(channel(0).as_data(), {"id": 0, "side": Side.DOMINANT, "muscle": Muscle.TA})


class DirectionTestCase(SimpleTestCase):
    def test_canonical_labels_pass_through(self):
        self.assertEqual(canonical_direction("dominant", Handedness.LEFT), Direction.DOMINANT)
        self.assertEqual(canonical_direction("forward", Handedness.RIGHT), Direction.FORWARD)

    def test_left_right_follow_handedness(self):
        self.assertEqual(canonical_direction("right", Handedness.RIGHT), Direction.DOMINANT)
        self.assertEqual(canonical_direction("left", Handedness.RIGHT), Direction.NONDOMINANT)
        self.assertEqual(canonical_direction("left", Handedness.LEFT), Direction.DOMINANT)

    def test_unknown_label(self):
        with self.assertRaises(ValueError):
            canonical_direction("up", Handedness.RIGHT)


class TrialRecordingTestCase(SimpleTestCase):
    def test_valid_trial(self):
        make_trial().validate()

    def test_onset_window(self):
        with self.assertRaisesMessage(IngestError, "outside the onset window"):
            make_trial(t_vr_onset=0.2, t_robust_onset=1.1, t_end=2.0).validate()

    def test_onset_before_vr(self):
        with self.assertRaisesMessage(IngestError, "RobUST onset before VR onset"):
            make_trial(t_vr_onset=0.5, t_robust_onset=0.3).validate()

    def test_task_window(self):
        with self.assertRaisesMessage(IngestError, "longer than the task window"):
            make_trial(t_vr_onset=0.2, t_robust_onset=0.5, t_end=3.5).validate()

    def test_stream_coverage(self):
        trial = make_trial()
        late = make_trial(t_end=1.5)
        shortened = dataclasses.replace(trial, emg_t=late.emg_t, emg=late.emg)
        with self.assertRaisesMessage(IngestError, "emg stream covers"):
            shortened.validate()

    def test_outcome_score_range(self):
        with self.assertRaisesMessage(IngestError, "Invalid score 11"):
            Outcome(score=11)


class CohortTestCase(SimpleTestCase):
    def test_iteration(self):
        cohort = make_cohort()
        self.assertEqual(len(cohort), 8)
        self.assertEqual([group.value for group in cohort.groups()], ["FF", "NoFF"])
        self.assertEqual(len(list(cohort.trials(cohort.groups()[0]))), 4)
        self.assertEqual(len(cohort.subjects_in(cohort.groups()[1])), 1)
