import numpy as np

from django_postural_synergies.core.types import Cohort, Outcome, PlateStream, Subject, TrialRecording
from django_postural_synergies.core.utils import CHANNEL_COUNT, DIRECTIONS, Direction, Group, Handedness
from django_postural_synergies.simulator.cohort import GroupScenario, Scenario

FAST_THRESHOLDS = {direction: 150.0 for direction in DIRECTIONS}


def small_scenario(trials_per_session=4, sessions=1, subjects=1, **kwargs):
    """Two groups with 4 and 8 ground-truth synergies and fixed thresholds, so no calibration runs."""
    kwargs.setdefault("thresholds", FAST_THRESHOLDS)
    return Scenario(
        groups=(GroupScenario(Group.FF, subjects, 4), GroupScenario(Group.NOFF, subjects, 8)),
        trials_per_session=trials_per_session,
        sessions=sessions,
        **kwargs
    )


def make_trial(trial_id=1, subject_id="S01", group=Group.NOFF, direction=Direction.FORWARD, session=1,
               t_vr_onset=0.2, t_robust_onset=0.5, t_end=2.0, rate_emg=2000.0, rate_plate=1000.0,
               rate_marker=100.0, emg_value=None, seed=0, valid=True, outcome=None):
    """A trial with streams covering [t_vr_onset - 0.2, t_end]: white-noise EMG and a still, evenly loaded stance."""
    rng = np.random.default_rng(seed)
    start = t_vr_onset - 0.2
    emg_t = start + np.arange(int(round((t_end - start) * rate_emg)) + 1) / rate_emg
    if emg_value is None:
        emg = rng.standard_normal((CHANNEL_COUNT, emg_t.size))
    else:
        emg = np.full((CHANNEL_COUNT, emg_t.size), emg_value, dtype=float)
    plate_t = start + np.arange(int(round((t_end - start) * rate_plate)) + 1) / rate_plate
    wrench = np.zeros((plate_t.size, 6))
    wrench[:, 2] = 343.0
    plates = (PlateStream(0, plate_t, wrench.copy()), PlateStream(1, plate_t, wrench.copy()))
    pelvic_t = start + np.arange(int(round((t_end - start) * rate_marker)) + 1) / rate_marker
    return TrialRecording(
        trial_id=trial_id,
        subject_id=subject_id,
        group=group,
        direction=direction,
        session=session,
        rate_emg=rate_emg,
        rate_plate=rate_plate,
        rate_marker=rate_marker,
        t_vr_onset=t_vr_onset,
        t_robust_onset=t_robust_onset,
        t_end=t_end,
        outcome=outcome or Outcome(),
        emg_t=emg_t,
        emg=emg,
        plates=plates,
        pelvic_t=pelvic_t,
        pelvic_xy=np.zeros((pelvic_t.size, 2)),
        valid=valid
    )


def make_cohort(groups=(Group.FF, Group.NOFF)):
    """One subject per group with a single session of one trial per direction."""
    subjects = []
    for number, group in enumerate(groups, start=1):
        subject_id = f"{group.value}{number:02d}"
        trials = [
            make_trial(trial_id=index + 1, subject_id=subject_id, group=group, direction=direction, seed=index)
            for index, direction in enumerate(DIRECTIONS)
        ]
        subjects.append(Subject(subject_id, group, Handedness.RIGHT, 686.7, {}, sessions={1: trials}))
    return Cohort(subjects=subjects, trials_per_session=len(DIRECTIONS))
