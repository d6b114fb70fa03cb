from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from django_postural_synergies.core.utils import (
    CHANNEL_COUNT, PLATE_COLUMNS, Direction, Group, Handedness, Muscle, Side
)
from django_postural_synergies.exceptions import IngestError
from django_postural_synergies.settings import synergy_settings


@dataclass(frozen=True)
class MuscleChannel:
    id: int
    side: Side
    muscle: Muscle

    @property
    def label(self) -> str:
        return f"{self.side.value} {self.muscle.value}"

    def as_data(self):
        return {
            "id": self.id,
            "side": self.side,
            "muscle": self.muscle
        }


MUSCLE_CHANNELS = tuple(
    MuscleChannel(index * len(Muscle) + position, side, muscle)
    for index, side in enumerate(Side)
    for position, muscle in enumerate(Muscle)
)


def channel(channel_id: int) -> MuscleChannel:
    if not 0 <= channel_id < CHANNEL_COUNT:
        raise IngestError(f"Invalid channel id {channel_id}")
    return MUSCLE_CHANNELS[channel_id]


@dataclass(frozen=True)
class Outcome:
    caught: bool = False
    thrown: bool = False
    score: int = 0

    def __post_init__(self):
        if not 0 <= self.score <= 10:
            raise IngestError(f"Invalid score {self.score}")

    def as_data(self):
        return {
            "caught": self.caught,
            "thrown": self.thrown,
            "score": self.score
        }


@dataclass(frozen=True, eq=False)
class PlateStream:
    plate_id: int
    t: np.ndarray
    wrench: np.ndarray  # N x 6: fx, fy, fz, mx, my, mz

    def column(self, name: str) -> np.ndarray:
        return self.wrench[:, PLATE_COLUMNS.index(name)]


@dataclass(frozen=True, eq=False)
class TrialRecording:
    trial_id: int
    subject_id: str
    group: Group
    direction: Direction
    session: int
    rate_emg: float
    rate_plate: float
    rate_marker: float
    t_vr_onset: float
    t_robust_onset: float
    t_end: float
    outcome: Outcome
    emg_t: Optional[np.ndarray] = None
    emg: Optional[np.ndarray] = None  # 14 x N, mV
    plates: Tuple[PlateStream, ...] = ()
    pelvic_t: Optional[np.ndarray] = None
    pelvic_xy: Optional[np.ndarray] = None  # N x 2, mm
    valid: bool = True

    @property
    def has_streams(self) -> bool:
        return self.emg is not None and self.pelvic_xy is not None and len(self.plates) == 2

    def validate(self) -> None:
        for name in ("rate_emg", "rate_plate", "rate_marker"):
            rate = getattr(self, name)
            if rate is None or not np.isfinite(rate) or rate <= 0:
                raise IngestError(f"Trial {self.trial_id}: sampling-rate field '{name}' is absent or invalid")
        if not self.t_vr_onset <= self.t_robust_onset:
            raise IngestError(f"Trial {self.trial_id}: timestamp ordering violated (RobUST onset before VR onset)")
        onset_delay = self.t_robust_onset - self.t_vr_onset
        if onset_delay > synergy_settings.ONSET_WINDOW + 1e-9:
            raise IngestError(
                f"Trial {self.trial_id}: RobUST onset {onset_delay:.3f} s after VR onset is outside the onset window "
                f"of {synergy_settings.ONSET_WINDOW} s"
            )
        if not self.t_robust_onset <= self.t_end:
            raise IngestError(f"Trial {self.trial_id}: timestamp ordering violated (trial ends before RobUST onset)")
        duration = self.t_end - self.t_vr_onset
        if duration > synergy_settings.TRIAL_WINDOW + synergy_settings.TRIAL_WINDOW_TOLERANCE:
            raise IngestError(f"Trial {self.trial_id}: trial lasts {duration:.3f} s, longer than the task window")
        if not self.has_streams:
            raise IngestError(f"Trial {self.trial_id}: streams are missing")
        if self.emg.shape[0] != CHANNEL_COUNT:
            raise IngestError(f"Trial {self.trial_id}: expected {CHANNEL_COUNT} EMG channels, got {self.emg.shape[0]}")
        start = self.t_vr_onset - synergy_settings.PRE_ONSET_COVERAGE
        streams = [("emg", self.emg_t, self.rate_emg), ("pelvis", self.pelvic_t, self.rate_marker)]
        streams.extend((f"plate {plate.plate_id}", plate.t, self.rate_plate) for plate in self.plates)
        for name, t, rate in streams:
            if len(t) < 2 or np.any(np.diff(t) <= 0):
                raise IngestError(f"Trial {self.trial_id}: {name} timestamps are not strictly increasing")
            slack = 0.5 / rate + 1e-9
            if t[0] > start + slack or t[-1] < self.t_end - slack:
                raise IngestError(
                    f"Trial {self.trial_id}: {name} stream covers [{t[0]:.3f}, {t[-1]:.3f}] s, "
                    f"not [{start:.3f}, {self.t_end:.3f}] s"
                )

    def as_data(self):
        return {
            "trial_id": self.trial_id,
            "direction": self.direction,
            "rate_emg": self.rate_emg,
            "rate_plate": self.rate_plate,
            "rate_marker": self.rate_marker,
            "t_vr_onset": self.t_vr_onset,
            "t_robust_onset": self.t_robust_onset,
            "t_end": self.t_end,
            "outcome": self.outcome.as_data(),
            "valid": self.valid
        }


@dataclass(frozen=True, eq=False)
class Subject:
    subject_id: str
    group: Group
    handedness: Handedness
    body_weight_n: float
    thresholds_n: Dict[Direction, float]
    sessions: Dict[int, List[TrialRecording]] = field(default_factory=dict)
    dropped: Dict[int, List[int]] = field(default_factory=dict)

    def trials(self, valid_only: bool = True):
        for session in sorted(self.sessions):
            for trial in self.sessions[session]:
                if trial.valid or not valid_only:
                    yield trial

    def as_data(self):
        return {
            "subject_id": self.subject_id,
            "group": self.group,
            "handedness": self.handedness,
            "body_weight_N": self.body_weight_n,
            "thresholds_N": {direction.value: value for direction, value in self.thresholds_n.items()}
        }


@dataclass(frozen=True, eq=False)
class Cohort:
    subjects: List[Subject]
    trials_per_session: int = 50
    plate_origins: Tuple[Tuple[float, float], ...] = ((-100.0, 0.0), (100.0, 0.0))

    def groups(self) -> List[Group]:
        return [group for group in Group if any(subject.group == group for subject in self.subjects)]

    def subjects_in(self, group: Group) -> List[Subject]:
        return [subject for subject in self.subjects if subject.group == group]

    def trials(self, group: Group = None, valid_only: bool = True):
        for subject in self.subjects:
            if group is None or subject.group == group:
                yield from subject.trials(valid_only=valid_only)

    def __len__(self):
        return sum(1 for _ in self.trials(valid_only=False))
