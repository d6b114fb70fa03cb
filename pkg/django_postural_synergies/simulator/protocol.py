"""
The virtual-reality catch-and-throw task played on the simulated rig.

The catch and throw policy is a deterministic reach model perturbed by seeded noise. It is not
physiological; it only makes the outcome statistics generable.
"""
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from django_postural_synergies.core.types import Outcome, PlateStream, TrialRecording
from django_postural_synergies.core.utils import CHANNEL_COUNT, DIRECTIONS, Direction, Group
from django_postural_synergies.exceptions import SimulationError
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.simulator.boundary import BalanceBoundary, assistive_force
from django_postural_synergies.simulator.rig import BodyState, RigModel, cable_tensions, step_body
from django_postural_synergies.simulator.synthesis import GroundTruth, synthesize_emg
from django_postural_synergies.simulator.utils import DIRECTION_VECTORS

logger = logging.getLogger(__name__)

BALL_SPEED = 0.30
BALL_LAUNCH_DISTANCE = 0.36
UNCERTAINTY_RADIUS = 0.10
TARGET_DISTANCE = 5.0
TARGET_RADIUS = 0.5
HAND_RADIUS = 0.05
HAND_REACH_ERROR = 0.25
REACH_SPEED_PENALTY = 0.10
THROW_DELAY = (0.8, 0.9)
AIM_SPREAD = 0.03
AIM_SPEED_PENALTY = 0.05
REACH_SWAY_GAIN = 150.0
REACH_SWAY_HALF_WIDTH = 0.3
CABLE_CHECK_INTERVAL = 10
NOISE_HOLD = 0.01
BASELINE_EMG = 0.005


@dataclass(frozen=True)
class TrialScript:
    trial_id: int
    direction: Direction
    perturbation_force: float
    t_perturb_onset: float  # after the VR onset
    perturbation_duration: float = None
    ff_enabled: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.perturbation_duration is None:
            object.__setattr__(self, "perturbation_duration", synergy_settings.PERTURBATION_DURATION)
        if not 0.0 <= self.t_perturb_onset <= synergy_settings.ONSET_WINDOW:
            raise SimulationError(f"Perturbation onset {self.t_perturb_onset} s is outside "
                                  f"[0, {synergy_settings.ONSET_WINDOW}] s")
        if self.perturbation_force < 0:
            raise SimulationError(f"Perturbation force must be non-negative, got {self.perturbation_force}")

    def as_data(self):
        return {
            "trial_id": self.trial_id,
            "direction": self.direction,
            "perturbation_force_N": self.perturbation_force,
            "t_perturb_onset": self.t_perturb_onset,
            "perturbation_duration": self.perturbation_duration,
            "ff_enabled": self.ff_enabled,
            "seed": self.seed
        }


def schedule_trials(count: int, seed: int = None, thresholds=None, ff_enabled: bool = False,
                    first_trial_id: int = 1) -> List[TrialScript]:
    """A session's scripts: directions balanced over the four labels in seeded random order."""
    sequence = np.random.SeedSequence(seed)
    rng = np.random.default_rng(sequence)
    directions = [DIRECTIONS[index % len(DIRECTIONS)] for index in range(count)]
    directions = [directions[index] for index in rng.permutation(count)]
    onsets = rng.uniform(0.0, synergy_settings.ONSET_WINDOW, count)
    trial_seeds = sequence.spawn(count)
    thresholds = thresholds or {}
    return [
        TrialScript(
            trial_id=first_trial_id + index,
            direction=direction,
            perturbation_force=float(thresholds.get(direction, 0.0)),
            t_perturb_onset=float(onsets[index]),
            ff_enabled=ff_enabled,
            seed=int(trial_seeds[index].generate_state(1)[0])
        )
        for index, direction in enumerate(directions)
    ]


def vr_score(hit_radius_fraction: float) -> int:
    """Ten rings: 10 at the bullseye, one point less per tenth of the target radius, 0 outside."""
    if hit_radius_fraction < 0:
        raise SimulationError(f"Hit radius cannot be negative, got {hit_radius_fraction}")
    return int(min(10, max(0, 10 - np.floor(10 * hit_radius_fraction))))


def _reach_sway(t, t_catch: float, offset: np.ndarray) -> np.ndarray:
    """Pelvic force (N) of leaning toward the ball: a raised-cosine lean centred on the catch."""
    phase = np.clip((t - t_catch) / REACH_SWAY_HALF_WIDTH, -1.0, 1.0)
    envelope = 0.5 * (1.0 + np.cos(np.pi * phase))
    lean = np.array([offset[0], np.linalg.norm(offset)]) * REACH_SWAY_GAIN
    return envelope[:, np.newaxis] * lean


def _grid(t_stop: float, rate: float) -> np.ndarray:
    return np.arange(int(np.ceil(t_stop * rate - 1e-9)) + 1) / rate


def _plate_streams(body, t, positions, velocities, cops, plate_origins):
    origins = np.asarray(plate_origins, dtype=float)
    cop_mm = cops * 1000.0
    right_share = np.clip((cop_mm[:, 0] - origins[0, 0]) / (origins[1, 0] - origins[0, 0]), 0.05, 0.95)
    shares = np.column_stack([1.0 - right_share, right_share])
    weighted_origin = shares @ origins
    local = (cop_mm - weighted_origin) / 1000.0
    shear = -body.mass * (body.stiffness * positions + body.damping * velocities)
    streams = []
    for plate_id in range(2):
        fz = shares[:, plate_id] * body.body_weight
        wrench = np.column_stack([
            shares[:, plate_id] * shear[:, 0],
            shares[:, plate_id] * shear[:, 1],
            fz,
            fz * local[:, 1],
            -fz * local[:, 0],
            np.zeros_like(fz),
        ])
        streams.append(PlateStream(plate_id=plate_id, t=t, wrench=wrench))
    return tuple(streams)


def _sample(t_source, values, t_target):
    indices = np.clip(np.round(t_target / (t_source[1] - t_source[0])).astype(int), 0, len(t_source) - 1)
    return values[indices]


def run_trial(rig: RigModel, script: TrialScript, ground_truth: GroundTruth = None, boundary: BalanceBoundary = None,
              subject_id: str = "SIM", group: Group = Group.NOFF, session: int = 1, noise: float = 0.0,
              postural_noise: float = 0.0, reach_sway: bool = True, plate_origins=None) -> TrialRecording:
    """
    Simulate one catch-and-throw trial and record it in the format the analysis reads.

    Recording starts at 0; the VR scene starts after the pre-onset coverage, the perturbation follows after
    the script's onset delay, and the trial ends at the throw or when the task window closes.
    """
    dt = synergy_settings.SIM_DT
    body = rig.body
    rng = np.random.default_rng(script.seed)
    plate_origins = plate_origins or synergy_settings.PLATE_ORIGINS
    if script.ff_enabled and boundary is None:
        raise SimulationError("Force field is enabled but no balance boundary is given")

    t_vr = synergy_settings.PRE_ONSET_COVERAGE
    t_robust = t_vr + script.t_perturb_onset
    t_catch = t_vr + BALL_LAUNCH_DISTANCE / BALL_SPEED
    t_window_end = t_vr + synergy_settings.TRIAL_WINDOW
    t_stop = t_window_end + 1.0 / synergy_settings.MARKER_RATE

    radius = UNCERTAINTY_RADIUS * np.sqrt(rng.uniform())
    angle = rng.uniform(0.0, 2 * np.pi)
    offset = radius * np.array([np.cos(angle), np.sin(angle)])
    throw_delay = rng.uniform(*THROW_DELAY)
    aim_error = rng.normal(0.0, AIM_SPREAD)

    t = np.arange(int(round(t_stop / dt)) + 1) * dt
    push = np.zeros((t.size, 2))
    push[(t >= t_robust) & (t < t_robust + script.perturbation_duration)] = (
        DIRECTION_VECTORS[script.direction] * script.perturbation_force
    )
    task = np.zeros((t.size, 2))
    if reach_sway:
        task += _reach_sway(t, t_catch, offset)
    if postural_noise:
        held = rng.normal(0.0, postural_noise, (int(np.ceil(t_stop / NOISE_HOLD)) + 1, 2))
        task += held[(t / NOISE_HOLD).astype(int)]

    positions = np.zeros((t.size, 2))
    velocities = np.zeros((t.size, 2))
    cops = np.zeros((t.size, 2))
    state = BodyState()
    peak_tension = 0.0
    for step in range(1, t.size):
        robot = push[step - 1]
        if script.ff_enabled:
            robot = robot + assistive_force(boundary, state.pelvic_xy, rig.force_field_gain,
                                            rig.force_field_saturation)
        if step % CABLE_CHECK_INTERVAL == 0 and np.any(robot):
            peak_tension = max(peak_tension, float(cable_tensions(rig, state.position, robot).max()))
        state = step_body(body, state, task[step - 1] + robot, dt)
        if state.stepping:
            logger.debug("Trial %d: stepping at %.3f s", script.trial_id, state.t)
        positions[step], velocities[step], cops[step] = state.position, state.velocity, state.cop

    catch_speed = float(np.linalg.norm(velocities[int(round(t_catch / dt))]))
    caught = HAND_REACH_ERROR * radius + REACH_SPEED_PENALTY * catch_speed <= HAND_RADIUS
    thrown = caught and t_catch + throw_delay <= t_window_end
    t_end = t_catch + throw_delay if thrown else t_window_end
    score = 0
    if thrown:
        throw_speed = float(np.linalg.norm(velocities[int(round(t_end / dt))]))
        miss_angle = abs(aim_error) + AIM_SPEED_PENALTY * throw_speed
        score = vr_score(TARGET_DISTANCE * np.tan(miss_angle) / TARGET_RADIUS)
    logger.debug("Trial %d: caught=%s thrown=%s score=%d peak tension %.1f N", script.trial_id, caught, thrown,
                 score, peak_tension)

    t_record = t_end + 1.0 / synergy_settings.MARKER_RATE
    plate_t = _grid(t_record, synergy_settings.PLATE_RATE)
    pelvic_t = _grid(t_record, synergy_settings.MARKER_RATE)
    emg_t = _grid(t_record, synergy_settings.EMG_RATE)
    if ground_truth is not None:
        emg = synthesize_emg(ground_truth, script.direction, emg_t, t_robust, rng, noise=noise)
    else:
        emg = BASELINE_EMG * rng.standard_normal((CHANNEL_COUNT, emg_t.size))
    recording = TrialRecording(
        trial_id=script.trial_id,
        subject_id=subject_id,
        group=Group(group),
        direction=script.direction,
        session=session,
        rate_emg=synergy_settings.EMG_RATE,
        rate_plate=synergy_settings.PLATE_RATE,
        rate_marker=synergy_settings.MARKER_RATE,
        t_vr_onset=t_vr,
        t_robust_onset=t_robust,
        t_end=t_end,
        outcome=Outcome(caught=caught, thrown=thrown, score=score),
        emg_t=emg_t,
        emg=emg,
        plates=_plate_streams(body, plate_t, _sample(t, positions, plate_t), _sample(t, velocities, plate_t),
                              _sample(t, cops, plate_t), plate_origins),
        pelvic_t=pelvic_t,
        pelvic_xy=_sample(t, positions, pelvic_t) * 1000.0
    )
    recording.validate()
    return recording
