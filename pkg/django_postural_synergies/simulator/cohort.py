import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from django_postural_synergies.core.ingest import save_cohort
from django_postural_synergies.core.types import Cohort, Subject
from django_postural_synergies.core.utils import DIRECTIONS, Direction, Group, Handedness
from django_postural_synergies.exceptions import SimulationError
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.simulator.boundary import BalanceBoundary, build_boundary, circular_boundary
from django_postural_synergies.simulator.calibration import calibrate_threshold
from django_postural_synergies.simulator.protocol import run_trial, schedule_trials
from django_postural_synergies.simulator.rig import BodyModel, RigModel
from django_postural_synergies.simulator.synthesis import MAX_GROUND_TRUTH, GroundTruth, ground_truth_synergies

logger = logging.getLogger(__name__)

GROUND_TRUTH_FILENAME = "ground_truth.json"


@dataclass(frozen=True)
class GroupScenario:
    group: Group
    subjects: int
    n_syn: int

    def __post_init__(self):
        object.__setattr__(self, "group", Group(self.group))
        if self.subjects < 1:
            raise SimulationError(f"Group {self.group.value} needs at least one subject")
        if not 1 <= self.n_syn <= MAX_GROUND_TRUTH:
            raise SimulationError(f"Group {self.group.value}: ground-truth synergy count {self.n_syn} is outside "
                                  f"1..{MAX_GROUND_TRUTH}")

    @property
    def ff_enabled(self) -> bool:
        return self.group == Group.FF

    def as_data(self):
        return {"group": self.group, "subjects": self.subjects, "n_syn": self.n_syn}


@dataclass(frozen=True, eq=False)
class Scenario:
    groups: Tuple[GroupScenario, ...] = (GroupScenario(Group.FF, 1, 4), GroupScenario(Group.NOFF, 1, 8))
    rig: RigModel = field(default_factory=RigModel)
    boundary: BalanceBoundary = field(default_factory=lambda: circular_boundary(50.0))
    trials_per_session: int = None
    sessions: int = None
    noise: float = 0.05
    postural_noise: float = 0.0
    seed: int = 0
    thresholds: Dict[Direction, float] = None

    def __post_init__(self):
        if self.trials_per_session is None:
            object.__setattr__(self, "trials_per_session", synergy_settings.TRIALS_PER_SESSION)
        if self.sessions is None:
            object.__setattr__(self, "sessions", synergy_settings.SESSIONS_PER_SUBJECT)
        if not self.groups:
            raise SimulationError("Scenario has no groups")
        if self.trials_per_session < len(DIRECTIONS):
            raise SimulationError(f"A session needs at least {len(DIRECTIONS)} trials to cover every direction")
        if self.noise < 0 or self.postural_noise < 0:
            raise SimulationError("Noise levels must be non-negative")
        if self.thresholds is not None and set(self.thresholds) != set(DIRECTIONS):
            raise SimulationError("Scenario thresholds must name every direction")

    def as_data(self):
        return {
            "groups": [group.as_data() for group in self.groups],
            "rig": self.rig.as_data(),
            "boundary": self.boundary.as_data(),
            "trials_per_session": self.trials_per_session,
            "sessions": self.sessions,
            "noise": self.noise,
            "postural_noise": self.postural_noise,
            "seed": self.seed,
            "thresholds_N": None if self.thresholds is None else {
                direction.value: value for direction, value in self.thresholds.items()
            }
        }


def scenario_from_data(data: dict) -> Scenario:
    rig_data = dict(data.get("rig", {}))
    body = BodyModel(**rig_data.pop("body", {}))
    if "pulley_positions" in rig_data:
        rig_data["pulley_positions"] = np.asarray(rig_data["pulley_positions"], dtype=float)
    rig = RigModel(body=body, **rig_data)
    boundary_data = data.get("boundary", {"radius_mm": 50.0})
    if "points_mm" in boundary_data:
        boundary = build_boundary(boundary_data["points_mm"], boundary_data.get("origin_mm", (0.0, 0.0)))
    else:
        boundary = circular_boundary(float(boundary_data["radius_mm"]), boundary_data.get("origin_mm", (0.0, 0.0)))
    kwargs = {key: data[key] for key in ("trials_per_session", "sessions", "noise", "postural_noise", "seed")
              if key in data}
    if "thresholds_N" in data:
        kwargs["thresholds"] = {Direction(key): float(value) for key, value in data["thresholds_N"].items()}
    groups = tuple(GroupScenario(**entry) for entry in data["groups"]) if "groups" in data else Scenario.groups
    return Scenario(groups=groups, rig=rig, boundary=boundary, **kwargs)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SimulationError(f"Scenario file not found: {path}")
    except ValueError as exc:
        raise SimulationError(f"Scenario file {path} is not valid JSON: {exc}")
    try:
        return scenario_from_data(data)
    except TypeError as exc:
        raise SimulationError(f"Invalid scenario {path}: {exc}")


def calibrate_rig(rig: RigModel) -> Dict:
    return {direction: calibrate_threshold(rig, direction) for direction in DIRECTIONS}


def generate_synthetic_cohort(scenario: Scenario, directory=None, seed: int = None):
    """
    Simulate every subject, session and trial of the scenario.

    Trial seeds derive from the root seed by spawning one child per group, subject and session in that order.
    Returns the cohort and the ground truth per group; with a directory both are written there.
    """
    seed = scenario.seed if seed is None else seed
    root = np.random.SeedSequence(seed)
    if scenario.thresholds is None:
        calibration = calibrate_rig(scenario.rig)
        thresholds = {direction: result.force for direction, result in calibration.items()}
    else:
        calibration = {}
        thresholds = {direction: scenario.thresholds[direction] for direction in DIRECTIONS}
    subjects = []
    ground_truths = {}
    for group_scenario, group_sequence in zip(scenario.groups, root.spawn(len(scenario.groups))):
        group = group_scenario.group
        truth_sequence, *subject_sequences = group_sequence.spawn(group_scenario.subjects + 1)
        ground_truth = ground_truth_synergies(group_scenario.n_syn, seed=int(truth_sequence.generate_state(1)[0]))
        ground_truths[group] = ground_truth
        for number, subject_sequence in enumerate(subject_sequences, start=1):
            subject_id = f"{group.value}{number:02d}"
            right_handed = np.random.default_rng(subject_sequence).uniform() < 0.9
            handedness = Handedness.RIGHT if right_handed else Handedness.LEFT
            sessions = {}
            for session, session_sequence in enumerate(subject_sequence.spawn(scenario.sessions), start=1):
                scripts = schedule_trials(
                    scenario.trials_per_session,
                    seed=int(session_sequence.generate_state(1)[0]),
                    thresholds=thresholds,
                    ff_enabled=group_scenario.ff_enabled
                )
                sessions[session] = [
                    run_trial(
                        scenario.rig, script,
                        ground_truth=ground_truth,
                        boundary=scenario.boundary,
                        subject_id=subject_id,
                        group=group,
                        session=session,
                        noise=scenario.noise,
                        postural_noise=scenario.postural_noise
                    )
                    for script in scripts
                ]
            subjects.append(Subject(
                subject_id=subject_id,
                group=group,
                handedness=handedness,
                body_weight_n=scenario.rig.body.body_weight,
                thresholds_n=dict(thresholds),
                sessions=sessions
            ))
            logger.info("Simulated subject %s (%d sessions)", subject_id, scenario.sessions)
    cohort = Cohort(
        subjects=subjects,
        trials_per_session=scenario.trials_per_session,
        plate_origins=tuple(tuple(origin) for origin in synergy_settings.PLATE_ORIGINS)
    )
    if directory is not None:
        save_cohort(cohort, directory)
        write_ground_truth(ground_truths, scenario, directory, seed, calibration)
    return cohort, ground_truths


def write_ground_truth(ground_truths: Dict[Group, GroundTruth], scenario: Scenario, directory, seed: int,
                       calibration=None) -> Path:
    data = {
        "seed": seed,
        "scenario": scenario.as_data(),
        "groups": {group.value: truth.as_data() for group, truth in ground_truths.items()},
        "calibration": {direction.value: result.as_data() for direction, result in (calibration or {}).items()}
    }
    path = Path(directory) / GROUND_TRUTH_FILENAME
    path.write_text(
        json.dumps(data, cls=synergy_settings.JSON_ENCODER, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return path
