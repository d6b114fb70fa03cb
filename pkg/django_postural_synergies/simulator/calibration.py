import logging
from dataclasses import dataclass

import numpy as np

from django_postural_synergies.core.utils import Direction
from django_postural_synergies.exceptions import CableError
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.simulator.rig import BodyModel, BodyState, RigModel, cable_tensions, step_body
from django_postural_synergies.simulator.utils import DIRECTION_VECTORS, CalibrationFlag

logger = logging.getLogger(__name__)

SETTLE_TIME = 1.5


@dataclass(frozen=True)
class CalibrationResult:
    direction: Direction
    force: float
    fraction: float
    flag: CalibrationFlag = CalibrationFlag.OK
    attempts: int = 0

    @property
    def flagged(self) -> bool:
        return self.flag != CalibrationFlag.OK

    def as_data(self):
        return {
            "direction": self.direction,
            "force_N": self.force,
            "fraction": self.fraction,
            "flag": self.flag,
            "attempts": self.attempts
        }


def pulse_causes_step(body: BodyModel, direction: Direction, force: float, duration: float = None,
                      dt: float = None, settle: float = SETTLE_TIME) -> bool:
    """Push the body at rest with a rectangular pulse and report whether it has to step before settling."""
    duration = duration or synergy_settings.PERTURBATION_DURATION
    dt = dt or synergy_settings.SIM_DT
    push = DIRECTION_VECTORS[Direction(direction)] * force
    idle = np.zeros(2)
    pulse_steps = int(round(duration / dt))
    state = BodyState()
    for step in range(int(round((duration + settle) / dt))):
        state = step_body(body, state, push if step < pulse_steps else idle, dt)
        if state.stepped:
            return True
    return False


def calibrate_threshold(rig: RigModel, direction: Direction, start: float = None, step: float = None,
                        maximum: float = None, duration: float = None, dt: float = None) -> CalibrationResult:
    """
    Raise the pulse from ``start`` body weights in ``step`` increments until the body steps, returning the
    last force it withstood.

    Falling at the first pulse returns the starting force; never falling up to ``maximum`` body weights, or up
    to the largest pulse the cables can deliver, returns that cap. Both cases are flagged.
    """
    direction = Direction(direction)
    start = synergy_settings.CALIBRATION_START if start is None else start
    step = step or synergy_settings.CALIBRATION_STEP
    maximum = synergy_settings.CALIBRATION_MAX if maximum is None else maximum
    body = rig.body
    withstood = None
    attempts = 0
    while True:
        fraction = round(start + attempts * step, 10)
        if fraction > maximum + 1e-12:
            break
        force = fraction * body.body_weight
        try:
            cable_tensions(rig, np.zeros(2), DIRECTION_VECTORS[direction] * force)
        except CableError:
            logger.warning("Cables cannot deliver %.1f N %s; calibration stops", force, direction.value)
            break
        attempts += 1
        if pulse_causes_step(body, direction, force, duration=duration, dt=dt):
            if withstood is None:
                logger.warning("Body steps at the starting pulse of %.2f body weight (%s)", fraction, direction.value)
                return CalibrationResult(direction, force, fraction, CalibrationFlag.FELL_AT_START, attempts)
            return CalibrationResult(direction, withstood * body.body_weight, withstood, attempts=attempts)
        withstood = fraction
    if withstood is None:
        withstood = start
    logger.warning("Body never stepped up to %.2f body weight (%s)", withstood, direction.value)
    return CalibrationResult(direction, withstood * body.body_weight, withstood, CalibrationFlag.NEVER_FELL, attempts)
