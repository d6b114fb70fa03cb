from enum import Enum

import numpy as np

from django_postural_synergies.core.utils import Direction

GRAVITY = 9.81

# unit push direction in the plate frame: x medio-lateral toward the dominant side, y forward
DIRECTION_VECTORS = {
    Direction.FORWARD: np.array([0.0, 1.0]),
    Direction.BACKWARD: np.array([0.0, -1.0]),
    Direction.DOMINANT: np.array([1.0, 0.0]),
    Direction.NONDOMINANT: np.array([-1.0, 0.0]),
}


class CalibrationFlag(str, Enum):
    OK = "ok"
    FELL_AT_START = "fell_at_start"
    NEVER_FELL = "never_fell"
