from enum import Enum

CHANNEL_COUNT = 14
PLATE_COLUMNS = ("fx", "fy", "fz", "mx", "my", "mz")
EMG_COLUMNS = tuple(f"ch{channel:02d}" for channel in range(CHANNEL_COUNT))


class Side(str, Enum):
    DOMINANT = "dominant"
    NONDOMINANT = "nondominant"


class Muscle(str, Enum):
    TA = "TA"
    LG = "LG"
    RF = "RF"
    BF = "BF"
    GM = "GM"
    ABD = "ABD"
    ES = "ES"


class Group(str, Enum):
    FF = "FF"
    NOFF = "NoFF"


class Handedness(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    DOMINANT = "dominant"
    NONDOMINANT = "nondominant"


class RawDirection(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    LEFT = "left"
    RIGHT = "right"


class Phase(str, Enum):
    APR = "APR"
    VPR = "VPR"


class Bin(str, Enum):
    BK = "BK"
    APR1 = "APR1"
    APR2 = "APR2"
    APR3 = "APR3"
    VPR1 = "VPR1"
    VPR2 = "VPR2"
    VPR3 = "VPR3"


DIRECTIONS = tuple(Direction)
BINS = tuple(Bin)
PHASE_BINS = {
    Phase.APR: (Bin.APR1, Bin.APR2, Bin.APR3),
    Phase.VPR: (Bin.VPR1, Bin.VPR2, Bin.VPR3),
}


def canonical_direction(label: str, handedness: Handedness) -> Direction:
    """Map a raw perturbation label onto the handedness-relative direction."""
    try:
        return Direction(label)
    except ValueError:
        pass
    raw = RawDirection(label)
    if raw in (RawDirection.LEFT, RawDirection.RIGHT):
        same_side = raw.value == Handedness(handedness).value
        return Direction.DOMINANT if same_side else Direction.NONDOMINANT
    return Direction(raw.value)
