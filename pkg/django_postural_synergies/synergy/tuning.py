from dataclasses import dataclass
from typing import Tuple

import numpy as np

from django_postural_synergies.core.utils import Bin, Direction
from django_postural_synergies.exceptions import FactorizationError


@dataclass(frozen=True, eq=False)
class TuningCurves:
    bins: Tuple[Bin, ...]
    directions: Tuple[Direction, ...]
    grids: np.ndarray  # n x bins x directions

    def curve(self, synergy: int, name: Bin) -> np.ndarray:
        return self.grids[synergy, self.bins.index(Bin(name))]

    def value(self, synergy: int, name: Bin, direction: Direction) -> float:
        return float(self.curve(synergy, name)[self.directions.index(Direction(direction))])

    def flatten(self) -> np.ndarray:
        return self.grids.reshape(self.grids.shape[0], -1)

    def as_data(self):
        return {
            "bins": [name.value for name in self.bins],
            "directions": [direction.value for direction in self.directions],
            "grids": self.grids
        }


def _unique(items):
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return tuple(seen)


def tuning_curves(synergy_set, column_labels=None) -> TuningCurves:
    """Reshape every row of C into a bins x directions grid following the column labels."""
    labels = tuple(column_labels or synergy_set.column_labels)
    C = synergy_set.C
    if len(labels) != C.shape[1]:
        raise FactorizationError(f"{len(labels)} column labels for {C.shape[1]} columns")
    labels = tuple((Bin(name), Direction(direction)) for name, direction in labels)
    bins = _unique(name for name, _ in labels)
    directions = _unique(direction for _, direction in labels)
    if labels != tuple((name, direction) for name in bins for direction in directions):
        raise FactorizationError("Column labels are not ordered bins-major, directions-minor")
    return TuningCurves(bins=bins, directions=directions, grids=C.reshape(C.shape[0], len(bins), len(directions)))
