import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from django_postural_synergies.core.types import MUSCLE_CHANNELS, MuscleChannel
from django_postural_synergies.exceptions import FactorizationError
from django_postural_synergies.settings import synergy_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynergyMatching:
    pairs: Tuple[Tuple[int, int, float], ...]
    unmatched_a: Tuple[int, ...]
    unmatched_b: Tuple[int, ...]

    @property
    def mean_similarity(self) -> float:
        return float(np.mean([cosine for _, _, cosine in self.pairs])) if self.pairs else float("nan")

    def as_data(self):
        return {
            "pairs": [{"a": a, "b": b, "cosine": cosine} for a, b, cosine in self.pairs],
            "unmatched_a": list(self.unmatched_a),
            "unmatched_b": list(self.unmatched_b)
        }


def _synergy_vectors(value) -> np.ndarray:
    return np.asarray(getattr(value, "W", value), dtype=float)


def cosine_matrix(W_a, W_b) -> np.ndarray:
    """Cosine similarity between every column of W_a and every column of W_b; zero columns score 0."""
    norms_a = np.linalg.norm(W_a, axis=0)
    norms_b = np.linalg.norm(W_b, axis=0)
    unit_a = np.divide(W_a, norms_a, out=np.zeros_like(W_a), where=norms_a > 0)
    unit_b = np.divide(W_b, norms_b, out=np.zeros_like(W_b), where=norms_b > 0)
    return unit_a.T @ unit_b


def match_synergies(a, b) -> SynergyMatching:
    """
    Pair synergy vectors of two sets one-to-one so the summed cosine similarity is maximal.

    When the sets differ in size the surplus synergies of the larger set are reported as unmatched.
    """
    W_a = _synergy_vectors(a)
    W_b = _synergy_vectors(b)
    if W_a.shape[0] != W_b.shape[0]:
        raise FactorizationError(f"Synergy sets have different muscle counts: {W_a.shape[0]} vs {W_b.shape[0]}")
    similarity = cosine_matrix(W_a, W_b)
    rows, columns = linear_sum_assignment(similarity, maximize=True)
    pairs = tuple(sorted((int(row), int(column), float(similarity[row, column])) for row, column in zip(rows, columns)))
    if W_a.shape[1] != W_b.shape[1]:
        logger.debug("Matching %d against %d synergies leaves %d unmatched", W_a.shape[1], W_b.shape[1],
                     abs(W_a.shape[1] - W_b.shape[1]))
    return SynergyMatching(
        pairs=pairs,
        unmatched_a=tuple(sorted(set(range(W_a.shape[1])) - set(rows.tolist()))),
        unmatched_b=tuple(sorted(set(range(W_b.shape[1])) - set(columns.tolist())))
    )


def involved_muscles(synergy_set, threshold: float = None,
                     channels: Tuple[MuscleChannel, ...] = MUSCLE_CHANNELS) -> List[List[MuscleChannel]]:
    """Muscles whose weight reaches the threshold, per synergy, in channel order."""
    threshold = synergy_settings.INVOLVEMENT_THRESHOLD if threshold is None else threshold
    W = _synergy_vectors(synergy_set)
    return [[channels[row] for row in np.flatnonzero(W[:, column] >= threshold)] for column in range(W.shape[1])]
