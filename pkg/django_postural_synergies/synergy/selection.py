import dataclasses
import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from django_postural_synergies.exceptions import FactorizationError
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.synergy.factorization import SynergySet, matrix_of, nmf_factorize, vaf
from django_postural_synergies.synergy.utils import PerSynergyVaf

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ModelSelection:
    n_syn: int
    vaf_scan: Dict[int, float]
    criterion: float
    criterion_met: bool
    sets: Dict[int, SynergySet]

    @property
    def selected(self) -> SynergySet:
        return self.sets[self.n_syn]

    def as_data(self):
        return {
            "n_syn": self.n_syn,
            "criterion": self.criterion,
            "criterion_met": self.criterion_met,
            "vaf_scan": {str(n): value for n, value in sorted(self.vaf_scan.items())}
        }


def select_n_syn(V, criterion: float = None, seed: int = None, n_max: int = None, **factorize_kwargs) -> ModelSelection:
    """
    Factorize V for n = 1..n_max and pick the least n whose total VAF exceeds the criterion.

    If no n reaches the criterion, n_max is selected and ``criterion_met`` is False.
    """
    values, _, _ = matrix_of(V)
    criterion = synergy_settings.VAF_CRITERION if criterion is None else criterion
    n_max = min(n_max or synergy_settings.MAX_SYNERGIES, *values.shape)
    sets = {}
    for n in range(1, n_max + 1):
        sets[n] = nmf_factorize(V, n, seed=seed, **factorize_kwargs)
    scan = {n: synergy_set.vaf_total for n, synergy_set in sets.items()}
    for n in range(2, n_max + 1):
        if scan[n] < scan[n - 1]:
            logger.warning("VAF dropped from %.3f to %.3f between n=%d and n=%d", scan[n - 1], scan[n], n - 1, n)
    passing = [n for n, value in scan.items() if value > criterion]
    criterion_met = bool(passing)
    n_syn = passing[0] if passing else n_max
    if not criterion_met:
        logger.warning("VAF criterion %.1f%% not reached up to n=%d", criterion, n_max)
    sets = {
        n: dataclasses.replace(synergy_set, vaf_scan=scan, criterion_met=criterion_met)
        for n, synergy_set in sets.items()
    }
    return ModelSelection(n_syn=n_syn, vaf_scan=scan, criterion=criterion, criterion_met=criterion_met, sets=sets)


def per_synergy_vaf(V, synergy_set: SynergySet, mode: str = None) -> List[float]:
    """
    VAF attributed to each synergy.

    ``rank1`` scores each synergy's rank-1 reconstruction alone; ``incremental`` scores the VAF gained by adding
    synergies in index order, so the values sum to the total VAF.
    """
    values, _, _ = matrix_of(V)
    mode = PerSynergyVaf(mode or synergy_settings.PER_SYNERGY_VAF)
    W, C = synergy_set.W, synergy_set.C
    if W.shape[0] != values.shape[0] or C.shape[1] != values.shape[1]:
        raise FactorizationError("Synergy set does not match the matrix shape")
    if mode == PerSynergyVaf.RANK1:
        return [vaf(values, np.outer(W[:, index], C[index])) for index in range(synergy_set.n_syn)]
    cumulative = [0.0]
    for index in range(1, synergy_set.n_syn + 1):
        cumulative.append(vaf(values, W[:, :index] @ C[:index]))
    return list(np.diff(cumulative))
