"""
Non-negative matrix factorization V ~ W C with multiplicative updates for the
Frobenius loss, best of several seeded random restarts.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from django_postural_synergies.exceptions import FactorizationError
from django_postural_synergies.settings import synergy_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SynergySet:
    W: np.ndarray  # muscles x n, every column peaks at 1
    C: np.ndarray  # n x conditions
    n_syn: int
    vaf_total: float
    vaf_per_muscle: np.ndarray
    rng_seed: int
    restarts: int
    vaf_scan: Dict[int, float] = field(default_factory=dict)
    criterion_met: Optional[bool] = None
    reconstruction_error: float = 0.0
    iterations: int = 0
    error_history: Tuple[float, ...] = ()
    row_labels: tuple = ()
    column_labels: tuple = ()

    @property
    def reconstruction(self) -> np.ndarray:
        return self.W @ self.C

    def as_data(self):
        return {
            "W": self.W,
            "C": self.C,
            "n_syn": self.n_syn,
            "vaf_total": self.vaf_total,
            "vaf_per_muscle": [None if np.isnan(value) else float(value) for value in self.vaf_per_muscle],
            "vaf_scan": {str(n): value for n, value in sorted(self.vaf_scan.items())},
            "criterion_met": self.criterion_met,
            "rng_seed": self.rng_seed,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "reconstruction_error": self.reconstruction_error,
            "row_labels": [getattr(label, "label", str(label)) for label in self.row_labels],
            "column_labels": [[getattr(item, "value", item) for item in label] for label in self.column_labels]
        }


def matrix_of(V):
    """Return (values, row_labels, column_labels) for an array or a binned activation matrix."""
    if hasattr(V, "values") and hasattr(V, "column_labels"):
        return np.asarray(V.values, dtype=float), tuple(V.row_labels), tuple(V.column_labels)
    return np.atleast_2d(np.asarray(V, dtype=float)), (), ()


def vaf(V, V_r) -> float:
    """Variability accounted for, in percent: (1 - sum((V - V_r)^2) / sum(V^2)) * 100."""
    V, _, _ = matrix_of(V)
    V_r = np.asarray(V_r, dtype=float)
    if V.shape != V_r.shape:
        raise FactorizationError(f"Shape mismatch: {V.shape} vs {V_r.shape}")
    energy = np.sum(V ** 2)
    if energy == 0:
        raise FactorizationError("VAF is undefined for an all-zero matrix")
    return float((1.0 - np.sum((V - V_r) ** 2) / energy) * 100.0)


def vaf_per_muscle(V, V_r) -> np.ndarray:
    """Row-wise VAF; rows of V that are identically zero are undefined (NaN)."""
    V = np.asarray(V, dtype=float)
    V_r = np.asarray(V_r, dtype=float)
    energy = np.sum(V ** 2, axis=1)
    residual = np.sum((V - V_r) ** 2, axis=1)
    result = np.full(V.shape[0], np.nan)
    active = energy > 0
    result[active] = (1.0 - residual[active] / energy[active]) * 100.0
    return result


def _validate(V: np.ndarray, n: int) -> None:
    if np.any(~np.isfinite(V)):
        raise FactorizationError("V contains non-finite entries")
    if np.any(V < 0):
        raise FactorizationError("V contains negative entries")
    if not np.any(V > 0):
        raise FactorizationError("V is all zero")
    if not 1 <= n <= min(V.shape):
        raise FactorizationError(f"Number of synergies {n} is outside 1..{min(V.shape)}")


def multiplicative_updates(V: np.ndarray, n: int, rng: np.random.Generator, max_iter: int, tol: float,
                           epsilon: float):
    scale = np.sqrt(V.mean() / n)
    W = rng.random((V.shape[0], n)) * scale
    C = rng.random((n, V.shape[1])) * scale
    previous = np.linalg.norm(V - W @ C)
    history = [previous]
    iteration = 0
    for iteration in range(1, max_iter + 1):
        C *= (W.T @ V) / (W.T @ W @ C + epsilon)
        W *= (V @ C.T) / (W @ (C @ C.T) + epsilon)
        error = np.linalg.norm(V - W @ C)
        history.append(error)
        if abs(previous - error) <= tol * max(previous, np.finfo(float).tiny):
            break
        previous = error
    return W, C, history[-1], iteration, tuple(history)


def rescale(W: np.ndarray, C: np.ndarray):
    """Scale each synergy vector to a peak of 1 and fold the inverse scale into its coefficients."""
    peaks = W.max(axis=0)
    peaks = np.where(peaks > 0, peaks, 1.0)
    return W / peaks, C * peaks[:, np.newaxis]


def nmf_factorize(V, n: int, seed: int = None, restarts: int = None, max_iter: int = None, tol: float = None,
                  workers: int = None) -> SynergySet:
    values, row_labels, column_labels = matrix_of(V)
    seed = synergy_settings.SEED if seed is None else seed
    restarts = restarts or synergy_settings.NMF_RESTARTS
    max_iter = max_iter or synergy_settings.NMF_MAX_ITER
    tol = synergy_settings.NMF_TOL if tol is None else tol
    workers = workers or synergy_settings.NMF_WORKERS
    epsilon = synergy_settings.NMF_EPSILON
    _validate(values, n)

    children = np.random.SeedSequence(seed).spawn(restarts)

    def run(child):
        return multiplicative_updates(values, n, np.random.default_rng(child), max_iter, tol, epsilon)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, children))
    else:
        results = [run(child) for child in children]
    # ties keep the earliest restart
    best = min(range(len(results)), key=lambda index: (results[index][2], index))
    W, C, error, iterations, history = results[best]
    W, C = rescale(W, C)
    reconstruction = W @ C
    logger.debug("n=%d: best restart %d of %d, error %.6g after %d iterations", n, best, restarts, error, iterations)
    return SynergySet(
        W=W,
        C=C,
        n_syn=n,
        vaf_total=vaf(values, reconstruction),
        vaf_per_muscle=vaf_per_muscle(values, reconstruction),
        rng_seed=seed,
        restarts=restarts,
        reconstruction_error=float(error),
        iterations=iterations,
        error_history=history,
        row_labels=row_labels,
        column_labels=column_labels
    )
