"""
Ground-truth synergies and the activation signals they generate.

Every synergy owns a disjoint set of muscles and a home in each phase: an APR1 burst followed by a voluntary
response in one direction, or background activity in one direction, which both phases share through the BK
bin. Synergies with fewer muscles get extra activity (a second APR cell, and a response that starts in VPR1
and leaves a VPR3 tail) so that every synergy carries the same share of variance once each muscle is scaled
to its own maximum. Dropping any one synergy then costs 1/n of the variance. Up to eight synergies keep
every phase cell private to one synergy; beyond that, early VPR1 homes share their direction's response.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from django_postural_synergies.binning import FIXED_OFFSETS, VPR_SEARCH_OFFSET, normalize_per_muscle, phase_bins
from django_postural_synergies.core.utils import BINS, CHANNEL_COUNT, DIRECTIONS, Bin, Direction, Phase
from django_postural_synergies.exceptions import SimulationError
from django_postural_synergies.settings import synergy_settings

MAX_GROUND_TRUTH = 10
RESPONSE = "response"
BACKGROUND = "background"
EARLY = "early"
# squared norm added per unit of extra level: VPR1 at the level plus a VPR3 tail at half of it
SUSTAINED_NORM = 1.25
# voluntary response timing, seconds after the VPR search start
RESPONSE_RISE = 0.05
RESPONSE_HOLD = 0.30
RESPONSE_FALL = 0.10
TAIL_HOLD = 0.20


@dataclass(frozen=True, eq=False)
class GroundTruth:
    W: np.ndarray  # 14 x n, columns peak at 1
    C: np.ndarray  # n x (bins x directions), bins-major over every bin
    seed: int = None

    @property
    def n_syn(self) -> int:
        return self.W.shape[1]

    @staticmethod
    def column(name: Bin, direction: Direction) -> int:
        return BINS.index(Bin(name)) * len(DIRECTIONS) + DIRECTIONS.index(Direction(direction))

    def phase_coefficients(self, phase: Phase, include_bk: bool = None) -> np.ndarray:
        columns = [self.column(name, direction) for name in phase_bins(phase, include_bk) for direction in DIRECTIONS]
        return self.C[:, columns]

    def coefficients(self, name: Bin, direction: Direction) -> np.ndarray:
        return self.C[:, self.column(name, direction)]

    def as_data(self):
        return {
            "n_syn": self.n_syn,
            "seed": self.seed,
            "W": self.W,
            "C": self.C,
            "column_labels": [[name.value, direction.value] for name in BINS for direction in DIRECTIONS]
        }


def _group_sizes(n: int) -> Tuple[int, ...]:
    base, extra = divmod(CHANNEL_COUNT, n)
    return (base + 1,) * extra + (base,) * (n - extra)


def _home_slots(rng: np.random.Generator):
    slots = []
    for kind in (RESPONSE, BACKGROUND, EARLY):
        slots.extend((kind, DIRECTIONS[index]) for index in rng.permutation(len(DIRECTIONS)))
    return slots


def ground_truth_synergies(n: int, seed: int = None) -> GroundTruth:
    if not 1 <= n <= MAX_GROUND_TRUTH:
        raise SimulationError(f"Ground-truth synergy count must be in 1..{MAX_GROUND_TRUTH}, got {n}")
    rng = np.random.default_rng(seed)
    sizes = _group_sizes(n)
    muscles = np.split(rng.permutation(CHANNEL_COUNT), np.cumsum(sizes)[:-1])
    W = np.zeros((CHANNEL_COUNT, n))
    for index, rows in enumerate(muscles):
        W[rows, index] = rng.uniform(0.75, 1.0, len(rows))
        W[:, index] /= W[:, index].max()

    largest = max(sizes)
    smaller = [index for index, size in enumerate(sizes) if size < largest]
    larger = [index for index, size in enumerate(sizes) if size == largest]
    # smaller synergies take the response homes first, which have room for the sustained response
    order = [smaller[index] for index in rng.permutation(len(smaller))]
    order += [larger[index] for index in rng.permutation(len(larger))]
    C = np.zeros((n, len(BINS) * len(DIRECTIONS)))
    responses = {}
    used = set()
    for synergy, (kind, direction) in zip(order, _home_slots(rng)):
        if kind == RESPONSE:
            cells = (Bin.APR1, Bin.VPR2)
            responses[synergy] = direction
        elif kind == BACKGROUND:
            cells = (Bin.BK,)
        else:
            cells = (Bin.APR2, Bin.VPR1)
        for name in cells:
            C[synergy, GroundTruth.column(name, direction)] = 1.0
            used.add(GroundTruth.column(name, direction))

    free = [GroundTruth.column(name, direction) for name in (Bin.APR3, Bin.APR2) for direction in DIRECTIONS]
    free = [column for column in free if column not in used]
    for position, synergy in enumerate(smaller):
        extra = largest / sizes[synergy] - 1.0
        C[synergy, free[position]] = np.sqrt(extra)
        if synergy in responses:
            level = np.sqrt(extra / SUSTAINED_NORM)
            C[synergy, GroundTruth.column(Bin.VPR1, responses[synergy])] = level
            C[synergy, GroundTruth.column(Bin.VPR3, responses[synergy])] = level / 2.0
    return GroundTruth(W=W, C=C, seed=seed)


def synthesize_activation_matrix(ground_truth: GroundTruth, phase: Phase = Phase.APR, noise: float = 0.05,
                                 seed: int = None, include_bk: bool = None) -> np.ndarray:
    """Noisy muscles x (bins x directions) matrix of one phase, each muscle scaled to a maximum of 1."""
    rng = np.random.default_rng(seed)
    clean = ground_truth.W @ ground_truth.phase_coefficients(phase, include_bk)
    noisy = np.clip(clean * (1.0 + noise * rng.standard_normal(clean.shape)), 0.0, None)
    return normalize_per_muscle(noisy, allow_silent=True)


def _ramp(fraction) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(np.pi * np.clip(fraction, 0.0, 1.0)))


def coefficient_profile(ground_truth: GroundTruth, direction: Direction, t, t_onset: float) -> np.ndarray:
    """
    Synergy coefficients over time (n x N) for one trial.

    The background level holds until the first automatic bin and fixed bins are piecewise constant. The
    voluntary response rises from the VPR1 level to the VPR2 level, holds, falls to twice the VPR3 level,
    holds again and stops, so that the window centred where the response stops averages to the VPR3 level.
    Before the response starts and after it stops the synergy is silent.
    """
    t = np.asarray(t, dtype=float)
    width = synergy_settings.BIN_WIDTH
    relative = t - t_onset
    level = {name: ground_truth.coefficients(name, direction)[:, np.newaxis] for name in BINS}
    profile = np.zeros((ground_truth.n_syn, t.size))
    profile[:, relative < FIXED_OFFSETS[Bin.APR1]] = level[Bin.BK]
    for name in (Bin.APR1, Bin.APR2, Bin.APR3, Bin.VPR1):
        mask = (relative >= FIXED_OFFSETS[name]) & (relative < FIXED_OFFSETS[name] + width)
        profile[:, mask] = level[name]

    since = relative - VPR_SEARCH_OFFSET
    rise_end, hold_end, fall_end, tail_end = np.cumsum((RESPONSE_RISE, RESPONSE_HOLD, RESPONSE_FALL, TAIL_HOLD))
    tail = 2.0 * level[Bin.VPR3]
    rising = (since >= 0.0) & (since < rise_end)
    profile[:, rising] = level[Bin.VPR1] + (level[Bin.VPR2] - level[Bin.VPR1]) * _ramp(since[rising] / RESPONSE_RISE)
    profile[:, (since >= rise_end) & (since < hold_end)] = level[Bin.VPR2]
    falling = (since >= hold_end) & (since < fall_end)
    fall = _ramp((since[falling] - hold_end) / RESPONSE_FALL)
    profile[:, falling] = level[Bin.VPR2] + (tail - level[Bin.VPR2]) * fall
    profile[:, (since >= fall_end) & (since < tail_end)] = tail
    return profile


def synthesize_emg(ground_truth: GroundTruth, direction: Direction, t, t_onset: float,
                   rng: np.random.Generator, noise: float = 0.0, amplitude: float = 0.5) -> np.ndarray:
    """
    Raw EMG (14 x N, mV): the muscle activations M = W c(t) modulating a white Gaussian carrier.

    ``noise`` scales a per-muscle log-normal gain drawn once per trial.
    """
    activation = ground_truth.W @ coefficient_profile(ground_truth, direction, t, t_onset)
    gains = np.exp(noise * rng.standard_normal(CHANNEL_COUNT))[:, np.newaxis] if noise else 1.0
    return amplitude * gains * activation * rng.standard_normal(activation.shape)
