"""
Time-binning of EMG envelopes around the perturbation onset.

Every bin is 75 ms wide. BK precedes the onset, APR1-3 and VPR1 are fixed
offsets after it, VPR2 is centred on each channel's envelope peak and VPR3 on
the point where the envelope falls back below a fraction of that peak.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from django_postural_synergies.core.types import MUSCLE_CHANNELS, MuscleChannel
from django_postural_synergies.core.utils import BINS, DIRECTIONS, PHASE_BINS, Bin, Direction, Group, Phase
from django_postural_synergies.exceptions import BinningError
from django_postural_synergies.settings import synergy_settings

logger = logging.getLogger(__name__)

FIXED_OFFSETS = {
    Bin.BK: -0.075,
    Bin.APR1: 0.100,
    Bin.APR2: 0.175,
    Bin.APR3: 0.250,
    Bin.VPR1: 0.325,
}
VPR_SEARCH_OFFSET = 0.400


@dataclass(frozen=True)
class Window:
    start: float
    end: float
    clipped: bool = False
    valid: bool = True

    @property
    def center(self) -> float:
        return (self.start + self.end) / 2.0

    @property
    def width(self) -> float:
        return self.end - self.start

    @classmethod
    def centered(cls, center: float, width: float, extent: Tuple[float, float]):
        start, end = center - width / 2.0, center + width / 2.0
        clipped = start < extent[0] or end > extent[1]
        return cls(max(start, extent[0]), min(end, extent[1]), clipped=clipped)

    @classmethod
    def invalid(cls):
        return cls(np.nan, np.nan, valid=False)


def fixed_windows(t_onset: float, width: float = None) -> Dict[Bin, Window]:
    width = width or synergy_settings.BIN_WIDTH
    return {name: Window(t_onset + offset, t_onset + offset + width) for name, offset in FIXED_OFFSETS.items()}


def _search_indices(t, t_onset: float, t_end: float) -> np.ndarray:
    return np.flatnonzero((t >= t_onset + VPR_SEARCH_OFFSET) & (t <= t_end))


def find_vpr_windows(t, envelope, t_onset: float, t_end: float, threshold: float = None,
                     width: float = None) -> Tuple[Window, Window]:
    threshold = synergy_settings.VPR_THRESHOLD if threshold is None else threshold
    width = width or synergy_settings.BIN_WIDTH
    t = np.asarray(t, dtype=float)
    envelope = np.asarray(envelope, dtype=float)
    if t[0] > t_onset + FIXED_OFFSETS[Bin.VPR1] + 1e-9 or t[-1] < t_end - 1e-9:
        raise BinningError(f"Envelope does not cover [{t_onset + FIXED_OFFSETS[Bin.VPR1]:.3f}, {t_end:.3f}] s")
    search = _search_indices(t, t_onset, t_end)
    if not len(search) or envelope[search].max() <= 0:
        return Window.invalid(), Window.invalid()
    extent = (t[0], min(t_end, t[-1]))
    segment = envelope[search]
    peak_index = int(np.argmax(segment))
    peak = segment[peak_index]
    vpr2 = Window.centered(t[search[peak_index]], width, extent)

    level = threshold * peak
    below = np.flatnonzero(segment[peak_index:] < level)
    if not len(below):
        logger.debug("Envelope stays above %.3g of its peak until %.3f s; clamping VPR3", threshold, t_end)
        return vpr2, Window(extent[1] - width, extent[1], clipped=True)
    after = search[peak_index + below[0]]
    before = after - 1
    # linear interpolation of the down-crossing between the straddling samples
    fraction = (envelope[before] - level) / (envelope[before] - envelope[after])
    crossing = t[before] + fraction * (t[after] - t[before])
    return vpr2, Window.centered(crossing, width, extent)


def bin_average(t, envelope, window: Window) -> float:
    if not window.valid:
        raise BinningError("Cannot average over an invalid window")
    t = np.asarray(t, dtype=float)
    mask = (t >= window.start) & (t < window.end)
    if not mask.any():
        raise BinningError(f"No samples in window [{window.start:.4f}, {window.end:.4f}) s")
    return float(np.asarray(envelope, dtype=float)[mask].mean())


@dataclass(frozen=True, eq=False)
class TrialBins:
    subject_id: str
    group: Group
    session: int
    trial_id: int
    direction: Direction
    means: np.ndarray  # 14 x 7 in BINS order, NaN where the trial ends before the VPR search starts
    vpr_valid: np.ndarray
    vpr3_clamped: np.ndarray

    @property
    def key(self):
        return self.subject_id, self.session, self.trial_id

    def with_means(self, means: np.ndarray):
        return TrialBins(self.subject_id, self.group, self.session, self.trial_id, self.direction, means,
                         self.vpr_valid, self.vpr3_clamped)


def bin_trial(t, envelopes, t_onset: float, t_end: float, trial=None, threshold: float = None) -> TrialBins:
    """
    Average every channel over the seven bins of one trial.

    A channel that stays silent over the whole VPR search region has no voluntary response; it is scored as
    zero activity in both VPR2 and VPR3 rather than dropped, and its ``vpr_valid`` flag is cleared.
    """
    t = np.asarray(t, dtype=float)
    envelopes = np.atleast_2d(np.asarray(envelopes, dtype=float))
    windows = fixed_windows(t_onset)
    searchable = len(_search_indices(t, t_onset, t_end)) > 0
    means = np.full((envelopes.shape[0], len(BINS)), np.nan)
    vpr_valid = np.zeros(envelopes.shape[0], dtype=bool)
    clamped = np.zeros(envelopes.shape[0], dtype=bool)
    for row, channel_envelope in enumerate(envelopes):
        for column, name in enumerate(BINS):
            if name in windows:
                means[row, column] = bin_average(t, channel_envelope, windows[name])
        vpr2, vpr3 = find_vpr_windows(t, channel_envelope, t_onset, t_end, threshold=threshold)
        vpr_valid[row] = vpr2.valid
        if vpr2.valid:
            clamped[row] = vpr3.clipped
            means[row, BINS.index(Bin.VPR2)] = bin_average(t, channel_envelope, vpr2)
            means[row, BINS.index(Bin.VPR3)] = bin_average(t, channel_envelope, vpr3)
        elif searchable:
            means[row, [BINS.index(Bin.VPR2), BINS.index(Bin.VPR3)]] = 0.0
    if searchable and not vpr_valid.all():
        logger.debug("Trial %s: %d channels without a voluntary response", getattr(trial, "trial_id", "?"),
                     int((~vpr_valid).sum()))
    return TrialBins(
        subject_id=getattr(trial, "subject_id", ""),
        group=getattr(trial, "group", None),
        session=getattr(trial, "session", 0),
        trial_id=getattr(trial, "trial_id", 0),
        direction=getattr(trial, "direction", None),
        means=means,
        vpr_valid=vpr_valid,
        vpr3_clamped=clamped
    )


def normalize_per_muscle(values, channels: Sequence[MuscleChannel] = MUSCLE_CHANNELS,
                         allow_silent: bool = False) -> np.ndarray:
    """
    Scale each row by its maximum so that the largest value of every muscle becomes 1.

    With ``allow_silent`` an all-zero row stays zero instead of raising.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    normalized = np.empty_like(values)
    for row, data in enumerate(values):
        finite = data[np.isfinite(data)]
        peak = finite.max() if len(finite) else 0.0
        name = channels[row].label if row < len(channels) else f"row {row}"
        if peak <= 0 and allow_silent:
            logger.warning("Muscle channel %d (%s) is silent in every cell", row, name)
            normalized[row] = data
        elif peak <= 0:
            raise BinningError(f"Muscle channel {row} ({name}) has no activity (dead electrode?)")
        else:
            normalized[row] = data / peak
    return normalized


def normalize_trials(trial_bins: List[TrialBins], per_session: bool = None) -> List[TrialBins]:
    """Normalize bin means per subject (or per subject session) across all bins, directions and trials."""
    per_session = synergy_settings.NORMALIZE_PER_SESSION if per_session is None else per_session
    ordered = sorted(trial_bins, key=lambda item: item.key)
    scopes: Dict[tuple, List[TrialBins]] = {}
    for item in ordered:
        scope = (item.subject_id, item.session) if per_session else (item.subject_id,)
        scopes.setdefault(scope, []).append(item)
    normalized = []
    for items in scopes.values():
        stacked = normalize_per_muscle(np.concatenate([item.means for item in items], axis=1))
        width = len(BINS)
        normalized.extend(
            item.with_means(stacked[:, index * width:(index + 1) * width]) for index, item in enumerate(items)
        )
    return normalized


def phase_bins(phase: Phase, include_bk: bool = None) -> Tuple[Bin, ...]:
    include_bk = synergy_settings.INCLUDE_BK if include_bk is None else include_bk
    return ((Bin.BK,) if include_bk else ()) + PHASE_BINS[Phase(phase)]


@dataclass(frozen=True, eq=False)
class BinnedActivationMatrix:
    values: np.ndarray
    column_labels: Tuple[Tuple[Bin, Direction], ...]
    trial_counts: np.ndarray
    phase: Phase
    group: Group = None
    row_labels: Tuple[MuscleChannel, ...] = MUSCLE_CHANNELS

    @property
    def shape(self):
        return self.values.shape

    def column_index(self, name: Bin, direction: Direction) -> int:
        return self.column_labels.index((Bin(name), Direction(direction)))

    def as_rows(self, subject: str = "ALL"):
        for row, channel in enumerate(self.row_labels):
            for column, (name, direction) in enumerate(self.column_labels):
                yield {
                    "subject": subject,
                    "group": self.group.value if self.group else "",
                    "phase": self.phase.value,
                    "muscle": channel.muscle.value,
                    "side": channel.side.value,
                    "bin": name.value,
                    "direction": direction.value,
                    "value": float(self.values[row, column])
                }


def assemble_matrix(trial_bins: List[TrialBins], phase: Phase, include_bk: bool = None,
                    group: Group = None) -> BinnedActivationMatrix:
    """
    Average normalized trial bins into a muscles x (bins x directions) matrix, bins-major.

    A muscle active in the subject but silent in every cell of this phase keeps an all-zero row.
    """
    phase = Phase(phase)
    bins = phase_bins(phase, include_bk)
    if not trial_bins:
        raise BinningError("No trials to assemble")
    ordered = sorted(trial_bins, key=lambda item: item.key)
    rows = ordered[0].means.shape[0]
    labels = tuple((name, direction) for name in bins for direction in DIRECTIONS)
    values = np.zeros((rows, len(labels)))
    counts = np.zeros((rows, len(labels)), dtype=int)
    for direction in DIRECTIONS:
        selected = [item.means for item in ordered if item.direction == direction]
        if not selected:
            raise BinningError(f"No trials for direction '{direction.value}'")
        stacked = np.stack(selected)
        for name in bins:
            column = labels.index((name, direction))
            cell = stacked[:, :, BINS.index(name)]
            finite = np.isfinite(cell)
            counts[:, column] = finite.sum(axis=0)
            if np.any(counts[:, column] == 0):
                raise BinningError(f"Zero valid trials for cell ({name.value}, {direction.value})")
            values[:, column] = np.where(finite, cell, 0.0).sum(axis=0) / counts[:, column]
    return BinnedActivationMatrix(
        values=normalize_per_muscle(values, allow_silent=True),
        column_labels=labels,
        trial_counts=counts,
        phase=phase,
        group=group
    )


BINNED_COLUMNS = ("subject", "group", "phase", "muscle", "side", "bin", "direction", "value")


def binned_rows(trial_bins: List[TrialBins], phase: Phase, include_bk: bool = None):
    """Per-subject trial-averaged matrices flattened into binned CSV rows, subjects in sorted order."""
    subjects: Dict[str, List[TrialBins]] = {}
    for item in sorted(trial_bins, key=lambda item: item.key):
        subjects.setdefault(item.subject_id, []).append(item)
    for subject_id, items in subjects.items():
        matrix = assemble_matrix(items, phase, include_bk, items[0].group)
        yield from matrix.as_rows(subject=subject_id)
