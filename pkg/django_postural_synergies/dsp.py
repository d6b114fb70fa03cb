"""
EMG preprocessing chain: band-pass, demean, full-wave rectification and a
low-pass envelope. Every recursive filter runs forward and backward so the
output has zero phase lag.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from django_postural_synergies.exceptions import FilterError
from django_postural_synergies.settings import synergy_settings


@dataclass(frozen=True)
class FilterSpec:
    band_low: float = field(default_factory=lambda: float(synergy_settings.BAND_LOW))
    band_high: float = field(default_factory=lambda: float(synergy_settings.BAND_HIGH))
    envelope_cutoff: float = field(default_factory=lambda: float(synergy_settings.ENVELOPE_CUTOFF))
    order: int = field(default_factory=lambda: int(synergy_settings.FILTER_ORDER))

    def __post_init__(self):
        if self.order < 2 or self.order % 2:
            raise FilterError(f"Filter order must be a positive even integer, got {self.order}")
        if not 0 < self.band_low < self.band_high:
            raise FilterError(f"Invalid band {self.band_low}-{self.band_high} Hz")
        if self.envelope_cutoff <= 0:
            raise FilterError(f"Invalid envelope cutoff {self.envelope_cutoff} Hz")

    @property
    def padlen(self) -> int:
        return 3 * self.order

    def validate(self, rate: float) -> None:
        nyquist = rate / 2.0
        if self.band_high >= nyquist:
            raise FilterError(f"Rate {rate} Hz is too low for a {self.band_high} Hz band edge (Nyquist violation)")
        if self.envelope_cutoff >= nyquist:
            raise FilterError(
                f"Rate {rate} Hz is too low for a {self.envelope_cutoff} Hz envelope cutoff (Nyquist violation)"
            )

    def as_data(self):
        return {
            "band_low": self.band_low,
            "band_high": self.band_high,
            "envelope_cutoff": self.envelope_cutoff,
            "order": self.order
        }


def _check_length(x: np.ndarray, spec: FilterSpec) -> None:
    if x.shape[-1] <= spec.padlen:
        raise FilterError(f"Signal of {x.shape[-1]} samples is too short for {spec.padlen} samples of edge padding")


def _zero_phase(sos, x: np.ndarray, spec: FilterSpec) -> np.ndarray:
    # even extension is a mirror reflection about the end samples
    return signal.sosfiltfilt(sos, x, axis=-1, padtype="even", padlen=spec.padlen)


def bandpass(x, rate: float, spec: FilterSpec = None) -> np.ndarray:
    spec = spec or FilterSpec()
    x = np.asarray(x, dtype=float)
    if rate <= 2 * spec.band_high:
        raise FilterError(f"Rate {rate} Hz is too low for a {spec.band_high} Hz band edge (Nyquist violation)")
    _check_length(x, spec)
    sos = signal.butter(spec.order // 2, [spec.band_low, spec.band_high], btype="bandpass", fs=rate, output="sos")
    return _zero_phase(sos, x, spec)


def demean(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] == 0:
        raise FilterError("Cannot demean an empty signal")
    return x - x.mean(axis=-1, keepdims=True)


def rectify(x) -> np.ndarray:
    return np.abs(np.asarray(x, dtype=float))


def envelope(x, rate: float, spec: FilterSpec = None) -> np.ndarray:
    spec = spec or FilterSpec()
    x = np.asarray(x, dtype=float)
    if rate <= 2 * spec.envelope_cutoff:
        raise FilterError(
            f"Rate {rate} Hz is too low for a {spec.envelope_cutoff} Hz envelope cutoff (Nyquist violation)"
        )
    _check_length(x, spec)
    sos = signal.butter(spec.order, spec.envelope_cutoff, btype="lowpass", fs=rate, output="sos")
    return np.clip(_zero_phase(sos, x, spec), 0.0, None)


def preprocess(raw_emg, rate: float, spec: FilterSpec = None) -> np.ndarray:
    """Channel-wise band-pass, demean, rectify and envelope of a channels x samples matrix."""
    spec = spec or FilterSpec()
    spec.validate(rate)
    raw_emg = np.atleast_2d(np.asarray(raw_emg, dtype=float))
    return envelope(rectify(demean(bandpass(raw_emg, rate, spec))), rate, spec)
