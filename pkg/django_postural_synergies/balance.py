"""
Center of pressure from force-plate wrenches and the sway metrics derived from it.

Plate frame: x is medio-lateral (positive toward the dominant side), y is antero-posterior (positive forward).
Forces are in N, moments in N·m, COP positions in mm.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from django_postural_synergies.exceptions import BalanceError
from django_postural_synergies.settings import synergy_settings

logger = logging.getLogger(__name__)

ML_AXIS = 0
AP_AXIS = 1
METRICS_COLUMNS = (
    "subject", "group", "trial", "total_excursion_mm", "rms_cop_mm", "rms_cop_vel_mm_s", "max_ap_mm", "max_ml_mm"
)


class CopReference(str, Enum):
    MEAN = "mean"
    START = "start"


@dataclass(frozen=True, eq=False)
class CopTrace:
    t: np.ndarray
    xy: np.ndarray  # N x 2, mm
    valid_mask: np.ndarray
    fz: np.ndarray = None

    def __post_init__(self):
        if self.xy.shape != (self.t.size, 2) or self.valid_mask.shape != self.t.shape:
            raise BalanceError("COP trace arrays do not share one time grid")
        if not np.all(np.isfinite(self.xy[self.valid_mask])):
            raise BalanceError("COP trace has non-finite positions at valid samples")

    @property
    def valid_count(self) -> int:
        return int(np.count_nonzero(self.valid_mask))

    def window(self, start: float, end: float):
        mask = (self.t >= start) & (self.t <= end)
        return CopTrace(
            t=self.t[mask],
            xy=self.xy[mask],
            valid_mask=self.valid_mask[mask],
            fz=None if self.fz is None else self.fz[mask]
        )


@dataclass(frozen=True)
class CopMetrics:
    total_excursion: float
    rms_cop: float
    rms_cop_velocity: float
    max_ap_displacement: float
    max_ml_displacement: float

    def as_data(self):
        return {
            "total_excursion_mm": self.total_excursion,
            "rms_cop_mm": self.rms_cop,
            "rms_cop_vel_mm_s": self.rms_cop_velocity,
            "max_ap_mm": self.max_ap_displacement,
            "max_ml_mm": self.max_ml_displacement
        }

    def as_row(self, subject: str, group: str, trial) -> dict:
        return {"subject": subject, "group": getattr(group, "value", group), "trial": trial, **self.as_data()}


def cop_from_wrench(fx, fy, fz, mx, my, plate_origin: Tuple[float, float] = (0.0, 0.0), t=None,
                    threshold: float = None, thickness: float = 0.0) -> CopTrace:
    """
    COPx = (-My - Fx·dz) / Fz, COPy = (Mx - Fy·dz) / Fz, dz being the depth of the sensor origin below the surface.

    Samples whose vertical load is under the threshold are marked invalid and carry NaN positions.
    """
    fx, fy, fz, mx, my = (np.asarray(value, dtype=float) for value in (fx, fy, fz, mx, my))
    threshold = synergy_settings.LOAD_THRESHOLD if threshold is None else threshold
    t = np.arange(fz.size, dtype=float) / synergy_settings.PLATE_RATE if t is None else np.asarray(t, dtype=float)
    valid = fz >= threshold
    if not np.any(valid):
        raise BalanceError(f"No sample reaches the load threshold of {threshold} N")
    if not np.all(valid):
        logger.debug("%d of %d plate samples are below the load threshold", fz.size - int(valid.sum()), fz.size)
    safe_fz = np.where(valid, fz, 1.0)
    x = (-my - fx * thickness) / safe_fz * 1000.0 + plate_origin[0]
    y = (mx - fy * thickness) / safe_fz * 1000.0 + plate_origin[1]
    xy = np.column_stack([x, y])
    xy[~valid] = np.nan
    return CopTrace(t=t, xy=xy, valid_mask=valid, fz=np.where(valid, fz, 0.0))


def cop_from_plate(stream, plate_origin: Tuple[float, float] = (0.0, 0.0), threshold: float = None) -> CopTrace:
    return cop_from_wrench(
        *(stream.column(name) for name in ("fx", "fy", "fz", "mx", "my")),
        plate_origin=plate_origin,
        t=stream.t,
        threshold=threshold
    )


def net_cop(left: CopTrace, right: CopTrace) -> CopTrace:
    """Vertical-load weighted average of the two plate COPs."""
    if left.t.shape != right.t.shape or not np.allclose(left.t, right.t, rtol=0.0, atol=1e-9):
        raise BalanceError("Plate traces are not on the same time grid")
    fz_left = np.where(left.valid_mask, left.fz if left.fz is not None else 1.0, 0.0)
    fz_right = np.where(right.valid_mask, right.fz if right.fz is not None else 1.0, 0.0)
    total = fz_left + fz_right
    unloaded = np.flatnonzero(total <= 0)
    if unloaded.size:
        raise BalanceError(f"Both plates are unloaded at t={left.t[unloaded[0]]:.4f} s")
    xy_left = np.nan_to_num(left.xy)
    xy_right = np.nan_to_num(right.xy)
    xy = (xy_left * fz_left[:, np.newaxis] + xy_right * fz_right[:, np.newaxis]) / total[:, np.newaxis]
    return CopTrace(t=left.t, xy=xy, valid_mask=np.ones(left.t.shape, dtype=bool), fz=total)


def cop_metrics(trace: CopTrace, reference: str = None) -> CopMetrics:
    reference = CopReference(reference or synergy_settings.COP_REFERENCE)
    if trace.valid_count < 2:
        raise BalanceError(f"At least 2 valid COP samples are required, got {trace.valid_count}")
    t = trace.t[trace.valid_mask]
    xy = trace.xy[trace.valid_mask]
    steps = np.linalg.norm(np.diff(xy, axis=0), axis=1)
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise BalanceError("COP timestamps are not strictly increasing")
    origin = xy.mean(axis=0) if reference == CopReference.MEAN else xy[0]
    deviation = xy - origin
    return CopMetrics(
        total_excursion=float(steps.sum()),
        rms_cop=float(np.sqrt(np.mean(np.sum(deviation ** 2, axis=1)))),
        rms_cop_velocity=float(np.sqrt(np.mean((steps / dt) ** 2))),
        max_ap_displacement=float(np.max(np.abs(deviation[:, AP_AXIS]))),
        max_ml_displacement=float(np.max(np.abs(deviation[:, ML_AXIS])))
    )


def session_metrics(metrics: Sequence[CopMetrics]) -> CopMetrics:
    """Session aggregate: excursion summed, RMS metrics averaged, maxima maximized."""
    if not metrics:
        raise BalanceError("No trial metrics to aggregate")
    return CopMetrics(
        total_excursion=float(sum(item.total_excursion for item in metrics)),
        rms_cop=float(np.mean([item.rms_cop for item in metrics])),
        rms_cop_velocity=float(np.mean([item.rms_cop_velocity for item in metrics])),
        max_ap_displacement=float(max(item.max_ap_displacement for item in metrics)),
        max_ml_displacement=float(max(item.max_ml_displacement for item in metrics))
    )


def unloaded_trace(t) -> CopTrace:
    return CopTrace(t=t, xy=np.full((t.size, 2), np.nan), valid_mask=np.zeros(t.shape, dtype=bool),
                    fz=np.zeros(t.shape))


def trial_cop(trial, plate_origins=None, threshold: float = None) -> CopTrace:
    """Net COP of a recorded trial over [t_robust_onset, t_end]."""
    plate_origins = plate_origins or synergy_settings.PLATE_ORIGINS
    threshold = synergy_settings.LOAD_THRESHOLD if threshold is None else threshold
    if len(trial.plates) != 2:
        raise BalanceError(f"Trial {trial.trial_id} has {len(trial.plates)} plate streams, expected 2")
    traces = []
    for stream in sorted(trial.plates, key=lambda item: item.plate_id):
        if np.any(stream.column("fz") >= threshold):
            traces.append(cop_from_plate(stream, plate_origins[stream.plate_id], threshold))
        else:
            traces.append(unloaded_trace(stream.t))
    return net_cop(*traces).window(trial.t_robust_onset, trial.t_end)
