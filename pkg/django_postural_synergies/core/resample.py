import logging
from dataclasses import dataclass

import numpy as np

from django_postural_synergies.exceptions import ResampleError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UniformStream:
    t: np.ndarray
    values: np.ndarray  # samples along the first axis
    rate: float
    truncated: bool = False


def resample_to_grid(t, values, rate: float, t_stop: float = None) -> UniformStream:
    """
    Linearly interpolate a timestamped stream onto a uniform grid anchored at its
    first timestamp. The grid never extends past the last sample; asking for a
    longer grid truncates it and sets the ``truncated`` flag.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise ResampleError("At least 2 samples are required")
    if values.shape[0] != len(t):
        raise ResampleError(f"Got {len(t)} timestamps for {values.shape[0]} samples")
    if np.any(np.diff(t) <= 0):
        raise ResampleError("Timestamps must be strictly increasing")
    if rate <= 0:
        raise ResampleError(f"Invalid rate {rate}")
    t_last = t[-1]
    truncated = False
    if t_stop is None:
        t_stop = t_last
    elif t_stop > t_last:
        logger.warning("Requested grid ends at %.6f s, past the last sample at %.6f s; truncating", t_stop, t_last)
        truncated = True
        t_stop = t_last
    count = int(np.floor((t_stop - t[0]) * rate + 1e-9)) + 1
    grid = t[0] + np.arange(count) / rate
    if values.ndim == 1:
        resampled = np.interp(grid, t, values)
    else:
        flat = values.reshape(len(t), -1)
        resampled = np.column_stack([np.interp(grid, t, flat[:, column]) for column in range(flat.shape[1])])
        resampled = resampled.reshape((count,) + values.shape[1:])
    return UniformStream(t=grid, values=resampled, rate=float(rate), truncated=truncated)
