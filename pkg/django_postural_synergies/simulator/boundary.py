from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from django_postural_synergies.exceptions import BoundaryError, SimulationError
from django_postural_synergies.settings import synergy_settings


@dataclass(frozen=True, eq=False)
class BalanceBoundary:
    polygon: np.ndarray  # counter-clockwise hull vertices, mm
    origin: np.ndarray  # original pelvic centre, mm

    @property
    def edges(self):
        return self.polygon, np.roll(self.polygon, -1, axis=0)

    def contains(self, point, tolerance: float = 1e-9) -> bool:
        """Inside or on the boundary."""
        point = np.asarray(point, dtype=float)
        starts, ends = self.edges
        edge = ends - starts
        relative = point - starts
        cross = edge[:, 0] * relative[:, 1] - edge[:, 1] * relative[:, 0]
        return bool(np.all(cross >= -tolerance * np.linalg.norm(edge, axis=1)))

    def distance(self, point) -> float:
        """Euclidean distance from an outside point to the polygon, 0 inside."""
        if self.contains(point):
            return 0.0
        point = np.asarray(point, dtype=float)
        starts, ends = self.edges
        edge = ends - starts
        fraction = np.clip(np.einsum("ij,ij->i", point - starts, edge) / np.einsum("ij,ij->i", edge, edge), 0.0, 1.0)
        closest = starts + fraction[:, np.newaxis] * edge
        return float(np.min(np.linalg.norm(point - closest, axis=1)))

    def as_data(self):
        return {"polygon": self.polygon, "origin": self.origin}


def build_boundary(pelvic_points, origin=(0.0, 0.0)) -> BalanceBoundary:
    """Convex hull of the pelvic excursion points together with the original pelvic centre."""
    origin = np.asarray(origin, dtype=float)
    points = np.vstack([np.atleast_2d(np.asarray(pelvic_points, dtype=float)), origin])
    if len(points) < 3:
        raise BoundaryError(f"At least 3 points are required, got {len(points)}")
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise BoundaryError("Degenerate boundary: excursion points are collinear") from exc
    # for 2-D input Qhull returns the vertices in counter-clockwise order
    return BalanceBoundary(polygon=points[hull.vertices], origin=origin)


def circular_boundary(radius: float, origin=(0.0, 0.0), sides: int = 64) -> BalanceBoundary:
    angles = np.linspace(0.0, 2 * np.pi, sides, endpoint=False)
    origin = np.asarray(origin, dtype=float)
    return build_boundary(origin + radius * np.column_stack([np.cos(angles), np.sin(angles)]), origin)


def assistive_force(boundary: BalanceBoundary, pelvic_xy, gain: float = None, saturation: float = None) -> np.ndarray:
    """
    Restoring force (N) toward the original pelvic centre once the pelvis leaves the boundary.

    Magnitude is min(gain * d, saturation) with the exceedance distance d converted from mm to m.
    """
    gain = synergy_settings.FORCE_FIELD_GAIN if gain is None else gain
    saturation = synergy_settings.FORCE_FIELD_SATURATION if saturation is None else saturation
    pelvic_xy = np.asarray(pelvic_xy, dtype=float)
    exceedance = boundary.distance(pelvic_xy)
    if exceedance == 0.0:
        return np.zeros(2)
    toward_origin = boundary.origin - pelvic_xy
    length = np.linalg.norm(toward_origin)
    if length == 0.0:
        raise SimulationError("Pelvis is at the origin yet outside the boundary")
    return min(gain * exceedance / 1000.0, saturation) * toward_origin / length
