"""
Planar plant of the cable robot: a PD-stabilized linear inverted pendulum for the standing body and
the four-cable pelvic belt that applies perturbations and assistive forces to it.

Positions are metres relative to the ankle midpoint, x medio-lateral (dominant side positive),
y antero-posterior (forward positive).
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from django_postural_synergies.exceptions import CableError, SimulationError
from django_postural_synergies.settings import synergy_settings
from django_postural_synergies.simulator.utils import GRAVITY

MAX_TIME_STEP = 0.002


@dataclass(frozen=True)
class BodyModel:
    """
    Effective balance parameters. ``stiffness`` and ``damping`` are the closed-loop PD gains per unit mass
    (1/s² and 1/s); the support half-lengths bound the centre of pressure before a step is needed.

    The body is a single point mass, so the support half-lengths are effective: they lump the foot with the
    hip and trunk reactions that let a person withstand a 150 ms trunk pulse of 40% body weight. A foot-sized
    rectangle (about 0.15 m) makes this model step at the first calibration pulse.
    """
    mass: float = 70.0
    com_height: float = 0.95
    support_half_length_ap: float = 0.50
    support_half_length_ml: float = 0.55
    stiffness: float = 12.0
    damping: float = 5.0
    gravity: float = GRAVITY

    def __post_init__(self):
        for name in ("mass", "com_height", "support_half_length_ap", "support_half_length_ml", "stiffness"):
            if not getattr(self, name) > 0:
                raise SimulationError(f"Body parameter '{name}' must be positive, got {getattr(self, name)}")
        if self.damping < 0:
            raise SimulationError(f"Body damping must be non-negative, got {self.damping}")

    @property
    def body_weight(self) -> float:
        return self.mass * self.gravity

    @property
    def support(self) -> np.ndarray:
        return np.array([self.support_half_length_ml, self.support_half_length_ap])

    def tipping_force(self, axis: int = 1) -> float:
        """
        Largest constant pelvic force whose static lean keeps the COP on the support.

        The lean itself moves the COP by the displacement F/(m k), so the rigid-body value m g s / h is the
        limit of infinite stiffness.
        """
        return self.mass * self.gravity * self.support[axis] / (self.com_height + self.gravity / self.stiffness)

    def cop_demand(self, position, velocity) -> np.ndarray:
        return position + self.com_height / self.gravity * (self.stiffness * position + self.damping * velocity)

    def mechanical_energy(self, state) -> float:
        """Kinetic plus controller potential energy, J."""
        return 0.5 * self.mass * float(
            np.dot(state.velocity, state.velocity) + self.stiffness * np.dot(state.position, state.position)
        )

    def as_data(self):
        return {
            "mass": self.mass,
            "com_height": self.com_height,
            "support_half_length_ap": self.support_half_length_ap,
            "support_half_length_ml": self.support_half_length_ml,
            "stiffness": self.stiffness,
            "damping": self.damping
        }


@dataclass(frozen=True, eq=False)
class BodyState:
    t: float = 0.0
    position: np.ndarray = field(default_factory=lambda: np.zeros(2))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    cop: np.ndarray = field(default_factory=lambda: np.zeros(2))
    stepping: bool = False
    stepped: bool = False

    @property
    def pelvic_xy(self) -> np.ndarray:
        """Pelvic centre in mm."""
        return self.position * 1000.0


def step_body(body: BodyModel, state: BodyState, force, dt: float) -> BodyState:
    """
    Advance the pendulum by one semi-implicit Euler step under the applied planar force (N).

    The COP is the controller's ankle-torque proxy projected onto the support rectangle; ``stepping`` marks the
    step on which the unprojected demand first leaves the rectangle.
    """
    if not 0 < dt <= MAX_TIME_STEP:
        raise SimulationError(f"Time step must be in (0, {MAX_TIME_STEP}] s, got {dt}")
    force = np.asarray(force, dtype=float)
    acceleration = -body.stiffness * state.position - body.damping * state.velocity + force / body.mass
    velocity = state.velocity + acceleration * dt
    position = state.position + velocity * dt
    if not (np.all(np.isfinite(position)) and np.all(np.isfinite(velocity))):
        raise SimulationError(f"Non-finite body state at t={state.t + dt:.4f} s")
    demand = body.cop_demand(position, velocity)
    outside = bool(np.any(np.abs(demand) > body.support))
    return BodyState(
        t=state.t + dt,
        position=position,
        velocity=velocity,
        cop=np.clip(demand, -body.support, body.support),
        stepping=outside and not state.stepped,
        stepped=state.stepped or outside
    )


@dataclass(frozen=True, eq=False)
class RigModel:
    pulley_positions: np.ndarray = field(
        default_factory=lambda: np.array([[1.5, 1.5], [-1.5, 1.5], [-1.5, -1.5], [1.5, -1.5]])
    )
    belt_attachment_radius: float = 0.15
    max_cable_tension: float = 600.0
    body: BodyModel = field(default_factory=BodyModel)
    force_field_gain: float = None
    force_field_saturation: float = None

    def __post_init__(self):
        pulleys = np.asarray(self.pulley_positions, dtype=float)
        if pulleys.shape != (4, 2):
            raise SimulationError(f"Expected 4 planar pulley positions, got shape {pulleys.shape}")
        object.__setattr__(self, "pulley_positions", pulleys)
        if self.force_field_gain is None:
            object.__setattr__(self, "force_field_gain", synergy_settings.FORCE_FIELD_GAIN)
        if self.force_field_saturation is None:
            object.__setattr__(self, "force_field_saturation", synergy_settings.FORCE_FIELD_SATURATION)
        check_span(cable_directions(self, np.zeros(2)))

    def as_data(self):
        return {
            "pulley_positions": self.pulley_positions,
            "belt_attachment_radius": self.belt_attachment_radius,
            "max_cable_tension": self.max_cable_tension,
            "body": self.body.as_data(),
            "force_field_gain": self.force_field_gain,
            "force_field_saturation": self.force_field_saturation
        }


def cable_directions(rig: RigModel, belt_center) -> np.ndarray:
    """Unit vectors (4 x 2) from the belt attachment points toward the pulleys."""
    offsets = rig.pulley_positions - np.asarray(belt_center, dtype=float)
    lengths = np.linalg.norm(offsets, axis=1)
    if np.any(lengths <= rig.belt_attachment_radius):
        raise CableError("A pulley lies inside the belt attachment radius")
    return offsets / lengths[:, np.newaxis]


def check_span(units: np.ndarray) -> None:
    """The cables positively span the plane only if no angular gap between neighbours reaches pi."""
    angles = np.sort(np.arctan2(units[:, 1], units[:, 0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    if gaps.max() >= np.pi - 1e-12:
        raise CableError(f"Degenerate cable geometry: angular gap of {np.degrees(gaps.max()):.1f} degrees")


def cable_tensions(rig: RigModel, belt_center, desired_force) -> np.ndarray:
    """
    Non-negative tensions of minimal Euclidean norm whose resultant equals the desired planar force.

    Every support set of cables is tried with its minimum-norm solution; the smallest feasible one is optimal
    because the optimum restricted to its active set is exactly that set's minimum-norm solution.
    """
    desired_force = np.asarray(desired_force, dtype=float)
    units = cable_directions(rig, belt_center)
    check_span(units)
    if not np.any(desired_force):
        return np.zeros(len(units))
    scale = max(1.0, float(np.linalg.norm(desired_force)))
    best, best_norm = None, np.inf
    for size in range(1, len(units) + 1):
        for support in itertools.combinations(range(len(units)), size):
            matrix = units[list(support)].T
            solution = np.linalg.pinv(matrix) @ desired_force
            if solution.min() < -1e-12 or np.linalg.norm(matrix @ solution - desired_force) > 1e-9 * scale:
                continue
            norm = np.linalg.norm(solution)
            if norm < best_norm:
                best = np.zeros(len(units))
                best[list(support)] = np.clip(solution, 0.0, None)
                best_norm = norm
    if best is None:
        raise CableError(f"Force {desired_force.tolist()} N is outside the cable cone")
    if best.max() > rig.max_cable_tension:
        raise CableError(f"Force {desired_force.tolist()} N needs {best.max():.1f} N, above the "
                         f"{rig.max_cable_tension:.1f} N tension cap")
    return best


def resultant(rig: RigModel, belt_center, tensions) -> np.ndarray:
    return cable_directions(rig, belt_center).T @ np.asarray(tensions, dtype=float)
