"""Tabletop robot world: poses, omni-wheel kinematics, layout mappings, and
the messenger choreography that physicalizes packet transfer.

Distances are millimeters on the work surface, angles radians, speeds mm/s.
The robots are holonomic (three omni wheels at 120 degrees), so heading is
decoupled from travel direction and held constant unless commanded.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

__all__ = [
    "RobotPose",
    "RobotRole",
    "Robot",
    "MotionLimits",
    "LayoutKind",
    "Layout",
    "MessengerPhase",
    "MessengerTask",
    "SwarmScene",
    "WorldError",
    "value_to_pose",
    "pose_to_value",
    "inverse_kinematics",
    "forward_kinematics",
    "tick",
    "advance_messenger",
    "timeseries_window",
    "scatter_and_geo_place",
]


class WorldError(ValueError):
    pass


# Physical constants of the platform: 100 mm body, 38 mm omni wheels on
# three mounts at 120 degrees, top speed ~20 cm/s.
V_MAX_MM_S = 200.0
BODY_RADIUS_MM = 50.0
WHEEL_RADIUS_MM = 19.0
WHEEL_ANGLES_RAD = (math.pi / 2, math.pi * 7 / 6, math.pi * 11 / 6)  # 90, 210, 330 deg

DEFAULT_SURFACE_MM = (1000.0, 700.0)
DEFAULT_COMM_RADIUS_MM = 150.0
DEFAULT_ARRIVAL_MM = 2.0
DEFAULT_DT_S = 1.0 / 60.0


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heading", self.heading % (2 * math.pi))

    def distance_to(self, other: "RobotPose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class RobotRole(Enum):
    NODE_DISPLAY = "node"
    MESSENGER = "messenger"
    WIDGET = "widget"


@dataclass
class Robot:
    id: int
    pose: RobotPose
    role: RobotRole
    led_color: tuple[int, int, int] = (255, 255, 255)
    screen_text: str = ""
    target: RobotPose | None = None

    def __post_init__(self):
        if any(not 0 <= c <= 255 for c in self.led_color):
            raise WorldError(f"led color out of range: {self.led_color}")


@dataclass(frozen=True)
class MotionLimits:
    v_max: float = V_MAX_MM_S
    arrival_threshold: float = DEFAULT_ARRIVAL_MM
    wheel_radius: float = WHEEL_RADIUS_MM
    body_radius: float = BODY_RADIUS_MM

    def __post_init__(self):
        if self.v_max <= 0 or self.wheel_radius <= 0 or self.body_radius <= 0:
            raise WorldError("motion limits must be positive")


class LayoutKind(Enum):
    ITERATION_CHART = "iteration_chart"
    TIME_SERIES = "time_series"
    SCATTER = "scatter"
    GEO_MAP = "geo_map"


@dataclass(frozen=True)
class Layout:
    """Calibration between data values and table millimeters.

    x_range/y_range are (value_min, value_max) -> mapped linearly onto
    x_mm/y_mm.  For the iteration chart only the y axis carries values;
    columns along x are assigned per node.
    """

    kind: LayoutKind
    x_range: tuple[float, float] = (0.0, 1.0)
    y_range: tuple[float, float] = (0.0, 10.0)
    x_mm: tuple[float, float] = (50.0, DEFAULT_SURFACE_MM[0] - 50.0)
    y_mm: tuple[float, float] = (50.0, 550.0)
    surface_mm: tuple[float, float] = DEFAULT_SURFACE_MM
    time_window: tuple[float, float] | None = None

    def __post_init__(self):
        for lo, hi in (self.x_range, self.y_range, self.x_mm, self.y_mm):
            if not lo < hi:
                raise WorldError(f"degenerate axis range ({lo}, {hi})")


def _affine(v, src: tuple[float, float], dst: tuple[float, float]) -> float:
    return dst[0] + (v - src[0]) * (dst[1] - dst[0]) / (src[1] - src[0])


def _column_x(layout: Layout, node_index: int, node_count: int) -> float:
    lo, hi = layout.x_mm
    if node_count == 1:
        return (lo + hi) / 2
    spacing = (hi - lo) / (node_count - 1)
    if spacing < 2 * BODY_RADIUS_MM:
        raise WorldError(
            f"{node_count} columns need {(node_count - 1) * 2 * BODY_RADIUS_MM:.0f} mm "
            f"but only {hi - lo:.0f} mm of surface is calibrated; use a larger surface"
        )
    return lo + node_index * spacing


def value_to_pose(layout: Layout, node_index: int, value: float,
                  node_count: int) -> tuple[RobotPose, bool]:
    """Chart position for a node's value; returns (pose, clamped_flag)."""
    if layout.kind != LayoutKind.ITERATION_CHART:
        raise WorldError(f"value_to_pose needs an iteration chart, got {layout.kind}")
    clamped = False
    lo, hi = layout.y_range
    if value < lo or value > hi:
        value = min(max(value, lo), hi)
        clamped = True
    y = _affine(value, layout.y_range, layout.y_mm)
    return RobotPose(_column_x(layout, node_index, node_count), y), clamped


def pose_to_value(layout: Layout, pose: RobotPose) -> float:
    """Inverse of the chart's y mapping (used when a robot is dragged)."""
    if layout.kind != LayoutKind.ITERATION_CHART:
        raise WorldError(f"pose_to_value needs an iteration chart, got {layout.kind}")
    w, h = layout.surface_mm
    if not (0 <= pose.x <= w and 0 <= pose.y <= h):
        raise WorldError(f"pose ({pose.x}, {pose.y}) outside {w}x{h} mm surface")
    return _affine(pose.y, layout.y_mm, layout.y_range)


# ---------------------------------------------------------------------------
# omni-wheel kinematics

def inverse_kinematics(body_velocity: tuple[float, float, float],
                       limits: MotionLimits = MotionLimits()) -> tuple[float, float, float]:
    """Wheel angular velocities (rad/s) for a body-frame (vx, vy, omega).

    Wheel i's tangential speed is -sin(a_i) vx + cos(a_i) vy + R omega for
    mount angle a_i; dividing by the wheel radius gives angular velocity.
    """
    vx, vy, omega = body_velocity
    if math.hypot(vx, vy) > limits.v_max + 1e-9:
        raise WorldError(
            f"requested speed {math.hypot(vx, vy):.1f} mm/s exceeds "
            f"v_max {limits.v_max:.1f}; clamp before calling"
        )
    return tuple(
        (-math.sin(a) * vx + math.cos(a) * vy + limits.body_radius * omega)
        / limits.wheel_radius
        for a in WHEEL_ANGLES_RAD
    )


def forward_kinematics(wheel_velocities: tuple[float, float, float],
                       limits: MotionLimits = MotionLimits()) -> tuple[float, float, float]:
    """Body-frame (vx, vy, omega) from the three wheel angular velocities."""
    m = np.array([[-math.sin(a), math.cos(a), limits.body_radius]
                  for a in WHEEL_ANGLES_RAD])
    tangential = np.asarray(wheel_velocities, dtype=float) * limits.wheel_radius
    vx, vy, omega = np.linalg.solve(m, tangential)
    return float(vx), float(vy), float(omega)


# ---------------------------------------------------------------------------
# messenger choreography

class MessengerPhase(Enum):
    AT_REST = "at_rest"
    TO_SENDER = "to_sender"
    RECEIVING = "receiving"
    TO_RECEIVER = "to_receiver"
    DELIVERING = "delivering"


@dataclass(frozen=True)
class MessengerTask:
    """Carry one value along a directed edge, as a physical packet."""

    edge: tuple[int, int]  # (sender node, receiver node)
    phase: MessengerPhase = MessengerPhase.AT_REST
    payload: float | None = None
    round_tag: int = 0
    comm_radius: float = DEFAULT_COMM_RADIUS_MM


@dataclass
class SwarmScene:
    """The single mutable world: robots, layout, and in-flight messenger tasks.

    Advanced by exactly one ticker; hand out copies for reading.
    """

    robots: dict[int, Robot] = field(default_factory=dict)
    layout: Layout = field(default_factory=lambda: Layout(LayoutKind.ITERATION_CHART))
    limits: MotionLimits = field(default_factory=MotionLimits)
    tasks: dict[int, MessengerTask] = field(default_factory=dict)  # robot id -> task
    node_values: dict[int, float] = field(default_factory=dict)  # node id -> value
    delivered: list[tuple[int, int, float]] = field(default_factory=list)

    def node_robot(self, node_id: int) -> Robot | None:
        r = self.robots.get(node_id)
        if r is not None and r.role == RobotRole.NODE_DISPLAY:
            return r
        return None


def _step_toward(pose: RobotPose, target: RobotPose, v_max: float, dt: float) -> RobotPose:
    dist = pose.distance_to(target)
    if dist == 0.0:
        return pose
    travel = min(v_max * dt, dist)
    f = travel / dist
    return RobotPose(pose.x + (target.x - pose.x) * f,
                     pose.y + (target.y - pose.y) * f,
                     pose.heading)


def _clamp_to_surface(pose: RobotPose, layout: Layout) -> RobotPose:
    w, h = layout.surface_mm
    m = BODY_RADIUS_MM
    return RobotPose(min(max(pose.x, m), w - m), min(max(pose.y, m), h - m), pose.heading)


def tick(scene: SwarmScene, dt: float = DEFAULT_DT_S) -> None:
    """Advance every robot toward its target and run messenger state machines.

    Per-tick displacement never exceeds v_max * dt; arrival within the
    threshold clears the target.
    """
    if dt <= 0:
        raise WorldError(f"dt must be > 0, got {dt}")
    for robot in scene.robots.values():
        if robot.target is None:
            continue
        robot.pose = _step_toward(robot.pose, robot.target, scene.limits.v_max, dt)
        # arrival clears the target without snapping, keeping the per-tick
        # displacement bounded by v_max * dt
        if robot.pose.distance_to(robot.target) <= scene.limits.arrival_threshold:
            robot.target = None
        robot.pose = _clamp_to_surface(robot.pose, scene.layout)
    for rid in list(scene.tasks):
        scene.tasks[rid] = advance_messenger(scene.tasks[rid], scene, rid)


def advance_messenger(task: MessengerTask, scene: SwarmScene,
                      messenger_id: int) -> MessengerTask:
    """One step of the packet-carrying cycle.

    AtRest -> ToSender; once within comm_radius of the sender the payload is
    copied (Receiving) and shown on the messenger's screen; ToReceiver until
    within comm_radius of the receiver; Delivering hands the payload to the
    node and the task returns to AtRest.  If either endpoint robot vanished,
    the task aborts to AtRest with a cleared payload.
    """
    messenger = scene.robots.get(messenger_id)
    if messenger is None:
        return task
    sender_node, receiver_node = task.edge
    sender = scene.node_robot(sender_node)
    receiver = scene.node_robot(receiver_node)
    if task.phase != MessengerPhase.AT_REST and (sender is None or receiver is None):
        messenger.target = None
        messenger.screen_text = ""
        return replace(task, phase=MessengerPhase.AT_REST, payload=None)

    if task.phase == MessengerPhase.AT_REST:
        return task
    if task.phase == MessengerPhase.TO_SENDER:
        if messenger.pose.distance_to(sender.pose) <= task.comm_radius:
            payload = scene.node_values.get(sender_node, 0.0)
            messenger.screen_text = f"{payload:.4g}"
            messenger.target = receiver.pose
            return replace(task, phase=MessengerPhase.RECEIVING, payload=payload)
        messenger.target = sender.pose
        return task
    if task.phase == MessengerPhase.RECEIVING:
        messenger.target = receiver.pose
        return replace(task, phase=MessengerPhase.TO_RECEIVER)
    if task.phase == MessengerPhase.TO_RECEIVER:
        if messenger.pose.distance_to(receiver.pose) <= task.comm_radius:
            return replace(task, phase=MessengerPhase.DELIVERING)
        messenger.target = receiver.pose
        return task
    # DELIVERING: hand over and rest
    scene.delivered.append((sender_node, receiver_node, task.payload))
    receiver_robot = scene.node_robot(receiver_node)
    if receiver_robot is not None:
        receiver_robot.screen_text = f"recv {task.payload:.4g}"
    messenger.screen_text = ""
    messenger.target = None
    return replace(task, phase=MessengerPhase.AT_REST, payload=None)


# ---------------------------------------------------------------------------
# time-series navigation

def timeseries_window(widget_a: RobotPose, widget_b: RobotPose,
                      layout: Layout) -> tuple[float, float]:
    """Window endpoints from the two slider widgets' x positions.

    The widgets behave like the handles of a range slider: positions map
    affinely into the calibrated time range, and crossed handles swap.
    """
    if layout.kind != LayoutKind.TIME_SERIES:
        raise WorldError(f"timeseries_window needs a time series layout, got {layout.kind}")
    ta = _affine(widget_a.x, layout.x_mm, layout.x_range)
    tb = _affine(widget_b.x, layout.x_mm, layout.x_range)
    lo, hi = min(ta, tb), max(ta, tb)
    if lo == hi:
        raise WorldError("degenerate time window: widgets at the same x")
    return lo, hi


def place_timeseries(samples: list[tuple[float, float]], window: tuple[float, float],
                     layout: Layout, robot_budget: int) -> tuple[list[RobotPose], bool]:
    """Target poses for the data robots showing samples inside the window.

    Returns (poses, downsampled_flag); when the window holds more samples
    than robots, samples thin uniformly.
    """
    lo, hi = window
    inside = [(t, v) for t, v in samples if lo <= t <= hi]
    downsampled = False
    if robot_budget < 1:
        raise WorldError("need at least one data robot")
    if len(inside) > robot_budget:
        idx = np.linspace(0, len(inside) - 1, robot_budget).round().astype(int)
        inside = [inside[i] for i in idx]
        downsampled = True
    poses = [
        RobotPose(_affine(t, (lo, hi), layout.x_mm), _affine(v, layout.y_range, layout.y_mm))
        for t, v in inside
    ]
    return poses, downsampled


# ---------------------------------------------------------------------------
# scatterplots and the geographic map

_CATEGORY_PALETTE = [
    (230, 60, 60), (60, 130, 230), (60, 200, 110), (240, 180, 40),
    (170, 80, 220), (80, 210, 220), (240, 120, 180), (150, 150, 150),
]

_RAMP_LOW = (40, 60, 200)
_RAMP_HIGH = (230, 50, 40)


def _ramp_color(t: float) -> tuple[int, int, int]:
    t = min(max(t, 0.0), 1.0)
    return tuple(int(round(a + (b - a) * t)) for a, b in zip(_RAMP_LOW, _RAMP_HIGH))


def scatter_and_geo_place(rows: list[dict], layout: Layout
                          ) -> list[tuple[RobotPose, tuple[int, int, int], bool]]:
    """Robot poses and LED colors for a scatterplot or a geographic map.

    Scatter rows carry x/y plus either a "series" label (categorical palette)
    or a "scalar" (linear blue-to-red ramp).  Geo rows carry lat/lon/scalar;
    the map projection is equirectangular: x affine in longitude, y affine in
    latitude.  Out-of-range rows clamp and flag.
    """
    if layout.kind == LayoutKind.SCATTER:
        out = []
        series_seen: dict[str, int] = {}
        scalars = [r["scalar"] for r in rows if "scalar" in r]
        s_lo, s_hi = (min(scalars), max(scalars)) if scalars else (0.0, 1.0)
        for r in rows:
            clamped = not (layout.x_range[0] <= r["x"] <= layout.x_range[1]
                           and layout.y_range[0] <= r["y"] <= layout.y_range[1])
            x = min(max(r["x"], layout.x_range[0]), layout.x_range[1])
            y = min(max(r["y"], layout.y_range[0]), layout.y_range[1])
            pose = RobotPose(_affine(x, layout.x_range, layout.x_mm),
                             _affine(y, layout.y_range, layout.y_mm))
            if "series" in r:
                key = str(r["series"])
                idx = series_seen.setdefault(key, len(series_seen))
                color = _CATEGORY_PALETTE[idx % len(_CATEGORY_PALETTE)]
            else:
                t = 0.0 if s_hi == s_lo else (r["scalar"] - s_lo) / (s_hi - s_lo)
                color = _ramp_color(t)
            out.append((pose, color, clamped))
        return out
    if layout.kind == LayoutKind.GEO_MAP:
        out = []
        scalars = [r["scalar"] for r in rows]
        s_lo, s_hi = (min(scalars), max(scalars)) if scalars else (0.0, 1.0)
        for r in rows:
            lon, lat = r["lon"], r["lat"]
            clamped = not (layout.x_range[0] <= lon <= layout.x_range[1]
                           and layout.y_range[0] <= lat <= layout.y_range[1])
            lon = min(max(lon, layout.x_range[0]), layout.x_range[1])
            lat = min(max(lat, layout.y_range[0]), layout.y_range[1])
            pose = RobotPose(_affine(lon, layout.x_range, layout.x_mm),
                             _affine(lat, layout.y_range, layout.y_mm))
            t = 0.0 if s_hi == s_lo else (r["scalar"] - s_lo) / (s_hi - s_lo)
            out.append((pose, _ramp_color(t), clamped))
        return out
    raise WorldError(f"scatter_and_geo_place needs Scatter or GeoMap, got {layout.kind}")


# ---------------------------------------------------------------------------
# CSV fixtures

def read_timeseries_csv(text: str) -> list[tuple[float, float]]:
    """Parse `t,value` rows (header required)."""
    reader = csv.DictReader(io.StringIO(text))
    return [(float(r["t"]), float(r["value"])) for r in reader]


def read_geo_csv(text: str) -> list[dict]:
    """Parse `name,lat,lon,scalar` rows (header required)."""
    reader = csv.DictReader(io.StringIO(text))
    return [
        {"name": r["name"], "lat": float(r["lat"]), "lon": float(r["lon"]),
         "scalar": float(r["scalar"])}
        for r in reader
    ]
