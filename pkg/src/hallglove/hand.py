"""Hand kinematics: joint layout, poses, gesture vocabulary, subject scaling.

Conventions:
  - Flexion angles in degrees, 0 = full extension, positive = flexion.
  - Wrist orientation (roll, pitch, yaw) in degrees, each in [-180, 180].
  - The thumb carries MCP and IP sensors; the other four fingers carry
    MCP, PIP and DIP, for 14 sensed joints total.
  - Channel i of every sensor frame is joint i of canonical_joint_order().
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Tuple


class Finger(Enum):
    THUMB = "thumb"
    INDEX = "index"
    MIDDLE = "middle"
    RING = "ring"
    LITTLE = "little"


class JointKind(Enum):
    MCP = "mcp"
    PIP = "pip"
    DIP = "dip"
    IP = "ip"


# Joints each finger actually carries a sensor on.
_ADMISSIBLE: Dict[Finger, Tuple[JointKind, ...]] = {
    Finger.THUMB: (JointKind.MCP, JointKind.IP),
    Finger.INDEX: (JointKind.MCP, JointKind.PIP, JointKind.DIP),
    Finger.MIDDLE: (JointKind.MCP, JointKind.PIP, JointKind.DIP),
    Finger.RING: (JointKind.MCP, JointKind.PIP, JointKind.DIP),
    Finger.LITTLE: (JointKind.MCP, JointKind.PIP, JointKind.DIP),
}


@dataclass(frozen=True, order=False)
class JointId:
    finger: Finger
    joint: JointKind

    def __post_init__(self) -> None:
        if self.joint not in _ADMISSIBLE[self.finger]:
            raise ValueError(f"{self.finger.value} has no {self.joint.value} sensor")

    def __str__(self) -> str:
        return f"{self.finger.value}.{self.joint.value}"


_CANONICAL_ORDER: Tuple[JointId, ...] = tuple(
    JointId(finger, joint)
    for finger in (Finger.THUMB, Finger.INDEX, Finger.MIDDLE, Finger.RING, Finger.LITTLE)
    for joint in _ADMISSIBLE[finger]
)

NUM_JOINTS = len(_CANONICAL_ORDER)  # 14


def canonical_joint_order() -> Tuple[JointId, ...]:
    """Pinned joint order: thumb (MCP, IP), then index/middle/ring/little
    (MCP, PIP, DIP) each. Position i is mux channel Ci in every frame."""
    return _CANONICAL_ORDER


@dataclass(frozen=True)
class RomTable:
    """Range-of-motion limits (degrees) per joint kind."""

    mcp: Tuple[float, float] = (0.0, 90.0)
    pip: Tuple[float, float] = (0.0, 110.0)
    dip: Tuple[float, float] = (0.0, 80.0)
    thumb_ip: Tuple[float, float] = (0.0, 80.0)

    def limits(self, jid: JointId) -> Tuple[float, float]:
        if jid.joint is JointKind.MCP:
            return self.mcp
        if jid.joint is JointKind.PIP:
            return self.pip
        if jid.joint is JointKind.DIP:
            return self.dip
        return self.thumb_ip


WRIST_RANGE = (-180.0, 180.0)


@dataclass(frozen=True)
class HandPose:
    """Full static hand state: 14 flexion angles plus wrist orientation."""

    angles: Dict[JointId, float]
    wrist: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def angle_vector(self) -> List[float]:
        """Angles in canonical joint order."""
        return [self.angles[jid] for jid in _CANONICAL_ORDER]

    @staticmethod
    def from_vector(angles: List[float], wrist: Tuple[float, float, float] = (0.0, 0.0, 0.0)) -> "HandPose":
        if len(angles) != NUM_JOINTS:
            raise ValueError(f"expected {NUM_JOINTS} angles, got {len(angles)}")
        return HandPose(dict(zip(_CANONICAL_ORDER, (float(a) for a in angles))), tuple(float(w) for w in wrist))


def validate_pose(pose: HandPose, rom: RomTable | None = None) -> List[str]:
    """Check a pose against the ROM table. Returns a list of violation
    messages naming the offending joint; empty list means the pose is ok.
    NaN anywhere is a violation, never an exception."""
    rom = rom or RomTable()
    violations: List[str] = []
    for jid in _CANONICAL_ORDER:
        if jid not in pose.angles:
            violations.append(f"{jid}: missing angle")
            continue
        a = pose.angles[jid]
        lo, hi = rom.limits(jid)
        if math.isnan(a):
            violations.append(f"{jid}: NaN angle")
        elif not (lo <= a <= hi):
            violations.append(f"{jid}: angle {a:g} outside [{lo:g}, {hi:g}]")
    for name, w in zip(("roll", "pitch", "yaw"), pose.wrist):
        if math.isnan(w):
            violations.append(f"wrist.{name}: NaN angle")
        elif not (WRIST_RANGE[0] <= w <= WRIST_RANGE[1]):
            violations.append(f"wrist.{name}: angle {w:g} outside [{WRIST_RANGE[0]:g}, {WRIST_RANGE[1]:g}]")
    return violations


def clamp_pose_to_rom(pose: HandPose, rom: RomTable | None = None) -> HandPose:
    """Clamp every angle into its ROM interval and the wrist into range."""
    rom = rom or RomTable()
    angles = {}
    for jid, a in pose.angles.items():
        lo, hi = rom.limits(jid)
        angles[jid] = min(max(a, lo), hi)
    wrist = tuple(min(max(w, WRIST_RANGE[0]), WRIST_RANGE[1]) for w in pose.wrist)
    return HandPose(angles, wrist)


@dataclass(frozen=True)
class AnthropometricProfile:
    """Per-subject hand-size multiplier applied to mount geometry."""

    subject_id: str
    scale: float

    def __post_init__(self) -> None:
        if not (0.8 <= self.scale <= 1.2):
            raise ValueError(f"scale {self.scale} outside [0.8, 1.2]")


# Hand-size percentile -> geometry scale, linearly interpolated between anchors.
PERCENTILE_SCALE_TABLE: Tuple[Tuple[float, float], ...] = ((25.0, 0.92), (50.0, 1.00), (75.0, 1.08))


def percentile_scale(percentile: float) -> float:
    """Map a hand-size percentile in [25, 75] to a geometry scale."""
    anchors = PERCENTILE_SCALE_TABLE
    if not (anchors[0][0] <= percentile <= anchors[-1][0]):
        raise ValueError(f"percentile {percentile} outside [{anchors[0][0]:g}, {anchors[-1][0]:g}]")
    for (p0, s0), (p1, s1) in zip(anchors, anchors[1:]):
        if p0 <= percentile <= p1:
            t = (percentile - p0) / (p1 - p0)
            return s0 + t * (s1 - s0)
    raise AssertionError("unreachable")


def default_subjects(n_subjects: int = 5) -> List[AnthropometricProfile]:
    """Subjects evenly spanning the 25th..75th hand-size percentiles."""
    if n_subjects < 1:
        raise ValueError("need at least one subject")
    if n_subjects == 1:
        percentiles = [50.0]
    else:
        step = 50.0 / (n_subjects - 1)
        percentiles = [25.0 + i * step for i in range(n_subjects)]
    return [
        AnthropometricProfile(f"s{i + 1}", percentile_scale(p))
        for i, p in enumerate(percentiles)
    ]


@dataclass(frozen=True)
class GestureDefinition:
    name: str
    canonical_pose: HandPose
    class_index: int


@dataclass(frozen=True)
class Vocabulary:
    """Ordered gesture set; class indices are contiguous from 0."""

    gestures: Tuple[GestureDefinition, ...]

    def __post_init__(self) -> None:
        indices = [g.class_index for g in self.gestures]
        if indices != list(range(len(self.gestures))):
            raise ValueError(f"class indices must be contiguous from 0, got {indices}")
        names = [g.name for g in self.gestures]
        if len(set(names)) != len(names):
            raise ValueError("gesture names must be unique")

    def __len__(self) -> int:
        return len(self.gestures)

    def __iter__(self):
        return iter(self.gestures)

    def by_name(self, name: str) -> GestureDefinition:
        for g in self.gestures:
            if g.name == name:
                return g
        raise KeyError(name)

    def words(self) -> List[str]:
        return [g.name for g in self.gestures]
