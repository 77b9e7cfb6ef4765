"""Sensor physics: hand pose -> 20 raw channel values.

Signal chain per Hall channel:
  flexion angle theta -> magnet-sensor distance d = g0 + 2*h*sin(theta/2)
  -> flux B = C / d^3 (inverse-cube dipole decay)
  -> voltage V = clamp(0.5*Vcc + k*(B_own + B_crosstalk) + noise)
  -> ADC code = clamp(round(V/vref * (2^bits - 1)))

Units are SI throughout: meters, volts, degrees. Flux is kept in abstract
"flux units" calibrated so the voltage span lands inside the sensor rails;
only the voltage matters downstream.

IMU: gravity is rotated into the sensor frame (accel in g units, 1 g at
rest), gyro reads zero for static gestures plus noise. Wrist rotation is
applied intrinsically in roll (X), pitch (Y), yaw (Z) order, so yaw tilts
the sensed gravity only when the wrist is already rolled or pitched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .hand import (
    NUM_JOINTS,
    AnthropometricProfile,
    Finger,
    HandPose,
    JointId,
    JointKind,
    RomTable,
    canonical_joint_order,
    validate_pose,
)


@dataclass(frozen=True)
class MagnetPairGeometry:
    """One joint's magnet/sensor mount.

    g0: gap at full extension (m); h: mount height above the joint axis (m);
    C: dipole coefficient (flux units * m^3).
    """

    g0: float
    h: float
    C: float

    def __post_init__(self) -> None:
        if self.g0 <= 0 or self.h <= 0 or self.C <= 0:
            raise ValueError("g0, h and C must all be positive")


@dataclass(frozen=True)
class HallSensorModel:
    Vcc: float = 3.3
    k: float = 1.6e-6  # volts per flux unit
    clamp_lo: float = 0.33  # 0.1 * Vcc: output rails
    clamp_hi: float = 2.97  # 0.9 * Vcc
    noise_sigma: float = 0.005  # volts

    def __post_init__(self) -> None:
        if not (0 <= self.clamp_lo < self.clamp_hi <= self.Vcc):
            raise ValueError("require 0 <= clamp_lo < clamp_hi <= Vcc")
        if self.k <= 0:
            raise ValueError("sensitivity k must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class AdcModel:
    bits: int = 10
    vref: float = 5.0

    def __post_init__(self) -> None:
        if not (8 <= self.bits <= 16):
            raise ValueError("bits must be in [8, 16]")
        if self.vref <= 0:
            raise ValueError("vref must be positive")

    @property
    def max_code(self) -> int:
        return (1 << self.bits) - 1


@dataclass(frozen=True)
class ImuModel:
    accel_range: float = 2.0  # +/- g
    gyro_range: float = 250.0  # +/- deg/s
    accel_noise_sigma: float = 0.02  # g
    gyro_noise_sigma: float = 1.0  # deg/s

    def __post_init__(self) -> None:
        if self.accel_range <= 0 or self.gyro_range <= 0:
            raise ValueError("IMU ranges must be positive")
        if self.accel_noise_sigma < 0 or self.gyro_noise_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")


MIN_SENSOR_SPACING = 0.015  # m; layout invariant, paper-claimed spacing is > 2 cm


@dataclass(frozen=True)
class GloveLayout:
    """Per-joint mount geometry plus the inter-sensor distance matrix.

    The shipped glove has 14 entries in canonical joint order; smaller
    layouts are allowed for single-joint analysis, but a full scan
    requires all 14."""

    geometries: Tuple[MagnetPairGeometry, ...]
    distances: Tuple[Tuple[float, ...], ...]  # square, meters

    def __post_init__(self) -> None:
        n = len(self.geometries)
        if n < 1:
            raise ValueError("layout needs at least one joint")
        d = self.distances
        if len(d) != n or any(len(row) != n for row in d):
            raise ValueError(f"distance matrix must be {n}x{n}")
        for i in range(n):
            if d[i][i] != 0.0:
                raise ValueError("distance matrix diagonal must be zero")
            for j in range(i + 1, n):
                if d[i][j] != d[j][i]:
                    raise ValueError("distance matrix must be symmetric")
                if d[i][j] < MIN_SENSOR_SPACING:
                    raise ValueError(
                        f"sensors {i},{j} spaced {d[i][j]:g} m, below {MIN_SENSOR_SPACING} m"
                    )


# Shipped defaults. g0 and C are calibrated together: full extension sits
# near 0.85*Vcc while a neighboring magnet at 2 cm stays below the noise
# floor (C/0.02^3 < noise_sigma/k). Mount heights put each joint's
# full-flexion voltage near 0.55*Vcc by making d(ROM max) = 7^(1/3) * g0.
DEFAULT_BASELINE_GAP = 0.003
DEFAULT_DIPOLE_COEFFICIENT = 0.019490625
DEFAULT_MOUNT_HEIGHTS: Dict[JointKind, float] = {
    JointKind.MCP: 0.00193661949,
    JointKind.PIP: 0.00167172478,
    JointKind.DIP: 0.00213040319,
    JointKind.IP: 0.00213040319,
}

# Sensor positions on the back of the hand (x lateral, y from wrist, meters),
# used only to derive the inter-sensor distance matrix.
DEFAULT_SENSOR_POSITIONS: Tuple[Tuple[float, float], ...] = (
    (-0.045, 0.050),  # thumb mcp
    (-0.060, 0.068),  # thumb ip
    (0.000, 0.090),  # index mcp
    (0.000, 0.130),  # index pip
    (0.000, 0.165),  # index dip
    (0.022, 0.090),  # middle mcp
    (0.022, 0.130),  # middle pip
    (0.022, 0.165),  # middle dip
    (0.044, 0.090),  # ring mcp
    (0.044, 0.130),  # ring pip
    (0.044, 0.165),  # ring dip
    (0.066, 0.085),  # little mcp
    (0.066, 0.118),  # little pip
    (0.066, 0.145),  # little dip
)


def distance_matrix_from_positions(
    positions: Sequence[Tuple[float, float]],
) -> Tuple[Tuple[float, ...], ...]:
    n = len(positions)
    rows = []
    for i in range(n):
        xi, yi = positions[i]
        row = []
        for j in range(n):
            xj, yj = positions[j]
            row.append(math.hypot(xi - xj, yi - yj))
        rows.append(tuple(row))
    return tuple(rows)


def default_layout(
    g0: float = DEFAULT_BASELINE_GAP,
    C: float = DEFAULT_DIPOLE_COEFFICIENT,
    heights: Dict[JointKind, float] | None = None,
    positions: Sequence[Tuple[float, float]] = DEFAULT_SENSOR_POSITIONS,
) -> GloveLayout:
    heights = heights or DEFAULT_MOUNT_HEIGHTS
    geoms = tuple(
        MagnetPairGeometry(g0=g0, h=heights[jid.joint], C=C)
        for jid in canonical_joint_order()
    )
    return GloveLayout(geoms, distance_matrix_from_positions(positions))


def scaled_geometry(base: MagnetPairGeometry, profile: AnthropometricProfile) -> MagnetPairGeometry:
    """Scale mount distances for a subject's hand size; the magnet itself
    (dipole coefficient) is unchanged."""
    return MagnetPairGeometry(g0=base.g0 * profile.scale, h=base.h * profile.scale, C=base.C)


def magnet_sensor_distance(theta: float, geom: MagnetPairGeometry) -> float:
    """Magnet-sensor separation at flexion angle theta (degrees).

    Point magnet and sensor sit at height h above the joint axis on the two
    adjacent segments; flexing by theta opens a chord 2*h*sin(theta/2) on
    top of the baseline gap g0. Strictly increasing on [0, 180]."""
    if not (0.0 <= theta <= 180.0):
        raise ValueError(f"theta {theta} outside [0, 180]")
    return geom.g0 + 2.0 * geom.h * math.sin(math.radians(theta) / 2.0)


def flux_density(d: float, C: float) -> float:
    """Far-field dipole magnitude: B = C / d^3."""
    if d <= 0:
        raise ValueError("distance must be positive")
    return C / (d * d * d)


def hall_voltage(
    B: float,
    model: HallSensorModel,
    crosstalk: float = 0.0,
    rng: np.random.Generator | None = None,
) -> float:
    """Ratiometric output: V = clamp(0.5*Vcc + k*(B + crosstalk) + noise).

    Clamping to the output rails is the defined saturation behavior."""
    v = 0.5 * model.Vcc + model.k * (B + crosstalk)
    if rng is not None and model.noise_sigma > 0:
        v += rng.normal(0.0, model.noise_sigma)
    return min(max(v, model.clamp_lo), model.clamp_hi)


def cross_talk_flux(sensor_index: int, layout: GloveLayout) -> float:
    """Combined flux at sensor i from every other magnet: sum C_j / dist^3."""
    total = 0.0
    for j, geom in enumerate(layout.geometries):
        if j == sensor_index:
            continue
        total += flux_density(layout.distances[sensor_index][j], geom.C)
    return total


def adc_sample(V: float, adc: AdcModel) -> int:
    """Quantize a voltage to an ADC code (half-up rounding, clamped rails)."""
    if not math.isfinite(V):
        raise ValueError("voltage must be finite")
    code = math.floor(V / adc.vref * adc.max_code + 0.5)
    return min(max(code, 0), adc.max_code)


def wrist_rotation(wrist: Tuple[float, float, float]) -> np.ndarray:
    """Sensor-to-world rotation for intrinsic roll(X), pitch(Y), yaw(Z)."""
    r, p, y = (math.radians(a) for a in wrist)
    rx = np.array([[1, 0, 0], [0, math.cos(r), -math.sin(r)], [0, math.sin(r), math.cos(r)]])
    ry = np.array([[math.cos(p), 0, math.sin(p)], [0, 1, 0], [-math.sin(p), 0, math.cos(p)]])
    rz = np.array([[math.cos(y), -math.sin(y), 0], [math.sin(y), math.cos(y), 0], [0, 0, 1]])
    return rx @ ry @ rz


def imu_sample(
    wrist: Tuple[float, float, float],
    model: ImuModel,
    rng: np.random.Generator | None = None,
) -> Tuple[float, float, float, float, float, float]:
    """Static-pose IMU reading: gravity in the sensor frame (g units) and a
    zero angular rate, each plus Gaussian noise."""
    for w in wrist:
        if not math.isfinite(w):
            raise ValueError("wrist angles must be finite")
    rot = wrist_rotation(wrist)
    accel = rot.T @ np.array([0.0, 0.0, 1.0])
    gyro = np.zeros(3)
    if rng is not None:
        if model.accel_noise_sigma > 0:
            accel = accel + rng.normal(0.0, model.accel_noise_sigma, size=3)
        if model.gyro_noise_sigma > 0:
            gyro = gyro + rng.normal(0.0, model.gyro_noise_sigma, size=3)
    return (accel[0], accel[1], accel[2], gyro[0], gyro[1], gyro[2])


def mux_select_bits(channel: int) -> str:
    """Select-line pattern S3..S0 driven to address a mux channel."""
    if not (0 <= channel <= 15):
        raise ValueError("mux channel must be in [0, 15]")
    return format(channel, "04b")


@dataclass(frozen=True)
class SensorFrame:
    """One raw sample: 14 Hall ADC codes then 6 IMU values."""

    codes: Tuple[int, ...]
    imu: Tuple[float, float, float, float, float, float]

    def values(self) -> List[float]:
        return [float(c) for c in self.codes] + list(self.imu)


def _as_rng(rng: np.random.Generator | int | None) -> np.random.Generator | None:
    if rng is None or isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def channel_voltage(
    theta: float,
    sensor_index: int,
    layout: GloveLayout,
    hall: HallSensorModel,
    profile: AnthropometricProfile | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Analog voltage of one channel, including cross-talk from the other
    13 magnets at their fixed mount spacing."""
    geom = layout.geometries[sensor_index]
    if profile is not None:
        geom = scaled_geometry(geom, profile)
    own = flux_density(magnet_sensor_distance(theta, geom), geom.C)
    return hall_voltage(own, hall, crosstalk=cross_talk_flux(sensor_index, layout), rng=rng)


def mux_scan(
    pose: HandPose,
    layout: GloveLayout,
    hall: HallSensorModel,
    adc: AdcModel,
    profile: AnthropometricProfile | None = None,
    rng: np.random.Generator | int | None = None,
    rom: RomTable | None = None,
) -> List[int]:
    """Sample all 14 Hall channels sequentially in canonical (C0..C13) order."""
    violations = validate_pose(pose, rom)
    if violations:
        raise ValueError("invalid pose: " + "; ".join(violations))
    if len(layout.geometries) != NUM_JOINTS:
        raise ValueError(f"full scan needs a {NUM_JOINTS}-joint layout")
    gen = _as_rng(rng)
    angles = pose.angle_vector()
    return [
        adc_sample(channel_voltage(angles[i], i, layout, hall, profile, gen), adc)
        for i in range(NUM_JOINTS)
    ]


def simulate_frame(
    pose: HandPose,
    layout: GloveLayout,
    hall: HallSensorModel,
    adc: AdcModel,
    imu: ImuModel,
    profile: AnthropometricProfile | None = None,
    rng: np.random.Generator | int | None = None,
    rom: RomTable | None = None,
) -> SensorFrame:
    """Full data-collection step: mux scan then IMU read, deterministic for
    a given seed. Noise draws happen channel by channel in scan order."""
    gen = _as_rng(rng)
    codes = mux_scan(pose, layout, hall, adc, profile, gen, rom)
    return SensorFrame(tuple(codes), imu_sample(pose.wrist, imu, gen))
