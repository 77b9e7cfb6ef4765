"""Firmware model: LED-coded state machine and the deterministic
sample -> normalize -> infer -> emit loop.

The transport is an abstract ordered stream of wire-protocol lines; the
sink is any callable accepting one encoded line at a time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from .hand import HandPose
from .mlp import MlpParameters, NormalizationSpec, classify, forward, normalize
from .physics import simulate_frame
from .protocol import DataFrame, GestureFrame, encode_frame
from .rig import GloveModels


class FirmwareState(Enum):
    BOOT = "BOOT"
    SERIAL_INIT = "SERIAL_INIT"
    IMU_FAULT = "IMU_FAULT"
    CALIBRATED_IDLE = "CALIBRATED_IDLE"
    INFERENCE = "INFERENCE"


class LedColor(Enum):
    RED = "red"
    YELLOW = "yellow"
    MAGENTA = "magenta"
    BLUE = "blue"
    GREEN = "green"


# Enclosure RGB LED readout of the firmware state.
LED_FOR_STATE = {
    FirmwareState.BOOT: LedColor.RED,
    FirmwareState.SERIAL_INIT: LedColor.YELLOW,
    FirmwareState.IMU_FAULT: LedColor.MAGENTA,
    FirmwareState.CALIBRATED_IDLE: LedColor.BLUE,
    FirmwareState.INFERENCE: LedColor.GREEN,
}


class FirmwareEvent(Enum):
    POWER_ON = "power_on"
    SERIAL_READY = "serial_ready"
    IMU_INIT_OK = "imu_init_ok"
    IMU_INIT_FAIL = "imu_init_fail"
    START_INFERENCE = "start_inference"


_TRANSITIONS = {
    (FirmwareState.BOOT, FirmwareEvent.POWER_ON): FirmwareState.SERIAL_INIT,
    (FirmwareState.SERIAL_INIT, FirmwareEvent.IMU_INIT_OK): FirmwareState.CALIBRATED_IDLE,
    (FirmwareState.SERIAL_INIT, FirmwareEvent.IMU_INIT_FAIL): FirmwareState.IMU_FAULT,
    (FirmwareState.CALIBRATED_IDLE, FirmwareEvent.START_INFERENCE): FirmwareState.INFERENCE,
}


def fsm_step(state: FirmwareState, event: FirmwareEvent) -> FirmwareState:
    """Apply one event; (state, event) pairs with no defined transition are
    no-ops, the embedded-robustness convention."""
    return _TRANSITIONS.get((state, event), state)


def led_for_state(state: FirmwareState) -> LedColor:
    return LED_FOR_STATE[state]


class LoopMode(Enum):
    COLLECT = "collect"
    INFER = "infer"


@dataclass(frozen=True)
class LoopConfig:
    sample_rate: float = 50.0  # Hz
    mode: LoopMode = LoopMode.COLLECT

    def __post_init__(self) -> None:
        if not (1.0 <= self.sample_rate <= 1000.0):
            raise ValueError("sample_rate must be in [1, 1000] Hz")


@dataclass
class LoopStats:
    ticks: int = 0
    latencies: List[float] = field(default_factory=list)  # seconds per tick

    @property
    def max_latency(self) -> float:
        return max(self.latencies) if self.latencies else 0.0

    @property
    def mean_latency(self) -> float:
        return sum(self.latencies) / len(self.latencies) if self.latencies else 0.0


def run_loop(
    poses: Iterable[HandPose],
    models: GloveModels,
    config: LoopConfig,
    sink: Callable[[str], object],
    params: Optional[MlpParameters] = None,
    norm: Optional[NormalizationSpec] = None,
    state: FirmwareState = FirmwareState.CALIBRATED_IDLE,
    rng: np.random.Generator | int | None = None,
    realtime: bool = False,
) -> LoopStats:
    """Tick-driven firmware loop over a pose stream.

    Per tick: simulate a frame, then either emit it as a Data frame
    (collect mode) or run normalize -> forward -> classify and emit a
    Gesture frame (infer mode). Sequence numbers are gapless from 0; the
    pose source running out ends the loop cleanly."""
    if state not in (FirmwareState.CALIBRATED_IDLE, FirmwareState.INFERENCE):
        raise ValueError(f"loop requires CALIBRATED_IDLE or INFERENCE, not {state.value}")
    if config.mode is LoopMode.INFER:
        if params is None:
            raise ValueError("infer mode needs trained parameters")
        norm = norm or models.normalization()
    gen = np.random.default_rng(rng) if isinstance(rng, int) else rng
    period = 1.0 / config.sample_rate
    stats = LoopStats()
    for seq, pose in enumerate(poses):
        started = time.perf_counter()
        frame = simulate_frame(
            pose, models.layout, models.hall, models.adc, models.imu,
            profile=models.profile, rng=gen, rom=models.rom,
        )
        if config.mode is LoopMode.COLLECT:
            line = encode_frame(DataFrame(seq, frame.codes, frame.imu))
        else:
            y, _ = forward(params, normalize(frame, norm))
            class_index, confidence = classify(y)
            line = encode_frame(GestureFrame(seq, class_index, confidence))
        sink(line)
        elapsed = time.perf_counter() - started
        stats.ticks += 1
        stats.latencies.append(elapsed)
        if realtime and elapsed < period:
            time.sleep(period - elapsed)
    return stats
