"""Glove-to-host line protocol.

ASCII, one frame per LF-terminated line, three variants:

    Data:    D,<seq>,<h0>,...,<h13>,<ax>,<ay>,<az>,<gx>,<gy>,<gz>
    Gesture: G,<seq>,<class>,<confidence>
    State:   S,<STATE_NAME>

Hall codes are decimal integers in [0, 1023]; sequence numbers are u32;
real values (IMU channels, confidence) are printed with 9 significant
digits, which is also the repo-wide convention for reals in CSV datasets
and firmware array text. parse_frame is total: any input yields a frame
or a FrameParseError, never a crash.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Tuple, Union

MAX_SEQ = 0xFFFFFFFF
MAX_CODE = 1023
STATE_NAMES = ("BOOT", "SERIAL_INIT", "IMU_FAULT", "CALIBRATED_IDLE", "INFERENCE")

_INT_RE = re.compile(r"^\d+$")


def fmt9(v: float) -> str:
    """Canonical 9-significant-digit text for a real value."""
    return format(float(v), ".9g")


def quantize9(v: float) -> float:
    """The value a real becomes after one trip through fmt9."""
    return float(fmt9(v))


@dataclass(frozen=True)
class DataFrame:
    seq: int
    codes: Tuple[int, ...]  # 14 Hall ADC codes
    imu: Tuple[float, float, float, float, float, float]


@dataclass(frozen=True)
class GestureFrame:
    seq: int
    class_index: int
    confidence: float


@dataclass(frozen=True)
class StateFrame:
    state_name: str


WireFrame = Union[DataFrame, GestureFrame, StateFrame]


class FrameParseError(Exception):
    """Malformed wire line. `kind` is one of: tag, field_count, numeric, range."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def encode_frame(frame: WireFrame) -> str:
    """Serialize a frame to its wire line, LF-terminated."""
    if isinstance(frame, DataFrame):
        if len(frame.codes) != 14:
            raise ValueError(f"data frame needs 14 codes, got {len(frame.codes)}")
        fields = ["D", str(frame.seq)] + [str(c) for c in frame.codes] + [fmt9(v) for v in frame.imu]
        return ",".join(fields) + "\n"
    if isinstance(frame, GestureFrame):
        return f"G,{frame.seq},{frame.class_index},{fmt9(frame.confidence)}\n"
    if isinstance(frame, StateFrame):
        if frame.state_name not in STATE_NAMES:
            raise ValueError(f"unknown state name {frame.state_name!r}")
        return f"S,{frame.state_name}\n"
    raise TypeError(f"not a wire frame: {frame!r}")


def _parse_uint(field: str, name: str, maximum: int) -> int:
    if not _INT_RE.match(field):
        raise FrameParseError("numeric", f"{name} field {field!r} is not an unsigned integer")
    value = int(field)
    if value > maximum:
        raise FrameParseError("range", f"{name} {value} exceeds {maximum}")
    return value


def _parse_real(field: str, name: str) -> float:
    try:
        value = float(field)
    except ValueError:
        raise FrameParseError("numeric", f"{name} field {field!r} is not a number") from None
    if not math.isfinite(value):
        raise FrameParseError("range", f"{name} must be finite, got {field!r}")
    return value


def parse_frame(line: str) -> WireFrame:
    """Parse one wire line (trailing LF optional). Total over arbitrary text."""
    if not isinstance(line, str):
        raise FrameParseError("tag", "frame must be text")
    if line.endswith("\n"):
        line = line[:-1]
    if "\n" in line or "\r" in line:
        raise FrameParseError("field_count", "embedded line break")
    fields = line.split(",")
    tag = fields[0]
    if tag == "D":
        if len(fields) != 22:
            raise FrameParseError("field_count", f"data frame needs 22 fields, got {len(fields)}")
        seq = _parse_uint(fields[1], "seq", MAX_SEQ)
        codes = tuple(_parse_uint(f, f"code h{i}", MAX_CODE) for i, f in enumerate(fields[2:16]))
        imu = tuple(_parse_real(f, name) for f, name in zip(fields[16:22], ("ax", "ay", "az", "gx", "gy", "gz")))
        return DataFrame(seq, codes, imu)
    if tag == "G":
        if len(fields) != 4:
            raise FrameParseError("field_count", f"gesture frame needs 4 fields, got {len(fields)}")
        seq = _parse_uint(fields[1], "seq", MAX_SEQ)
        class_index = _parse_uint(fields[2], "class", 0xFFFF)
        confidence = _parse_real(fields[3], "confidence")
        if not (0.0 <= confidence <= 1.0):
            raise FrameParseError("range", f"confidence {confidence} outside [0, 1]")
        return GestureFrame(seq, class_index, confidence)
    if tag == "S":
        if len(fields) != 2:
            raise FrameParseError("field_count", f"state frame needs 2 fields, got {len(fields)}")
        if fields[1] not in STATE_NAMES:
            raise FrameParseError("range", f"unknown state name {fields[1]!r}")
        return StateFrame(fields[1])
    raise FrameParseError("tag", f"unknown frame tag {tag!r}")
