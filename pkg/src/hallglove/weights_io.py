"""Trained-weight exchange formats.

Binary ".glvw" layout (all little-endian):
    magic   "GLVW" (4 bytes)
    version u16 (currently 1)
    n_in    u16
    n_hidden u16
    n_out   u16
    W1 row-major float32, then b1, W2 row-major, b2
    CRC-32 (u32) of every preceding byte

Firmware text format: four constant-array initializer blocks (W1, B1, W2,
B2) with companion dimension constants, one row per line, values printed
with 9 significant digits (enough to round-trip float32 exactly).
"""

from __future__ import annotations

import re
import struct
import zlib
from typing import List

import numpy as np

from .mlp import MlpParameters

MAGIC = b"GLVW"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHHH")


class WeightFormatError(Exception):
    """Base for malformed weight files."""


class BadMagicError(WeightFormatError):
    pass


class TruncatedError(WeightFormatError):
    pass


class ChecksumError(WeightFormatError):
    pass


def export_binary(p: MlpParameters) -> bytes:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, p.n_in, p.n_hidden, p.n_out)
    payload = b"".join(
        np.ascontiguousarray(a, dtype="<f4").tobytes() for a in (p.W1, p.b1, p.W2, p.b2)
    )
    body = header + payload
    return body + struct.pack("<I", zlib.crc32(body))


def import_binary(data: bytes) -> MlpParameters:
    """Parse and verify a .glvw byte string.

    Raises BadMagicError, TruncatedError or ChecksumError; a verified file
    yields float64 tensors holding exact float32 values."""
    if len(data) < _HEADER.size:
        if not data.startswith(MAGIC[: len(data)]):
            raise BadMagicError("not a GLVW file")
        raise TruncatedError(f"file of {len(data)} bytes is shorter than the header")
    magic, version, n_in, n_hidden, n_out = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise WeightFormatError(f"unsupported version {version}")
    n_values = n_hidden * n_in + n_hidden + n_out * n_hidden + n_out
    expected = _HEADER.size + 4 * n_values + 4
    if len(data) != expected:
        raise TruncatedError(f"expected {expected} bytes for {n_in}/{n_hidden}/{n_out}, got {len(data)}")
    (crc_stored,) = struct.unpack_from("<I", data, expected - 4)
    if zlib.crc32(data[: expected - 4]) != crc_stored:
        raise ChecksumError("CRC-32 mismatch")
    flat = np.frombuffer(data, dtype="<f4", count=n_values, offset=_HEADER.size).astype(np.float64)
    pos = 0

    def take(shape) -> np.ndarray:
        nonlocal pos
        size = int(np.prod(shape))
        out = flat[pos : pos + size].reshape(shape)
        pos += size
        return out

    return MlpParameters(
        W1=take((n_hidden, n_in)),
        b1=take((n_hidden,)),
        W2=take((n_out, n_hidden)),
        b2=take((n_out,)),
    )


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


def _array_block(name: str, a: np.ndarray) -> str:
    if a.ndim == 1:
        body = ", ".join(_fmt(v) for v in a)
        return f"const float {name}[{a.shape[0]}] = {{\n  {body}\n}};\n"
    rows = ",\n".join("  {" + ", ".join(_fmt(v) for v in row) + "}" for row in a)
    return f"const float {name}[{a.shape[0]}][{a.shape[1]}] = {{\n{rows}\n}};\n"


def export_firmware_arrays(p: MlpParameters) -> str:
    """Emit the four weight arrays as C++ initializer blocks."""
    parts = [
        "// Trained glove MLP weights. Generated file, do not edit.\n",
        f"const int N_INPUT = {p.n_in};\n",
        f"const int N_HIDDEN = {p.n_hidden};\n",
        f"const int N_OUTPUT = {p.n_out};\n",
        "\n",
        _array_block("W1", p.W1),
        _array_block("B1", p.b1),
        _array_block("W2", p.W2),
        _array_block("B2", p.b2),
    ]
    return "".join(parts)


_DIM_RE = re.compile(r"const int N_(INPUT|HIDDEN|OUTPUT) = (\d+);")
_BLOCK_RE = re.compile(r"const float (W1|B1|W2|B2)\[[\]\[\d]*\] = \{(.*?)\};", re.S)


def parse_firmware_arrays(text: str) -> MlpParameters:
    """Read the firmware text format back; counterpart of export for tests
    and round-trip checks."""
    dims = {m.group(1): int(m.group(2)) for m in _DIM_RE.finditer(text)}
    for key in ("INPUT", "HIDDEN", "OUTPUT"):
        if key not in dims:
            raise WeightFormatError(f"missing N_{key} constant")
    n_in, n_hidden, n_out = dims["INPUT"], dims["HIDDEN"], dims["OUTPUT"]
    arrays: dict[str, List[float]] = {}
    for m in _BLOCK_RE.finditer(text):
        arrays[m.group(1)] = [float(tok) for tok in re.findall(r"[-+0-9.eE]+", m.group(2))]
    for key, count in (
        ("W1", n_hidden * n_in),
        ("B1", n_hidden),
        ("W2", n_out * n_hidden),
        ("B2", n_out),
    ):
        if key not in arrays:
            raise WeightFormatError(f"missing array {key}")
        if len(arrays[key]) != count:
            raise WeightFormatError(f"array {key} has {len(arrays[key])} values, expected {count}")
    def as_f32(values: List[float], shape) -> np.ndarray:
        # the firmware arrays are C++ float (32-bit); land on exact f32 values
        return np.array(values, dtype=np.float32).astype(np.float64).reshape(shape)

    return MlpParameters(
        W1=as_f32(arrays["W1"], (n_hidden, n_in)),
        b1=as_f32(arrays["B1"], (n_hidden,)),
        W2=as_f32(arrays["W2"], (n_out, n_hidden)),
        b2=as_f32(arrays["B2"], (n_out,)),
    )
