"""Interactive session endpoint for the companion UI.

Line-delimited JSON over a local TCP socket, one session at a time.
Message schema (all UTF-8, one object per line):

  inbound   {"type": "pose", "angles": [14 degrees], "wrist": [roll, pitch, yaw]}
            {"type": "preset", "gesture": <class index>}
            {"type": "record", "label": <class index>, "count": <n>}
  outbound  {"type": "hello", "words": [...], "joints": [...], "poses": [...],
             "wrist_range": [lo, hi], "version": ...}
            {"type": "frame", "voltages": [14], "codes": [14], "probs": [n_out], "word": <str>}
            {"type": "recorded", "label": <int>, "count": <int>}
            {"type": "error", "reason": <str>}

Pose and preset replies are computed noise-free so the operator sees the
deterministic signal chain; record captures apply sensor noise, as real
data collection would. A second concurrent connection is refused with a
busy error.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .configio import WordMap
from .dataset import CSV_HEADER, SampleRecord
from .hand import HandPose, Vocabulary, canonical_joint_order, validate_pose
from .mlp import MlpParameters, classify, forward, normalize
from .physics import adc_sample, channel_voltage, imu_sample, simulate_frame
from .protocol import fmt9, quantize9
from .rig import GloveModels


class ServeEngine:
    """Session logic, one JSON message in -> one JSON line out."""

    def __init__(
        self,
        models: GloveModels,
        params: MlpParameters,
        vocab: Vocabulary,
        wordmap: WordMap,
        record_path: Optional[Path] = None,
        seed: int = 42,
    ):
        self.models = models
        self.quiet = models.without_noise()
        self.params = params
        self.vocab = vocab
        self.wordmap = wordmap
        self.norm = models.normalization()
        self.record_path = record_path
        self.rng = np.random.default_rng(seed)
        self.current_pose = vocab.gestures[0].canonical_pose

    def hello(self) -> str:
        joints = [
            {
                "finger": jid.finger.value,
                "joint": jid.joint.value,
                "min": self.models.rom.limits(jid)[0],
                "max": self.models.rom.limits(jid)[1],
            }
            for jid in canonical_joint_order()
        ]
        poses = [
            {
                "angles": g.canonical_pose.angle_vector(),
                "wrist": list(g.canonical_pose.wrist),
            }
            for g in self.vocab.gestures
        ]
        return _dumps(
            {
                "type": "hello",
                "words": self.vocab.words(),
                "joints": joints,
                "poses": poses,
                "wrist_range": [-180.0, 180.0],
                "version": __version__,
            }
        )

    def handle_line(self, line: str) -> str:
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            return _error(f"bad json: {exc}")
        if not isinstance(message, dict) or "type" not in message:
            return _error("message must be an object with a 'type' field")
        kind = message["type"]
        if kind == "pose":
            return self._handle_pose(message)
        if kind == "preset":
            return self._handle_preset(message)
        if kind == "record":
            return self._handle_record(message)
        return _error(f"unknown message type {kind!r}")

    def _handle_pose(self, message: dict) -> str:
        angles = message.get("angles")
        wrist = message.get("wrist", [0.0, 0.0, 0.0])
        if not _is_numbers(angles, 14) or not _is_numbers(wrist, 3):
            return _error("pose needs 'angles' of 14 numbers and 'wrist' of 3")
        pose = HandPose.from_vector([float(a) for a in angles], tuple(float(w) for w in wrist))
        violations = validate_pose(pose, self.models.rom)
        if violations:
            return _error("; ".join(violations))
        self.current_pose = pose
        return self._frame_reply(pose)

    def _handle_preset(self, message: dict) -> str:
        gesture = message.get("gesture")
        if not isinstance(gesture, int) or not (0 <= gesture < len(self.vocab)):
            return _error(f"preset gesture must be an index in [0, {len(self.vocab)})")
        pose = self.vocab.gestures[gesture].canonical_pose
        self.current_pose = pose
        return self._frame_reply(pose)

    def _handle_record(self, message: dict) -> str:
        label = message.get("label")
        count = message.get("count")
        if not isinstance(label, int) or not (0 <= label < len(self.vocab)):
            return _error("record needs an in-range integer 'label'")
        if not isinstance(count, int) or not (1 <= count <= 10000):
            return _error("record needs an integer 'count' in [1, 10000]")
        if self.record_path is None:
            return _error("recording is disabled (no record path configured)")
        records = []
        for _ in range(count):
            frame = simulate_frame(
                self.current_pose,
                self.models.layout,
                self.models.hall,
                self.models.adc,
                self.models.imu,
                profile=self.models.profile,
                rng=self.rng,
                rom=self.models.rom,
            )
            records.append(
                SampleRecord("live", label, frame.codes, tuple(quantize9(v) for v in frame.imu))
            )
        fresh = not self.record_path.exists()
        with open(self.record_path, "a", encoding="utf-8", newline="\n") as fh:
            if fresh:
                fh.write(CSV_HEADER + "\n")
            for r in records:
                fields = [r.subject_id, str(r.label)] + [str(c) for c in r.codes] + [fmt9(v) for v in r.imu]
                fh.write(",".join(fields) + "\n")
        return _dumps({"type": "recorded", "label": label, "count": count})

    def _frame_reply(self, pose: HandPose) -> str:
        angles = pose.angle_vector()
        voltages = [
            channel_voltage(angles[i], i, self.quiet.layout, self.quiet.hall, self.quiet.profile)
            for i in range(14)
        ]
        codes = [adc_sample(v, self.quiet.adc) for v in voltages]
        imu = imu_sample(pose.wrist, self.quiet.imu)
        y, _ = forward(self.params, normalize([float(c) for c in codes] + list(imu), self.norm))
        class_index, _ = classify(y)
        return _dumps(
            {
                "type": "frame",
                "voltages": [round(v, 6) for v in voltages],
                "codes": codes,
                "probs": [round(float(p), 6) for p in y],
                "word": self.wordmap.words[class_index],
            }
        )


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _error(reason: str) -> str:
    return _dumps({"type": "error", "reason": reason})


def _is_numbers(value, n: int) -> bool:
    return (
        isinstance(value, (list, tuple))
        and len(value) == n
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    )


class ServeServer:
    """Single-session TCP wrapper around a ServeEngine."""

    def __init__(self, engine: ServeEngine, host: str = "127.0.0.1", port: int = 0):
        self.engine = engine
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(4)
        self._busy = threading.Lock()
        self._stop = threading.Event()
        self._accept_thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple:
        return self._sock.getsockname()

    def start(self) -> None:
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def serve_forever(self) -> None:
        self._accept_loop()

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2.0)

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except OSError:
                return
            if not self._busy.acquire(blocking=False):
                _reply_busy(conn)
                continue
            thread = threading.Thread(target=self._session, args=(conn,), daemon=True)
            thread.start()

    def _session(self, conn: socket.socket) -> None:
        try:
            reader = conn.makefile("r", encoding="utf-8", newline="\n")
            conn.sendall(self.engine.hello().encode("utf-8"))
            for line in reader:
                reply = self.engine.handle_line(line)
                conn.sendall(reply.encode("utf-8"))
        except (OSError, ValueError):
            pass
        finally:
            try:
                conn.close()
            except OSError:
                pass
            self._busy.release()


def _reply_busy(conn: socket.socket) -> None:
    try:
        conn.sendall(_error("busy: another session is active").encode("utf-8"))
    except OSError:
        pass
    finally:
        try:
            conn.close()
        except OSError:
            pass
