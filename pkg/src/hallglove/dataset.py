"""Labeled sample storage, synthetic generation, and train/val splitting.

CSV contract: UTF-8, LF line endings, header exactly

    subject,label,h0,...,h13,ax,ay,az,gx,gy,gz

ADC codes are decimal integers; IMU values use the repo-wide 9-significant-
digit convention, so read(write(d)) is the identity (records already carry
wire-quantized reals).
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .hand import HandPose, Vocabulary, clamp_pose_to_rom, default_subjects
from .physics import simulate_frame
from .protocol import DataFrame, FrameParseError, fmt9, parse_frame, quantize9
from .rig import GloveModels

CSV_HEADER = (
    "subject,label,"
    + ",".join(f"h{i}" for i in range(14))
    + ",ax,ay,az,gx,gy,gz"
)


@dataclass(frozen=True)
class SampleRecord:
    """One labeled frame. `sequence` is stream metadata, not part of the
    record's value (the CSV schema does not store it)."""

    subject_id: str
    label: int
    codes: Tuple[int, ...]
    imu: Tuple[float, float, float, float, float, float]
    sequence: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if not self.subject_id.isalnum():
            raise ValueError(f"subject id {self.subject_id!r} must be alphanumeric")
        if len(self.codes) != 14:
            raise ValueError("expected 14 ADC codes")
        if any(not (0 <= c <= 1023) for c in self.codes):
            raise ValueError("ADC codes must lie in [0, 1023]")
        if len(self.imu) != 6 or any(not math.isfinite(v) for v in self.imu):
            raise ValueError("expected 6 finite IMU values")

    def features(self) -> List[float]:
        return [float(c) for c in self.codes] + list(self.imu)


@dataclass(frozen=True)
class GestureDataset:
    vocabulary: Vocabulary
    records: Tuple[SampleRecord, ...]

    def __post_init__(self) -> None:
        n = len(self.vocabulary)
        for r in self.records:
            if not (0 <= r.label < n):
                raise ValueError(f"label {r.label} outside vocabulary of {n} gestures")

    def __len__(self) -> int:
        return len(self.records)

    def subjects(self) -> List[str]:
        seen: List[str] = []
        for r in self.records:
            if r.subject_id not in seen:
                seen.append(r.subject_id)
        return seen


def to_arrays(records: Sequence[SampleRecord]) -> Tuple[np.ndarray, np.ndarray]:
    """Raw feature matrix (n, 20) and label vector for training/eval."""
    X = np.array([r.features() for r in records], dtype=np.float64)
    y = np.array([r.label for r in records], dtype=np.int64)
    return X, y


def generate_synthetic(
    vocab: Vocabulary,
    models: GloveModels,
    n_subjects: int = 5,
    reps_per_gesture: int = 40,
    angle_jitter_sigma: float = 4.0,
    wrist_jitter_sigma: float = 5.0,
    noise: bool = True,
    seed: int = 42,
) -> GestureDataset:
    """Multi-subject dataset through the physics pipeline.

    For every (subject, gesture, rep) the canonical pose is jittered with
    Gaussian angle noise, clamped back into the ROM (counts stay exact),
    and simulated at the subject's anthropometric scale. Record count is
    exactly |vocab| * n_subjects * reps."""
    if reps_per_gesture < 1:
        raise ValueError("reps_per_gesture must be >= 1")
    rng = np.random.default_rng(seed)
    subjects = default_subjects(n_subjects)
    sim = models if noise else models.without_noise()
    records: List[SampleRecord] = []
    for profile in subjects:
        for gesture in vocab:
            base = gesture.canonical_pose
            for _ in range(reps_per_gesture):
                angles = {
                    jid: a + (rng.normal(0.0, angle_jitter_sigma) if angle_jitter_sigma > 0 else 0.0)
                    for jid, a in base.angles.items()
                }
                wrist = tuple(
                    w + (rng.normal(0.0, wrist_jitter_sigma) if wrist_jitter_sigma > 0 else 0.0)
                    for w in base.wrist
                )
                pose = clamp_pose_to_rom(HandPose(angles, wrist), models.rom)
                frame = simulate_frame(
                    pose, sim.layout, sim.hall, sim.adc, sim.imu,
                    profile=profile, rng=rng, rom=sim.rom,
                )
                records.append(
                    SampleRecord(
                        subject_id=profile.subject_id,
                        label=gesture.class_index,
                        codes=frame.codes,
                        imu=tuple(quantize9(v) for v in frame.imu),
                        sequence=len(records),
                    )
                )
    return GestureDataset(vocab, tuple(records))


class CsvFormatError(Exception):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def write_csv(dataset: GestureDataset, destination) -> None:
    """Write to a path or text file object."""
    if hasattr(destination, "write"):
        _write_csv_stream(dataset, destination)
        return
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        _write_csv_stream(dataset, fh)


def _write_csv_stream(dataset: GestureDataset, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in dataset.records:
        fields = [r.subject_id, str(r.label)] + [str(c) for c in r.codes] + [fmt9(v) for v in r.imu]
        fh.write(",".join(fields) + "\n")


def read_csv(source, vocab: Vocabulary) -> GestureDataset:
    """Read a dataset back; malformed rows fail with their line number."""
    if hasattr(source, "read"):
        return _read_csv_stream(source, vocab)
    with open(source, "r", encoding="utf-8") as fh:
        return _read_csv_stream(fh, vocab)


def _read_csv_stream(fh, vocab: Vocabulary) -> GestureDataset:
    header = fh.readline().rstrip("\n")
    if header != CSV_HEADER:
        raise CsvFormatError(1, f"bad header {header!r}")
    records: List[SampleRecord] = []
    for line_number, line in enumerate(fh, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 22:
            raise CsvFormatError(line_number, f"expected 22 fields, got {len(fields)}")
        subject = fields[0]
        try:
            label = int(fields[1])
            codes = tuple(int(f) for f in fields[2:16])
            imu = tuple(float(f) for f in fields[16:22])
        except ValueError as exc:
            raise CsvFormatError(line_number, str(exc)) from None
        if not (0 <= label < len(vocab)):
            raise CsvFormatError(line_number, f"unknown label {label}")
        try:
            records.append(SampleRecord(subject, label, codes, imu, sequence=len(records)))
        except ValueError as exc:
            raise CsvFormatError(line_number, str(exc)) from None
    return GestureDataset(vocab, tuple(records))


class SplitMode(Enum):
    STRATIFIED_RANDOM = "stratified"
    LEAVE_ONE_SUBJECT_OUT = "loso"


@dataclass(frozen=True)
class SplitSpec:
    mode: SplitMode = SplitMode.STRATIFIED_RANDOM
    val_fraction: float = 0.2
    holdout_subject: Optional[str] = None
    seed: int = 42

    def __post_init__(self) -> None:
        if self.mode is SplitMode.STRATIFIED_RANDOM and not (0 < self.val_fraction < 1):
            raise ValueError("val_fraction must be in (0, 1)")
        if self.mode is SplitMode.LEAVE_ONE_SUBJECT_OUT and not self.holdout_subject:
            raise ValueError("leave-one-subject-out needs a holdout subject")


def split(dataset: GestureDataset, spec: SplitSpec) -> Tuple[GestureDataset, GestureDataset]:
    """Partition into (train, val); deterministic for a given spec."""
    counts = [0] * len(dataset.vocabulary)
    for r in dataset.records:
        counts[r.label] += 1
    thin = [i for i, c in enumerate(counts) if c < 2]
    if thin:
        raise ValueError(f"classes {thin} have fewer than 2 samples")

    if spec.mode is SplitMode.LEAVE_ONE_SUBJECT_OUT:
        if spec.holdout_subject not in dataset.subjects():
            raise ValueError(f"subject {spec.holdout_subject!r} not in dataset")
        val = [r for r in dataset.records if r.subject_id == spec.holdout_subject]
        train = [r for r in dataset.records if r.subject_id != spec.holdout_subject]
    else:
        rng = np.random.default_rng(spec.seed)
        val_ids = set()
        for label in range(len(dataset.vocabulary)):
            idx = [i for i, r in enumerate(dataset.records) if r.label == label]
            take = int(round(len(idx) * spec.val_fraction))
            order = rng.permutation(len(idx))
            val_ids.update(idx[j] for j in order[:take])
        train = [r for i, r in enumerate(dataset.records) if i not in val_ids]
        val = [r for i, r in enumerate(dataset.records) if i in val_ids]
    return (
        GestureDataset(dataset.vocabulary, tuple(train)),
        GestureDataset(dataset.vocabulary, tuple(val)),
    )


@dataclass(frozen=True)
class RecordingResult:
    records: Tuple[SampleRecord, ...]
    errors: Tuple[str, ...]  # one message per skipped malformed frame
    complete: bool  # False when the source ended before `count` frames


def record_from_stream(
    lines: Iterable[str],
    label: int,
    count: int,
    vocab: Vocabulary,
    subject_id: str = "live",
) -> RecordingResult:
    """Collect `count` labeled Data frames from a wire stream.

    Malformed lines are skipped and reported; non-Data frames (state,
    gesture) pass through silently. A source that runs dry yields a
    partial, flagged result."""
    if not (0 <= label < len(vocab)):
        raise ValueError(f"label {label} outside vocabulary")
    records: List[SampleRecord] = []
    errors: List[str] = []
    for line in lines:
        if len(records) >= count:
            break
        try:
            frame = parse_frame(line)
        except FrameParseError as exc:
            errors.append(f"{exc.kind}: {exc}")
            continue
        if isinstance(frame, DataFrame):
            records.append(
                SampleRecord(subject_id, label, frame.codes, frame.imu, sequence=frame.seq)
            )
    return RecordingResult(tuple(records), tuple(errors), complete=len(records) >= count)
