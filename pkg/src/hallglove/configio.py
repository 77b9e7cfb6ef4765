"""Human-readable config files: vocabulary, ROM, glove models, word map,
and pose scripts. All files are UTF-8 INI-style key/value text; units are
SI (meters, volts, degrees) throughout.

Packaged defaults live under hallglove/defaults/ and are used whenever a
path is not given.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .hand import (
    Finger,
    GestureDefinition,
    HandPose,
    JointId,
    JointKind,
    RomTable,
    Vocabulary,
    canonical_joint_order,
    validate_pose,
)
from .mlp import TrainConfig
from .physics import (
    AdcModel,
    GloveLayout,
    HallSensorModel,
    ImuModel,
    MagnetPairGeometry,
    distance_matrix_from_positions,
)
from .rig import GloveModels


class ConfigError(Exception):
    pass


def _default_text(name: str) -> str:
    return resources.files("hallglove").joinpath(f"defaults/{name}").read_text(encoding="utf-8")


def _read_config(path: Optional[str], default_name: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    try:
        if path is None:
            cp.read_string(_default_text(default_name))
        else:
            text = Path(path).read_text(encoding="utf-8")
            cp.read_string(text)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path or default_name}: {exc}") from None
    return cp


def _floats(raw: str, n: int, context: str) -> List[float]:
    parts = raw.split()
    if len(parts) != n:
        raise ConfigError(f"{context}: expected {n} numbers, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{context}: non-numeric value in {raw!r}") from None


_FINGER_KEYS = {
    "thumb": (Finger.THUMB, (JointKind.MCP, JointKind.IP)),
    "index": (Finger.INDEX, (JointKind.MCP, JointKind.PIP, JointKind.DIP)),
    "middle": (Finger.MIDDLE, (JointKind.MCP, JointKind.PIP, JointKind.DIP)),
    "ring": (Finger.RING, (JointKind.MCP, JointKind.PIP, JointKind.DIP)),
    "little": (Finger.LITTLE, (JointKind.MCP, JointKind.PIP, JointKind.DIP)),
}


def load_rom(path: Optional[str] = None) -> RomTable:
    cp = _read_config(path, "rom.cfg")
    if not cp.has_section("rom"):
        raise ConfigError("ROM config needs a [rom] section")
    def pair(key: str) -> Tuple[float, float]:
        lo, hi = _floats(cp.get("rom", key), 2, f"rom.{key}")
        if lo >= hi:
            raise ConfigError(f"rom.{key}: min must be below max")
        return (lo, hi)
    return RomTable(mcp=pair("mcp"), pip=pair("pip"), dip=pair("dip"), thumb_ip=pair("thumb_ip"))


def load_vocabulary(path: Optional[str] = None, rom: Optional[RomTable] = None) -> Vocabulary:
    """Load gesture definitions; every canonical pose must pass the ROM."""
    cp = _read_config(path, "vocabulary.cfg")
    rom = rom or RomTable()
    gestures: List[GestureDefinition] = []
    for section in cp.sections():
        if not section.startswith("gesture "):
            raise ConfigError(f"unexpected section [{section}] in vocabulary config")
        try:
            class_index = int(section.split(" ", 1)[1])
        except ValueError:
            raise ConfigError(f"bad gesture section name [{section}]") from None
        word = cp.get(section, "word", fallback=None)
        if not word:
            raise ConfigError(f"[{section}] is missing a word")
        angles: Dict[JointId, float] = {}
        for key, (finger, joints) in _FINGER_KEYS.items():
            values = _floats(cp.get(section, key, fallback=""), len(joints), f"{section}.{key}")
            for joint, value in zip(joints, values):
                angles[JointId(finger, joint)] = value
        wrist = tuple(_floats(cp.get(section, "wrist", fallback="0 0 0"), 3, f"{section}.wrist"))
        pose = HandPose(angles, wrist)
        violations = validate_pose(pose, rom)
        if violations:
            raise ConfigError(f"[{section}] pose violates ROM: " + "; ".join(violations))
        gestures.append(GestureDefinition(word, pose, class_index))
    gestures.sort(key=lambda g: g.class_index)
    try:
        return Vocabulary(tuple(gestures))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class GloveConfig:
    """Everything the CLI needs, resolved from one glove config file."""

    models: GloveModels
    n_subjects: int = 5
    reps_per_gesture: int = 40
    angle_jitter_sigma: float = 4.0
    wrist_jitter_sigma: float = 5.0
    sample_rate: float = 50.0
    train: TrainConfig = field(default_factory=TrainConfig)


_HEIGHT_KEYS = {
    JointKind.MCP: "height_mcp",
    JointKind.PIP: "height_pip",
    JointKind.DIP: "height_dip",
    JointKind.IP: "height_thumb_ip",
}


def load_glove_config(path: Optional[str] = None, rom: Optional[RomTable] = None) -> GloveConfig:
    cp = _read_config(path, "glove.cfg")
    rom = rom or load_rom(None)
    g = lambda sec, key: cp.get(sec, key)
    try:
        hall = HallSensorModel(
            Vcc=cp.getfloat("hall", "vcc"),
            k=cp.getfloat("hall", "sensitivity"),
            clamp_lo=cp.getfloat("hall", "clamp_lo"),
            clamp_hi=cp.getfloat("hall", "clamp_hi"),
            noise_sigma=cp.getfloat("hall", "noise_sigma"),
        )
        adc = AdcModel(bits=cp.getint("adc", "bits"), vref=cp.getfloat("adc", "vref"))
        imu = ImuModel(
            accel_range=cp.getfloat("imu", "accel_range"),
            gyro_range=cp.getfloat("imu", "gyro_range"),
            accel_noise_sigma=cp.getfloat("imu", "accel_noise_sigma"),
            gyro_noise_sigma=cp.getfloat("imu", "gyro_noise_sigma"),
        )
        g0 = cp.getfloat("geometry", "baseline_gap")
        C = cp.getfloat("geometry", "dipole_coefficient")
        heights = {kind: cp.getfloat("geometry", key) for kind, key in _HEIGHT_KEYS.items()}
        positions = []
        for jid in canonical_joint_order():
            key = f"{jid.finger.value}.{jid.joint.value}"
            positions.append(tuple(_floats(g("positions", key), 2, f"positions.{key}")))
        geoms = tuple(
            MagnetPairGeometry(g0=g0, h=heights[jid.joint], C=C) for jid in canonical_joint_order()
        )
        layout = GloveLayout(geoms, distance_matrix_from_positions(positions))
        train = TrainConfig(
            alpha=cp.getfloat("train", "alpha"),
            beta1=cp.getfloat("train", "beta1"),
            beta2=cp.getfloat("train", "beta2"),
            epsilon=cp.getfloat("train", "epsilon"),
            epochs=cp.getint("train", "epochs"),
            batch_size=cp.getint("train", "batch_size"),
            val_fraction=cp.getfloat("train", "val_fraction"),
            target_val_accuracy=cp.getfloat("train", "target_val_accuracy"),
            n_hidden=cp.getint("train", "n_hidden"),
        )
        return GloveConfig(
            models=GloveModels(layout=layout, hall=hall, adc=adc, imu=imu, rom=rom),
            n_subjects=cp.getint("dataset", "subjects"),
            reps_per_gesture=cp.getint("dataset", "reps_per_gesture"),
            angle_jitter_sigma=cp.getfloat("dataset", "angle_jitter_sigma"),
            wrist_jitter_sigma=cp.getfloat("dataset", "wrist_jitter_sigma"),
            sample_rate=cp.getfloat("loop", "sample_rate"),
            train=train,
        )
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(f"bad glove config: {exc}") from None


@dataclass(frozen=True)
class WordMap:
    """Class index -> emitted word, plus optional macro action names."""

    words: Dict[int, str]
    actions: Dict[int, str]

    def validate_against(self, vocab: Vocabulary) -> None:
        missing = [i for i in range(len(vocab)) if i not in self.words]
        if missing:
            raise ConfigError(f"word map is missing classes {missing}")
        values = list(self.words.values())
        if len(set(values)) != len(values):
            raise ConfigError("word map words must be unique")
        unknown = [i for i in self.actions if i not in self.words]
        if unknown:
            raise ConfigError(f"actions reference unknown classes {unknown}")


def load_wordmap(path: Optional[str] = None, vocab: Optional[Vocabulary] = None) -> WordMap:
    cp = _read_config(path, "wordmap.cfg")
    if not cp.has_section("words"):
        raise ConfigError("word map needs a [words] section")
    try:
        words = {int(k): v for k, v in cp.items("words")}
        actions = {int(k): v for k, v in cp.items("actions")} if cp.has_section("actions") else {}
    except ValueError:
        raise ConfigError("word map keys must be class indices") from None
    wm = WordMap(words, actions)
    if vocab is not None:
        wm.validate_against(vocab)
    return wm


@dataclass(frozen=True)
class ScriptEntry:
    pose: HandPose
    duration: float  # seconds


def load_pose_script(path: str, vocab: Vocabulary, rom: Optional[RomTable] = None) -> List[ScriptEntry]:
    """Parse a timed pose script.

    Lines (blank and # comments ignored):
        gesture <name> <seconds>
        pose <14 joint angles> <roll> <pitch> <yaw> <seconds>
    The whole script is validated before anything is streamed."""
    rom = rom or RomTable()
    entries: List[ScriptEntry] = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"pose script not found: {path}") from None
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "gesture":
            if len(parts) != 3:
                raise ConfigError(f"line {line_number}: gesture lines need a name and a duration")
            name = parts[1]
            try:
                gesture = vocab.by_name(name)
            except KeyError:
                raise ConfigError(f"line {line_number}: unknown gesture {name!r}") from None
            duration = _script_duration(parts[2], line_number)
            entries.append(ScriptEntry(gesture.canonical_pose, duration))
        elif kind == "pose":
            if len(parts) != 19:
                raise ConfigError(
                    f"line {line_number}: pose lines need 14 angles, 3 wrist angles and a duration"
                )
            try:
                numbers = [float(p) for p in parts[1:]]
            except ValueError:
                raise ConfigError(f"line {line_number}: non-numeric value") from None
            pose = HandPose.from_vector(numbers[:14], tuple(numbers[14:17]))
            violations = validate_pose(pose, rom)
            if violations:
                raise ConfigError(f"line {line_number}: " + "; ".join(violations))
            entries.append(ScriptEntry(pose, _script_duration(parts[18], line_number)))
        else:
            raise ConfigError(f"line {line_number}: unknown directive {kind!r}")
    if not entries:
        raise ConfigError("pose script has no entries")
    return entries


def _script_duration(raw: str, line_number: int) -> float:
    try:
        duration = float(raw)
    except ValueError:
        raise ConfigError(f"line {line_number}: bad duration {raw!r}") from None
    if duration <= 0:
        raise ConfigError(f"line {line_number}: duration must be positive")
    return duration


def expand_script(entries: List[ScriptEntry], sample_rate: float) -> List[HandPose]:
    """Unroll script entries to one pose per loop tick."""
    poses: List[HandPose] = []
    for entry in entries:
        ticks = int(round(entry.duration * sample_rate))
        poses.extend([entry.pose] * max(ticks, 1))
    return poses
