"""From-scratch MLP: 20 inputs -> sigmoid hidden layer -> 11 sigmoid outputs.

The output layer is independent sigmoids trained against one-hot targets
with categorical cross-entropy (not softmax), matching the embedded
inference engine. Training arithmetic is 64-bit; parameters handed back by
train() are quantized to 32-bit so they are bit-identical to what the
weight exporters emit and the firmware runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Sequence, Tuple

import numpy as np

from .physics import AdcModel, ImuModel, SensorFrame

LOG_EPS = 1e-12  # floor inside log() for numerical safety


@dataclass(frozen=True)
class MlpParameters:
    """Weight/bias tensors: W1 (hidden x in), b1, W2 (out x hidden), b2."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def __post_init__(self) -> None:
        h, i = self.W1.shape
        o, h2 = self.W2.shape
        if h2 != h or self.b1.shape != (h,) or self.b2.shape != (o,):
            raise ValueError("inconsistent parameter dimensions")
        for a in (self.W1, self.b1, self.W2, self.b2):
            if not np.all(np.isfinite(a)):
                raise ValueError("parameters must be finite")

    @property
    def n_in(self) -> int:
        return self.W1.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.W1.shape[0]

    @property
    def n_out(self) -> int:
        return self.W2.shape[0]

    def astype32(self) -> "MlpParameters":
        """Round-trip through float32: the deployed precision."""
        return MlpParameters(
            *(a.astype(np.float32).astype(np.float64) for a in (self.W1, self.b1, self.W2, self.b2))
        )


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-channel (min, max) used to squash raw values into [0, 1]."""

    mins: Tuple[float, ...]
    maxs: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mins) != len(self.maxs):
            raise ValueError("mins and maxs must have equal length")
        if any(lo >= hi for lo, hi in zip(self.mins, self.maxs)):
            raise ValueError("every channel needs min < max")


def default_normalization(adc: AdcModel | None = None, imu: ImuModel | None = None) -> NormalizationSpec:
    adc = adc or AdcModel()
    imu = imu or ImuModel()
    mins = (0.0,) * 14 + (-imu.accel_range,) * 3 + (-imu.gyro_range,) * 3
    maxs = (float(adc.max_code),) * 14 + (imu.accel_range,) * 3 + (imu.gyro_range,) * 3
    return NormalizationSpec(mins, maxs)


def normalize(frame: SensorFrame | Sequence[float], spec: NormalizationSpec) -> np.ndarray:
    """Clamp-normalize raw channel values to [0, 1]."""
    raw = np.asarray(frame.values() if isinstance(frame, SensorFrame) else frame, dtype=np.float64)
    if raw.shape != (len(spec.mins),):
        raise ValueError(f"expected {len(spec.mins)} channels, got {raw.shape}")
    mins = np.asarray(spec.mins)
    maxs = np.asarray(spec.maxs)
    return np.clip((raw - mins) / (maxs - mins), 0.0, 1.0)


def normalize_batch(raw: np.ndarray, spec: NormalizationSpec) -> np.ndarray:
    mins = np.asarray(spec.mins)
    maxs = np.asarray(spec.maxs)
    return np.clip((raw - mins) / (maxs - mins), 0.0, 1.0)


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Split by sign to avoid overflow in exp for large |z|.
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(p: MlpParameters, x: Sequence[float] | np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Single-sample inference; returns (outputs, hidden activations)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.n_in,):
        raise ValueError(f"expected input of shape ({p.n_in},), got {x.shape}")
    h = sigmoid(p.W1 @ x + p.b1)
    y = sigmoid(p.W2 @ h + p.b2)
    return y, h


def forward_batch(p: MlpParameters, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched inference over rows of X; returns (Y, H)."""
    if X.ndim != 2 or X.shape[1] != p.n_in:
        raise ValueError(f"expected (n, {p.n_in}) inputs, got {X.shape}")
    H = sigmoid(X @ p.W1.T + p.b1)
    Y = sigmoid(H @ p.W2.T + p.b2)
    return Y, H


def classify(y: Sequence[float] | np.ndarray) -> Tuple[int, float]:
    """Argmax class with its activation; ties go to the lowest index."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty output vector")
    if np.any(np.isnan(y)):
        raise ValueError("NaN in output vector")
    idx = int(np.argmax(y))
    return idx, float(y[idx])


def loss(y: Sequence[float] | np.ndarray, target: Sequence[float] | np.ndarray) -> float:
    """Categorical cross-entropy of one sample against a one-hot target.

    The sigmoid outputs are first rescaled to sum to 1 (the standard
    framework behavior for non-logit predictions); without that coupling,
    independent sigmoids trained on the target term alone would drift to
    the all-ones degenerate optimum."""
    y = np.asarray(y, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    p = y / np.sum(y)
    return float(-np.sum(t * np.log(np.maximum(p, LOG_EPS))))


def batch_loss(Y: np.ndarray, T: np.ndarray) -> float:
    """Mean per-sample cross-entropy over a batch."""
    P = Y / np.sum(Y, axis=1, keepdims=True)
    return float(-np.sum(T * np.log(np.maximum(P, LOG_EPS))) / Y.shape[0])


@dataclass(frozen=True)
class Gradients:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray


def backward(p: MlpParameters, X: np.ndarray, T: np.ndarray) -> Gradients:
    """Analytic gradients of the mean batch loss.

    For one sample with outputs y, sum S and one-hot t, the loss is
    L = -sum_i t_i * log(y_i / S), so dL/dy_j = -t_j/y_j + 1/S and the
    output-layer delta is  dL/dz_j = -t_j*(1 - y_j) + y_j*(1 - y_j)/S.
    The second term is what pushes non-target outputs down."""
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("batch must be a non-empty 2-d array")
    if T.shape != (X.shape[0], p.n_out):
        raise ValueError(f"targets must have shape ({X.shape[0]}, {p.n_out})")
    n = X.shape[0]
    Y, H = forward_batch(p, X)
    S = np.sum(Y, axis=1, keepdims=True)
    dZ2 = (-T * (1.0 - Y) + Y * (1.0 - Y) / S) / n
    dW2 = dZ2.T @ H
    db2 = dZ2.sum(axis=0)
    dH = dZ2 @ p.W2
    dZ1 = dH * H * (1.0 - H)
    dW1 = dZ1.T @ X
    db1 = dZ1.sum(axis=0)
    return Gradients(dW1, db1, dW2, db2)


@dataclass(frozen=True)
class AdamState:
    m: Gradients
    v: Gradients
    t: int = 0

    @staticmethod
    def zeros_like(p: MlpParameters) -> "AdamState":
        z = lambda a: np.zeros_like(a)
        return AdamState(
            m=Gradients(z(p.W1), z(p.b1), z(p.W2), z(p.b2)),
            v=Gradients(z(p.W1), z(p.b1), z(p.W2), z(p.b2)),
            t=0,
        )


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 300
    batch_size: int = 32
    val_fraction: float = 0.2
    target_val_accuracy: float = 0.96
    seed: int = 42
    n_hidden: int = 24
    patience: int = 3  # consecutive evaluations at/above target before stopping

    def __post_init__(self) -> None:
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must be in (0, 1)")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not (0 < self.val_fraction < 1):
            raise ValueError("val_fraction must be in (0, 1)")


def adam_step(
    p: MlpParameters, grads: Gradients, state: AdamState, config: TrainConfig
) -> Tuple[MlpParameters, AdamState]:
    """One bias-corrected Adam update; returns fresh parameters and state."""
    t = state.t + 1
    b1c = 1.0 - config.beta1**t
    b2c = 1.0 - config.beta2**t
    new_p = {}
    new_m = {}
    new_v = {}
    for name in ("W1", "b1", "W2", "b2"):
        g = getattr(grads, name)
        if g.shape != getattr(p, name).shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        m = config.beta1 * getattr(state.m, name) + (1.0 - config.beta1) * g
        v = config.beta2 * getattr(state.v, name) + (1.0 - config.beta2) * g * g
        m_hat = m / b1c
        v_hat = v / b2c
        new_p[name] = getattr(p, name) - config.alpha * m_hat / (np.sqrt(v_hat) + config.epsilon)
        new_m[name] = m
        new_v[name] = v
    return (
        MlpParameters(new_p["W1"], new_p["b1"], new_p["W2"], new_p["b2"]),
        AdamState(m=Gradients(**new_m), v=Gradients(**new_v), t=t),
    )


def init_parameters(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> MlpParameters:
    """Glorot-uniform weights, zero biases."""
    lim1 = math.sqrt(6.0 / (n_in + n_hidden))
    lim2 = math.sqrt(6.0 / (n_hidden + n_out))
    return MlpParameters(
        W1=rng.uniform(-lim1, lim1, size=(n_hidden, n_in)),
        b1=np.zeros(n_hidden),
        W2=rng.uniform(-lim2, lim2, size=(n_out, n_hidden)),
        b2=np.zeros(n_out),
    )


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    T = np.zeros((labels.shape[0], n_classes))
    T[np.arange(labels.shape[0]), labels] = 1.0
    return T


@dataclass(frozen=True)
class TrainReport:
    train_loss: Tuple[float, ...]
    val_loss: Tuple[float, ...]
    val_accuracy: Tuple[float, ...]
    stopped_epoch: int  # number of epochs actually run
    best_epoch: int  # 1-based epoch whose parameters were returned
    final_val_accuracy: float  # of the returned (32-bit quantized) parameters
    confusion: np.ndarray  # rows true class, cols predicted
    n_train: int
    n_val: int


def evaluate(
    p: MlpParameters, X: np.ndarray, labels: np.ndarray, n_classes: int
) -> Tuple[float, float, np.ndarray]:
    """(accuracy, mean loss, confusion matrix) on normalized inputs."""
    Y, _ = forward_batch(p, X)
    pred = np.argmax(Y, axis=1)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, q in zip(labels, pred):
        confusion[t, q] += 1
    acc = float(np.mean(pred == labels))
    return acc, batch_loss(Y, one_hot(labels, n_classes)), confusion


def train_arrays(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    n_classes: int,
    config: TrainConfig,
) -> Tuple[MlpParameters, TrainReport]:
    """Mini-batch Adam on already-normalized feature arrays.

    Stops early after `patience` consecutive validation passes at or above
    the target accuracy; always returns the best-validation parameters,
    quantized to 32-bit."""
    counts = np.bincount(y_train, minlength=n_classes)
    if np.any(counts < 1):
        missing = [int(c) for c in np.flatnonzero(counts < 1)]
        raise ValueError(f"training split is missing classes {missing}")
    rng = np.random.default_rng(config.seed)
    p = init_parameters(X_train.shape[1], config.n_hidden, n_classes, rng)
    state = AdamState.zeros_like(p)
    T_train = one_hot(y_train, n_classes)

    train_losses: List[float] = []
    val_losses: List[float] = []
    val_accs: List[float] = []
    best_acc = -1.0
    best_epoch = 0
    best_params = p
    consecutive = 0
    n = X_train.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            Xb, Tb = X_train[idx], T_train[idx]
            Yb, _ = forward_batch(p, Xb)
            epoch_losses.append(batch_loss(Yb, Tb))
            grads = backward(p, Xb, Tb)
            p, state = adam_step(p, grads, state, config)
        acc, vloss, _ = evaluate(p, X_val, y_val, n_classes)
        train_losses.append(float(np.mean(epoch_losses)))
        val_losses.append(vloss)
        val_accs.append(acc)
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_params = p
        consecutive = consecutive + 1 if acc >= config.target_val_accuracy else 0
        if consecutive >= config.patience:
            break

    final = best_params.astype32()
    final_acc, _, confusion = evaluate(final, X_val, y_val, n_classes)
    report = TrainReport(
        train_loss=tuple(train_losses),
        val_loss=tuple(val_losses),
        val_accuracy=tuple(val_accs),
        stopped_epoch=len(train_losses),
        best_epoch=best_epoch,
        final_val_accuracy=final_acc,
        confusion=confusion,
        n_train=int(n),
        n_val=int(X_val.shape[0]),
    )
    return final, report
