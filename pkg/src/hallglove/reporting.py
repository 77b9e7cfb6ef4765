"""Training/evaluation reports: delimited per-epoch output plus rendered
figures (learning curves, confusion matrix) written next to it."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .mlp import TrainReport

# Pin the PNG metadata so repeated runs produce identical bytes.
_PNG_METADATA = {"Software": "hallglove"}


def write_report_csv(report: TrainReport, path: Path) -> None:
    lines = ["epoch,train_loss,val_loss,val_accuracy"]
    for i, (tl, vl, va) in enumerate(
        zip(report.train_loss, report.val_loss, report.val_accuracy), start=1
    ):
        lines.append(f"{i},{tl:.9g},{vl:.9g},{va:.9g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def report_summary(report: TrainReport) -> dict:
    return {
        "epochs_run": report.stopped_epoch,
        "best_epoch": report.best_epoch,
        "final_val_accuracy": report.final_val_accuracy,
        "n_train": report.n_train,
        "n_val": report.n_val,
        "confusion": report.confusion.tolist(),
    }


def write_report_json(report: TrainReport, path: Path) -> None:
    path.write_text(json.dumps(report_summary(report), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def save_learning_curves(report: TrainReport, path: Path) -> None:
    epochs = np.arange(1, report.stopped_epoch + 1)
    fig, ax_loss = plt.subplots(figsize=(7, 4.5))
    ax_loss.plot(epochs, report.train_loss, label="train loss", color="tab:blue")
    ax_loss.plot(epochs, report.val_loss, label="val loss", color="tab:orange")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("cross-entropy loss")
    ax_acc = ax_loss.twinx()
    ax_acc.plot(epochs, report.val_accuracy, label="val accuracy", color="tab:green")
    ax_acc.set_ylabel("validation accuracy")
    ax_acc.set_ylim(0.0, 1.02)
    lines, labels = ax_loss.get_legend_handles_labels()
    lines2, labels2 = ax_acc.get_legend_handles_labels()
    ax_loss.legend(lines + lines2, labels + labels2, loc="center right")
    ax_loss.set_title("Training curves")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_METADATA)
    plt.close(fig)


def save_confusion_matrix(confusion: np.ndarray, class_names: Sequence[str], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(confusion, cmap="Blues")
    ax.set_xticks(range(len(class_names)), class_names, rotation=45, ha="right")
    ax.set_yticks(range(len(class_names)), class_names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = confusion.max() / 2 if confusion.max() > 0 else 0.5
    for i in range(confusion.shape[0]):
        for j in range(confusion.shape[1]):
            color = "white" if confusion[i, j] > threshold else "black"
            ax.text(j, i, str(int(confusion[i, j])), ha="center", va="center", color=color, fontsize=8)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title("Validation confusion matrix")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_METADATA)
    plt.close(fig)


def write_confusion_csv(confusion: np.ndarray, class_names: Sequence[str], path: Path) -> None:
    lines = ["true\\predicted," + ",".join(class_names)]
    for name, row in zip(class_names, confusion):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
