"""Command-line suite: gen, train, eval, export, simulate, infer, serve.

Every command is deterministic given its flags, config and seed; a run
manifest capturing all three is written next to every produced artifact.
Primary outputs are written to a temp file and renamed on success, so a
failing command never leaves a partial artifact behind.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import socket
import sys
import tempfile
from dataclasses import asdict, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .configio import (
    ConfigError,
    GloveConfig,
    WordMap,
    expand_script,
    load_glove_config,
    load_pose_script,
    load_rom,
    load_vocabulary,
    load_wordmap,
)
from .dataset import (
    CsvFormatError,
    GestureDataset,
    SplitMode,
    SplitSpec,
    generate_synthetic,
    read_csv,
    split,
    to_arrays,
    write_csv,
)
from .firmware import LoopConfig, LoopMode, run_loop
from .hand import AnthropometricProfile, percentile_scale
from .mlp import classify, evaluate, forward, normalize, normalize_batch
from .protocol import DataFrame, FrameParseError, fmt9, parse_frame
from .reporting import (
    save_confusion_matrix,
    save_learning_curves,
    write_confusion_csv,
    write_report_csv,
    write_report_json,
)
from .serve import ServeEngine, ServeServer
from .trainer import train
from .weights_io import (
    WeightFormatError,
    export_binary,
    export_firmware_arrays,
    import_binary,
)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _atomic_write(path: Path, data) -> None:
    """Write bytes or text via a temp file + rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    kwargs = {} if isinstance(data, bytes) else {"encoding": "utf-8", "newline": "\n"}
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **kwargs) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(
    path: Path,
    command: str,
    options: Dict,
    inputs: Sequence[Path],
    outputs: Sequence[Path],
) -> None:
    manifest = {
        "tool": "hallglove",
        "version": __version__,
        "command": command,
        "options": options,
        "inputs": {str(p): _sha256(p) for p in inputs if p is not None and Path(p).exists()},
        "outputs": [str(p) for p in outputs],
    }
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_context(args) -> GloveConfig:
    rom = load_rom(args.rom)
    return load_glove_config(args.config, rom=rom)


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="glove config file (default: packaged)")
    sub.add_argument("--vocab", help="vocabulary config file (default: packaged)")
    sub.add_argument("--rom", help="ROM config file (default: packaged)")
    sub.add_argument("--seed", type=int, default=42, help="run seed (default 42)")
    sub.add_argument(
        "--format", choices=("text", "machine"), default="text", help="output style"
    )


def cmd_gen(args) -> int:
    cfg = _load_context(args)
    vocab = load_vocabulary(args.vocab, rom=cfg.models.rom)
    n_subjects = args.subjects if args.subjects is not None else cfg.n_subjects
    reps = args.reps if args.reps is not None else cfg.reps_per_gesture
    dataset = generate_synthetic(
        vocab,
        cfg.models,
        n_subjects=n_subjects,
        reps_per_gesture=reps,
        angle_jitter_sigma=cfg.angle_jitter_sigma,
        wrist_jitter_sigma=cfg.wrist_jitter_sigma,
        noise=not args.no_noise,
        seed=args.seed,
    )
    out = Path(args.out)
    buf = io.StringIO()
    write_csv(dataset, buf)
    _atomic_write(out, buf.getvalue())
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "gen",
        {
            "seed": args.seed,
            "subjects": n_subjects,
            "reps_per_gesture": reps,
            "angle_jitter_sigma": cfg.angle_jitter_sigma,
            "wrist_jitter_sigma": cfg.wrist_jitter_sigma,
            "noise": not args.no_noise,
            "config": args.config,
            "vocab": args.vocab,
            "rom": args.rom,
        },
        [Path(p) for p in (args.config, args.vocab, args.rom) if p],
        [out],
    )
    if args.format == "machine":
        print(json.dumps({"records": len(dataset), "path": str(out)}))
    else:
        print(f"wrote {len(dataset)} records to {out}")
    return 0


def _split_spec_from_args(args, default_seed: int) -> SplitSpec:
    if getattr(args, "holdout", None):
        return SplitSpec(mode=SplitMode.LEAVE_ONE_SUBJECT_OUT, holdout_subject=args.holdout)
    return SplitSpec(
        mode=SplitMode.STRATIFIED_RANDOM,
        val_fraction=args.val_fraction,
        seed=default_seed,
    )


def cmd_train(args) -> int:
    cfg = _load_context(args)
    vocab = load_vocabulary(args.vocab, rom=cfg.models.rom)
    dataset = read_csv(args.data, vocab)
    train_cfg = replace(cfg.train, seed=args.seed)
    if args.epochs is not None:
        train_cfg = replace(train_cfg, epochs=args.epochs)
    if args.val_fraction is not None:
        train_cfg = replace(train_cfg, val_fraction=args.val_fraction)
    split_spec = None
    if args.holdout:
        split_spec = SplitSpec(mode=SplitMode.LEAVE_ONE_SUBJECT_OUT, holdout_subject=args.holdout)
    params, report = train(dataset, train_cfg, split_spec=split_spec, norm=cfg.models.normalization())

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    weights_path = out_dir / "weights.glvw"
    arrays_path = out_dir / "weights_arrays.h"
    _atomic_write(weights_path, export_binary(params))
    _atomic_write(arrays_path, export_firmware_arrays(params))
    write_report_csv(report, out_dir / "report.csv")
    write_report_json(report, out_dir / "report.json")
    save_learning_curves(report, out_dir / "learning_curves.png")
    save_confusion_matrix(report.confusion, vocab.words(), out_dir / "confusion_matrix.png")
    outputs = [
        weights_path,
        arrays_path,
        out_dir / "report.csv",
        out_dir / "report.json",
        out_dir / "learning_curves.png",
        out_dir / "confusion_matrix.png",
    ]
    _write_manifest(
        out_dir / "manifest.json",
        "train",
        {
            "seed": args.seed,
            "data": str(args.data),
            "epochs": train_cfg.epochs,
            "batch_size": train_cfg.batch_size,
            "alpha": train_cfg.alpha,
            "n_hidden": train_cfg.n_hidden,
            "val_fraction": train_cfg.val_fraction,
            "target_val_accuracy": train_cfg.target_val_accuracy,
            "holdout": args.holdout,
            "config": args.config,
            "vocab": args.vocab,
            "rom": args.rom,
        },
        [Path(args.data)] + [Path(p) for p in (args.config, args.vocab, args.rom) if p],
        outputs,
    )
    if args.format == "machine":
        print(
            json.dumps(
                {
                    "val_accuracy": report.final_val_accuracy,
                    "epochs_run": report.stopped_epoch,
                    "weights": str(weights_path),
                }
            )
        )
    else:
        print(f"validation accuracy: {fmt9(report.final_val_accuracy)}")
        print(f"epochs run: {report.stopped_epoch} (best epoch {report.best_epoch})")
        print(f"weights: {weights_path}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load_context(args)
    vocab = load_vocabulary(args.vocab, rom=cfg.models.rom)
    dataset = read_csv(args.data, vocab)
    params = import_binary(Path(args.weights).read_bytes())
    if params.n_out != len(vocab):
        raise ConfigError(
            f"weights expect {params.n_out} classes but vocabulary has {len(vocab)}"
        )
    norm = cfg.models.normalization()
    n_classes = len(vocab)

    result: Dict = {}
    if args.split == "loso":
        per_subject: Dict[str, float] = {}
        total_correct = 0
        for subject in dataset.subjects():
            records = [r for r in dataset.records if r.subject_id == subject]
            X, y = to_arrays(records)
            acc, _, _ = evaluate(params, normalize_batch(X, norm), y, n_classes)
            per_subject[subject] = acc
            total_correct += int(round(acc * len(records)))
        result["per_subject"] = per_subject
        result["accuracy"] = total_correct / len(dataset)
        confusion = None
    else:
        spec = _split_spec_from_args(args, args.seed)
        _, val_set = split(dataset, spec)
        X, y = to_arrays(val_set.records)
        acc, _, confusion = evaluate(params, normalize_batch(X, norm), y, n_classes)
        result["accuracy"] = acc
        result["n_val"] = len(val_set)
        result["confusion"] = confusion.tolist()

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if confusion is not None:
            write_confusion_csv(confusion, vocab.words(), out_dir / "confusion.csv")
            save_confusion_matrix(confusion, vocab.words(), out_dir / "confusion.png")
            _write_manifest(
                out_dir / "manifest.json",
                "eval",
                {"seed": args.seed, "data": str(args.data), "weights": str(args.weights),
                 "split": args.split, "val_fraction": args.val_fraction, "holdout": args.holdout},
                [Path(args.data), Path(args.weights)],
                [out_dir / "confusion.csv", out_dir / "confusion.png"],
            )

    if args.format == "machine":
        print(json.dumps(result, sort_keys=True))
    else:
        print(f"accuracy: {fmt9(result['accuracy'])}")
        if "per_subject" in result:
            for subject, acc in result["per_subject"].items():
                print(f"  {subject}: {fmt9(acc)}")
        elif confusion is not None:
            print("confusion (rows true, cols predicted):")
            for name, row in zip(vocab.words(), confusion):
                print(f"  {name:>10} " + " ".join(f"{int(v):4d}" for v in row))
    return 0


def cmd_export(args) -> int:
    params = import_binary(Path(args.weights).read_bytes())
    out = Path(args.out)
    _atomic_write(out, export_firmware_arrays(params))
    _write_manifest(
        Path(str(out) + ".manifest.json"),
        "export",
        {"weights": str(args.weights)},
        [Path(args.weights)],
        [out],
    )
    print(f"wrote firmware arrays for {params.n_in}/{params.n_hidden}/{params.n_out} to {out}")
    return 0


def _parse_endpoint(spec: str) -> tuple:
    host, _, port = spec.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"endpoint must be HOST:PORT, got {spec!r}")
    return host, int(port)


def cmd_simulate(args) -> int:
    cfg = _load_context(args)
    vocab = load_vocabulary(args.vocab, rom=cfg.models.rom)
    entries = load_pose_script(args.script, vocab, rom=cfg.models.rom)
    rate = args.rate if args.rate is not None else cfg.sample_rate
    poses = expand_script(entries, rate)
    models = cfg.models
    if args.percentile is not None:
        models = models.with_profile(
            AnthropometricProfile("sim", percentile_scale(args.percentile))
        )
    if args.no_noise:
        models = models.without_noise()
    mode = LoopMode.INFER if args.mode == "infer" else LoopMode.COLLECT
    params = None
    if mode is LoopMode.INFER:
        if not args.weights:
            raise ConfigError("simulate --mode infer needs --weights")
        params = import_binary(Path(args.weights).read_bytes())

    loop_kwargs = dict(params=params, rng=args.seed, realtime=args.realtime)
    if args.connect:
        with socket.create_connection(_parse_endpoint(args.connect), timeout=10.0) as conn:
            run_loop(
                poses, models, LoopConfig(rate, mode),
                lambda line: conn.sendall(line.encode("ascii")), **loop_kwargs,
            )
    elif args.out and args.out != "-":
        out_path = Path(args.out)
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            run_loop(poses, models, LoopConfig(rate, mode), fh.write, **loop_kwargs)
        _write_manifest(
            Path(str(out_path) + ".manifest.json"),
            "simulate",
            {"seed": args.seed, "script": str(args.script), "mode": args.mode,
             "rate": rate, "percentile": args.percentile, "no_noise": args.no_noise},
            [Path(args.script)],
            [out_path],
        )
    else:
        def sink(line: str) -> None:
            sys.stdout.write(line)
            sys.stdout.flush()

        run_loop(poses, models, LoopConfig(rate, mode), sink, **loop_kwargs)
    return 0


def cmd_infer(args) -> int:
    cfg = _load_context(args)
    vocab = load_vocabulary(args.vocab, rom=cfg.models.rom)
    wordmap = load_wordmap(args.wordmap, vocab)
    params = import_binary(Path(args.weights).read_bytes())
    if params.n_out != len(vocab):
        raise ConfigError(
            f"weights expect {params.n_out} classes but vocabulary has {len(vocab)}"
        )
    norm = cfg.models.normalization()

    def consume(lines) -> None:
        candidate = None
        run_length = 0
        last_emitted = None
        for line in lines:
            if not line.strip():
                continue
            try:
                frame = parse_frame(line)
            except FrameParseError as exc:
                print(f"skipped malformed frame: {exc}", file=sys.stderr)
                continue
            if not isinstance(frame, DataFrame):
                continue
            y, _ = forward(params, normalize(list(map(float, frame.codes)) + list(frame.imu), norm))
            class_index, confidence = classify(y)
            if confidence < args.min_confidence:
                candidate = None
                run_length = 0
                continue
            if class_index == candidate:
                run_length += 1
            else:
                candidate = class_index
                run_length = 1
            if run_length == args.debounce and candidate != last_emitted:
                last_emitted = candidate
                if args.format == "machine":
                    print(
                        json.dumps(
                            {"class": candidate, "word": wordmap.words[candidate],
                             "confidence": round(confidence, 6)}
                        ),
                        flush=True,
                    )
                else:
                    print(wordmap.words[candidate], flush=True)
                    if candidate in wordmap.actions:
                        print(f"ACTION,{wordmap.actions[candidate]}", flush=True)

    if args.listen:
        server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(_parse_endpoint(args.listen))
        server.listen(1)
        print(f"listening on {server.getsockname()[0]}:{server.getsockname()[1]}", file=sys.stderr)
        conn, _ = server.accept()
        try:
            consume(conn.makefile("r", encoding="utf-8", newline="\n"))
        finally:
            conn.close()
            server.close()
    elif args.source and args.source != "-":
        with open(args.source, "r", encoding="utf-8") as fh:
            consume(fh)
    else:
        consume(sys.stdin)
    return 0


def cmd_serve(args) -> int:
    cfg = _load_context(args)
    vocab = load_vocabulary(args.vocab, rom=cfg.models.rom)
    wordmap = load_wordmap(args.wordmap, vocab)
    params = import_binary(Path(args.weights).read_bytes())
    if params.n_out != len(vocab):
        raise ConfigError(
            f"weights expect {params.n_out} classes but vocabulary has {len(vocab)}"
        )
    engine = ServeEngine(
        cfg.models,
        params,
        vocab,
        wordmap,
        record_path=Path(args.record_out) if args.record_out else None,
        seed=args.seed,
    )
    server = ServeServer(engine, host=args.host, port=args.port)
    host, port = server.address
    print(f"serving on {host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hallglove",
        description="Hall-effect sign-language glove: simulate, train, deploy at desk scale.",
    )
    parser.add_argument("--version", action="version", version=f"hallglove {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen", help="generate a synthetic multi-subject dataset CSV")
    _common_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--subjects", type=int, help="override subject count")
    p.add_argument("--reps", type=int, help="override reps per gesture per subject")
    p.add_argument("--no-noise", action="store_true", help="disable sensor noise")
    p.set_defaults(func=cmd_gen)

    p = subs.add_parser("train", help="train the MLP and export weights")
    _common_flags(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--epochs", type=int, help="override epoch count")
    p.add_argument("--val-fraction", type=float, help="override validation fraction")
    p.add_argument("--holdout", help="leave-one-subject-out: subject id for validation")
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("eval", help="evaluate exported weights on a dataset split")
    _common_flags(p)
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--weights", required=True, help=".glvw weights file")
    p.add_argument("--split", choices=("stratified", "loso"), default="stratified")
    p.add_argument("--val-fraction", type=float, default=0.2)
    p.add_argument("--holdout", help="evaluate only this subject's records")
    p.add_argument("--out", help="directory for confusion csv/figure")
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("export", help="convert .glvw weights to firmware array text")
    _common_flags(p)
    p.add_argument("--weights", required=True, help=".glvw weights file")
    p.add_argument("--out", required=True, help="output text path")
    p.set_defaults(func=cmd_export)

    p = subs.add_parser("simulate", help="stream wire frames for a timed pose script")
    _common_flags(p)
    p.add_argument("--script", required=True, help="pose script path")
    p.add_argument("--mode", choices=("collect", "infer"), default="collect")
    p.add_argument("--weights", help=".glvw weights (infer mode)")
    p.add_argument("--rate", type=float, help="sample rate Hz (default from config)")
    p.add_argument("--percentile", type=float, help="subject hand-size percentile [25, 75]")
    p.add_argument("--no-noise", action="store_true", help="disable sensor noise")
    p.add_argument("--realtime", action="store_true", help="pace output at the sample rate")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--connect", metavar="HOST:PORT", help="stream to a local socket instead")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("infer", help="turn a Data-frame stream into debounced words")
    _common_flags(p)
    p.add_argument("--weights", required=True, help=".glvw weights file")
    p.add_argument("--wordmap", help="word map config (default: packaged)")
    p.add_argument("--source", default="-", help="input stream path (default stdin)")
    p.add_argument("--listen", metavar="HOST:PORT", help="accept one frame stream on a local socket")
    p.add_argument("--debounce", type=int, default=5, help="consecutive identical classifications before emitting")
    p.add_argument("--min-confidence", type=float, default=0.0,
                   help="discard classifications whose top activation is below this floor")
    p.set_defaults(func=cmd_infer)

    p = subs.add_parser("serve", help="interactive UI session endpoint on a local socket")
    _common_flags(p)
    p.add_argument("--weights", required=True, help=".glvw weights file")
    p.add_argument("--wordmap", help="word map config (default: packaged)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7710)
    p.add_argument("--record-out", help="CSV path for samples captured via record messages")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CsvFormatError, WeightFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
