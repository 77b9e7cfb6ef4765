from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from hallglove.cli import main
from hallglove.configio import load_vocabulary
from hallglove.dataset import read_csv
from hallglove.mlp import forward
from hallglove.protocol import DataFrame, parse_frame
from hallglove.weights_io import import_binary, parse_firmware_arrays


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Small end-to-end workspace: generated dataset plus a trained run."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data.csv"
    run = root / "run"
    assert main(["gen", "--out", str(data), "--subjects", "3", "--reps", "10", "--seed", "11"]) == 0
    assert main(["train", "--data", str(data), "--out", str(run), "--epochs", "120", "--seed", "11"]) == 0
    return {"root": root, "data": data, "run": run}


class TestGen:
    def test_row_count_and_manifest(self, workspace, vocab):
        dataset = read_csv(workspace["data"], vocab)
        assert len(dataset) == 11 * 3 * 10
        manifest = json.loads((workspace["root"] / "data.csv.manifest.json").read_text())
        assert manifest["command"] == "gen"
        assert manifest["options"]["seed"] == 11
        assert str(workspace["data"]) in manifest["outputs"]

    def test_same_seed_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["gen", "--out", str(a), "--subjects", "2", "--reps", "3", "--seed", "5"]) == 0
        assert main(["gen", "--out", str(b), "--subjects", "2", "--reps", "3", "--seed", "5"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_config_fails_without_partial_output(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        code = main(["gen", "--out", str(out), "--config", str(tmp_path / "absent.cfg")])
        assert code == 1
        assert not out.exists()
        assert "error:" in capsys.readouterr().err

    def test_machine_format(self, tmp_path, capsys):
        out = tmp_path / "m.csv"
        main(["gen", "--out", str(out), "--subjects", "1", "--reps", "2", "--format", "machine"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["records"] == 22


class TestTrain:
    def test_outputs_exist(self, workspace):
        run = workspace["run"]
        for name in (
            "weights.glvw",
            "weights_arrays.h",
            "report.csv",
            "report.json",
            "learning_curves.png",
            "confusion_matrix.png",
            "manifest.json",
        ):
            assert (run / name).exists(), name

    def test_weights_round_trip(self, workspace):
        params = import_binary((workspace["run"] / "weights.glvw").read_bytes())
        assert (params.n_in, params.n_out) == (20, 11)
        text_params = parse_firmware_arrays((workspace["run"] / "weights_arrays.h").read_text())
        x = np.random.default_rng(0).uniform(0, 1, size=20)
        ya, _ = forward(params, x)
        yb, _ = forward(text_params, x)
        assert np.max(np.abs(ya - yb)) <= 1e-6

    def test_report_epochs_bounded(self, workspace):
        report = json.loads((workspace["run"] / "report.json").read_text())
        assert report["epochs_run"] <= 120
        assert 0.0 <= report["final_val_accuracy"] <= 1.0

    def test_degenerate_dataset_rejected(self, tmp_path, vocab, capsys):
        # single-class file: every split/training precondition fails
        from hallglove.dataset import CSV_HEADER

        bad = tmp_path / "bad.csv"
        rows = [CSV_HEADER] + ["s1,0," + ",".join(["5"] * 14 + ["0"] * 6)] * 8
        bad.write_text("\n".join(rows) + "\n")
        assert main(["train", "--data", str(bad), "--out", str(tmp_path / "r")]) == 1
        assert not (tmp_path / "r" / "weights.glvw").exists()


class TestEval:
    def test_matches_train_report_exactly(self, workspace, capsys):
        code = main(
            [
                "eval",
                "--data", str(workspace["data"]),
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--seed", "11",
                "--format", "machine",
            ]
        )
        assert code == 0
        result = json.loads(capsys.readouterr().out)
        report = json.loads((workspace["run"] / "report.json").read_text())
        assert result["accuracy"] == report["final_val_accuracy"]
        assert result["confusion"] == report["confusion"]

    def test_confusion_trace_over_total_is_accuracy(self, workspace, capsys):
        main(
            [
                "eval",
                "--data", str(workspace["data"]),
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--seed", "11",
                "--format", "machine",
            ]
        )
        result = json.loads(capsys.readouterr().out)
        confusion = np.array(result["confusion"])
        assert confusion.trace() / confusion.sum() == pytest.approx(result["accuracy"], rel=1e-12)

    def test_loso_reports_per_subject_accuracies(self, workspace, capsys):
        main(
            [
                "eval",
                "--data", str(workspace["data"]),
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--split", "loso",
                "--format", "machine",
            ]
        )
        result = json.loads(capsys.readouterr().out)
        assert sorted(result["per_subject"]) == ["s1", "s2", "s3"]

    def test_eval_writes_figures_when_asked(self, workspace, tmp_path):
        out = tmp_path / "evalout"
        main(
            [
                "eval",
                "--data", str(workspace["data"]),
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--seed", "11",
                "--out", str(out),
            ]
        )
        assert (out / "confusion.csv").exists()
        assert (out / "confusion.png").exists()

    def test_dimension_mismatch_fails(self, workspace, tmp_path, capsys):
        from hallglove.mlp import init_parameters
        from hallglove.weights_io import export_binary

        bad = tmp_path / "bad.glvw"
        bad.write_bytes(export_binary(init_parameters(20, 8, 7, np.random.default_rng(1))))
        code = main(["eval", "--data", str(workspace["data"]), "--weights", str(bad)])
        assert code == 1


class TestExport:
    def test_glvw_to_arrays(self, workspace, tmp_path):
        out = tmp_path / "arrays.h"
        code = main(["export", "--weights", str(workspace["run"] / "weights.glvw"), "--out", str(out)])
        assert code == 0
        reparsed = parse_firmware_arrays(out.read_text())
        direct = import_binary((workspace["run"] / "weights.glvw").read_bytes())
        for name in ("W1", "b1", "W2", "b2"):
            assert np.array_equal(getattr(reparsed, name), getattr(direct, name))


class TestSimulate:
    def script(self, tmp_path, body) -> str:
        path = tmp_path / "script.txt"
        path.write_text(body)
        return str(path)

    def test_three_gestures_two_seconds_at_50hz(self, tmp_path):
        script = self.script(tmp_path, "gesture namaste 2\ngesture pani 2\ngesture khana 2\n")
        out = tmp_path / "frames.txt"
        code = main(["simulate", "--script", script, "--out", str(out), "--seed", "3"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 300
        frames = [parse_frame(line + "\n") for line in lines]
        assert all(isinstance(f, DataFrame) for f in frames)
        assert [f.seq for f in frames] == list(range(300))

    def test_unknown_gesture_fails_before_streaming(self, tmp_path, capsys):
        script = self.script(tmp_path, "gesture waving 1\n")
        out = tmp_path / "frames.txt"
        assert main(["simulate", "--script", script, "--out", str(out)]) == 1
        assert not out.exists()
        assert "waving" in capsys.readouterr().err

    def test_deterministic_with_fixed_seed(self, tmp_path):
        script = self.script(tmp_path, "gesture ho 0.5\n")
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        main(["simulate", "--script", script, "--out", str(a), "--seed", "8"])
        main(["simulate", "--script", script, "--out", str(b), "--seed", "8"])
        assert a.read_bytes() == b.read_bytes()

    def test_explicit_pose_lines(self, tmp_path):
        script = self.script(tmp_path, "pose " + " ".join(["10"] * 14) + " 0 0 0 0.2\n")
        out = tmp_path / "frames.txt"
        assert main(["simulate", "--script", script, "--out", str(out), "--rate", "10"]) == 0
        assert len(out.read_text().splitlines()) == 2

    def test_infer_mode_emits_gesture_frames(self, workspace, tmp_path):
        script = self.script(tmp_path, "gesture dhanyabad 0.5\n")
        out = tmp_path / "g.txt"
        code = main(
            [
                "simulate", "--script", script, "--mode", "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--out", str(out), "--seed", "4",
            ]
        )
        assert code == 0
        frames = [parse_frame(line + "\n") for line in out.read_text().splitlines()]
        assert all(f.__class__.__name__ == "GestureFrame" for f in frames)


class TestInfer:
    def test_pipe_emits_debounced_word(self, workspace, tmp_path, capsys):
        script = tmp_path / "script.txt"
        script.write_text("gesture pani 1\n")
        frames = tmp_path / "frames.txt"
        main(["simulate", "--script", str(script), "--out", str(frames), "--seed", "6"])
        code = main(
            [
                "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--source", str(frames),
            ]
        )
        assert code == 0
        words = capsys.readouterr().out.splitlines()
        assert words == ["pani"]

    def test_sequence_of_gestures_emits_each_word_once(self, workspace, tmp_path, capsys):
        script = tmp_path / "script.txt"
        script.write_text("gesture namaste 1\ngesture dhanyabad 1\ngesture ma 1\n")
        frames = tmp_path / "frames.txt"
        main(["simulate", "--script", str(script), "--out", str(frames), "--seed", "6"])
        main(
            [
                "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--source", str(frames),
            ]
        )
        words = capsys.readouterr().out.splitlines()
        assert words == ["namaste", "dhanyabad", "ma"]

    def test_alternating_below_debounce_is_silent(self, workspace, tmp_path, capsys):
        # interleave two gestures tick by tick: no run ever reaches 5
        script_a = tmp_path / "a.txt"
        script_a.write_text("gesture namaste 0.5\n")
        script_b = tmp_path / "b.txt"
        script_b.write_text("gesture dhanyabad 0.5\n")
        fa, fb = tmp_path / "fa.txt", tmp_path / "fb.txt"
        main(["simulate", "--script", str(script_a), "--out", str(fa), "--no-noise"])
        main(["simulate", "--script", str(script_b), "--out", str(fb), "--no-noise"])
        mixed = tmp_path / "mixed.txt"
        lines_a = fa.read_text().splitlines()
        lines_b = fb.read_text().splitlines()
        interleaved = [line for pair in zip(lines_a, lines_b) for line in pair]
        mixed.write_text("\n".join(interleaved) + "\n")
        main(
            [
                "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--source", str(mixed),
            ]
        )
        assert capsys.readouterr().out == ""

    def test_action_lines_for_mapped_classes(self, workspace, tmp_path, capsys, vocab):
        wordmap = tmp_path / "wm.cfg"
        words = "\n".join(f"{i} = {w}" for i, w in enumerate(vocab.words()))
        wordmap.write_text(f"[words]\n{words}\n\n[actions]\n2 = NEXT_SLIDE\n")
        script = tmp_path / "script.txt"
        script.write_text("gesture pani 0.5\n")
        frames = tmp_path / "frames.txt"
        main(["simulate", "--script", str(script), "--out", str(frames), "--seed", "6"])
        main(
            [
                "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--wordmap", str(wordmap),
                "--source", str(frames),
            ]
        )
        out = capsys.readouterr().out.splitlines()
        assert out == ["pani", "ACTION,NEXT_SLIDE"]

    def test_confidence_floor_suppresses_output(self, workspace, tmp_path, capsys):
        script = tmp_path / "script.txt"
        script.write_text("gesture pani 0.5\n")
        frames = tmp_path / "frames.txt"
        main(["simulate", "--script", str(script), "--out", str(frames), "--seed", "6"])
        code = main(
            [
                "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--source", str(frames),
                "--min-confidence", "1.01",  # unsatisfiable for sigmoid outputs
            ]
        )
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_malformed_frames_skipped_with_note(self, workspace, tmp_path, capsys):
        frames = tmp_path / "frames.txt"
        frames.write_text("D,nope\nS,BOOT\n")
        code = main(
            ["infer", "--weights", str(workspace["run"] / "weights.glvw"), "--source", str(frames)]
        )
        assert code == 0
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "skipped" in captured.err


class TestAtomicity:
    def test_unwritable_path_fails_cleanly(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("file, not a directory")
        out = blocker / "data.csv"  # parent is a regular file
        code = main(["gen", "--out", str(out), "--subjects", "1", "--reps", "1"])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestSocketTransport:
    def test_simulate_connect_streams_to_infer_listen(self, workspace, tmp_path):
        import re
        import subprocess
        import sys

        script = tmp_path / "script.txt"
        script.write_text("gesture ghar 0.5\n")
        infer = subprocess.Popen(
            [
                sys.executable, "-m", "hallglove.cli", "infer",
                "--weights", str(workspace["run"] / "weights.glvw"),
                "--listen", "127.0.0.1:0",
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        banner = infer.stderr.readline()
        match = re.search(r"listening on ([\d.]+):(\d+)", banner)
        assert match, banner
        endpoint = f"{match.group(1)}:{match.group(2)}"
        sim = subprocess.run(
            [
                sys.executable, "-m", "hallglove.cli", "simulate",
                "--script", str(script), "--connect", endpoint, "--seed", "2",
            ],
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert sim.returncode == 0, sim.stderr
        out, _ = infer.communicate(timeout=60)
        assert infer.returncode == 0
        assert out.splitlines() == ["ghar"]
