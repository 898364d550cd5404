import json

import numpy as np
import pytest

from natcmd import SyntheticSpec, synthetic_prototypes
from natcmd.cli import run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def small_data(tmp_path, capsys):
    path = str(tmp_path / "small.csv")
    code, out, _ = run(
        capsys, "gen-data", "--labels", "up,down,stop", "--per-label", "30",
        "--sigma", "0.01", "--seed", "3", "-o", path,
    )
    assert code == 0
    assert json.loads(out)["frames"] == 90
    return path


class TestGenData:
    def test_default15_counts(self, tmp_path, capsys):
        path = str(tmp_path / "d.csv")
        code, out, err = run(
            capsys, "gen-data", "--per-label", "2", "--seed", "7", "-o", path
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["frames"] == 30
        assert len(doc["labels"]) == 15

    def test_jsonl_output(self, tmp_path, capsys):
        path = str(tmp_path / "d.jsonl")
        code, out, _ = run(
            capsys, "gen-data", "--labels", "a,b", "--per-label", "2", "-o", path
        )
        assert code == 0
        with open(path) as fh:
            first = json.loads(fh.readline())
        assert set(first) == {"label", "coords"}


class TestTrainEvaluate:
    def test_train_then_evaluate_flow(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        code, out, _ = run(
            capsys, "train", "--kind", "svm", "--data", small_data,
            "--split", "0.8", "--seed", "3", "-o", model_path,
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["kind"] == "svm"
        assert summary["frames_trained"] == 72
        assert summary["training_time_ms"] > 0

        code, out, _ = run(
            capsys, "evaluate", "--model", model_path, "--data", small_data,
            "--split", "0.8", "--seed", "3",
        )
        assert code == 0
        report = json.loads(out)
        assert report["accuracy"] >= 0.99
        assert len(report["confusion"]) == 3

    def test_evaluate_table_goes_to_stderr(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        run(capsys, "train", "--kind", "svm", "--data", small_data, "-o", model_path)
        code, out, err = run(
            capsys, "evaluate", "--model", model_path, "--data", small_data, "--table"
        )
        assert code == 0
        json.loads(out)  # stdout stays pure JSON
        assert "confusion matrix" in err

    def test_mlp_training(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        code, out, _ = run(
            capsys, "train", "--kind", "mlp", "--data", small_data,
            "--lr", "0.1", "--epochs", "40", "-o", model_path,
        )
        assert code == 0
        assert json.loads(out)["kind"] == "mlp"

    def test_missing_data_file_exits_2(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "train", "--kind", "svm", "--data", str(tmp_path / "no.csv"),
            "-o", str(tmp_path / "m.json"),
        )
        assert code == 2
        assert "error" in err


class TestPredict:
    def test_predict_frame(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        run(capsys, "train", "--kind", "svm", "--data", small_data, "-o", model_path)
        spec = SyntheticSpec(label_set=("down", "stop", "up"), frames_per_label=1,
                             noise_sigma=0.01, seed=3)
        proto = synthetic_prototypes(spec)["up"]
        frame_path = str(tmp_path / "frame.txt")
        with open(frame_path, "w") as fh:
            fh.write(",".join(str(v) for v in proto) + "\n")
        code, out, _ = run(capsys, "predict", "--model", model_path, "--frame", frame_path)
        assert code == 0
        doc = json.loads(out)
        assert doc["label"] == "up"
        assert set(doc["scores"]) == {"up", "down", "stop"}

    def test_62_values_exits_2(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        run(capsys, "train", "--kind", "svm", "--data", small_data, "-o", model_path)
        frame_path = str(tmp_path / "bad.txt")
        with open(frame_path, "w") as fh:
            fh.write(",".join(["0.5"] * 62) + "\n")
        code, _, err = run(capsys, "predict", "--model", model_path, "--frame", frame_path)
        assert code == 2
        assert "63" in err


@pytest.fixture()
def embeddings_file(tmp_path):
    from natcmd.voice import DEFAULT_COMMAND_PHRASES

    words = sorted({t for p in DEFAULT_COMMAND_PHRASES for t in p.split()})
    rng = np.random.default_rng(5)
    path = str(tmp_path / "emb.txt")
    with open(path, "w") as fh:
        for w in words:
            vec = rng.normal(0, 1, 8)
            fh.write(w + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")
    return path


class TestMatch:
    def test_exact_match(self, embeddings_file, capsys):
        code, out, _ = run(
            capsys, "match", "--commands", "default19",
            "--embeddings", embeddings_file, "--text", "move forward",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["matched"]["action"] == "move_forward"
        assert len(doc["candidates"]) == 19

    def test_no_match_is_null(self, embeddings_file, capsys):
        code, out, _ = run(
            capsys, "match", "--commands", "default19",
            "--embeddings", embeddings_file, "--text", "xyzzy plugh",
        )
        assert code == 0
        assert json.loads(out)["matched"] is None

    def test_custom_command_file(self, embeddings_file, tmp_path, capsys):
        cmds = str(tmp_path / "cmds.tsv")
        with open(cmds, "w") as fh:
            fh.write("go_up\tlook up\n")
        code, out, _ = run(
            capsys, "match", "--commands", cmds,
            "--embeddings", embeddings_file, "--text", "look up",
        )
        assert code == 0
        assert json.loads(out)["matched"]["action"] == "go_up"


class TestRun:
    def make_frame_file(self, tmp_path):
        spec = SyntheticSpec(label_set=("down", "stop", "up"), frames_per_label=1,
                             noise_sigma=0.01, seed=3)
        protos = synthetic_prototypes(spec)
        path = str(tmp_path / "frames.txt")
        with open(path, "w") as fh:
            for label in ("up",) * 6 + ("stop",) * 6:
                fh.write(",".join(str(v) for v in protos[label]) + "\n")
        return path

    def test_gesture_replay(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        run(capsys, "train", "--kind", "svm", "--data", small_data, "-o", model_path)
        frames = self.make_frame_file(tmp_path)
        code, out, err = run(
            capsys, "run", "--model", model_path, "--frames", frames, "--k", "5"
        )
        assert code == 0
        lines = [l for l in out.splitlines() if l]
        assert len(lines) == 2
        actions = [json.loads(l)["action"] for l in lines]
        assert actions == ["up", "stop"]
        summary = json.loads(err)
        assert summary["gesture"]["events_emitted"] == 2
        assert summary["gesture"]["frames_processed"] == 12

    def test_replay_is_byte_identical(self, small_data, tmp_path, capsys):
        model_path = str(tmp_path / "m.json")
        run(capsys, "train", "--kind", "svm", "--data", small_data, "-o", model_path)
        frames = self.make_frame_file(tmp_path)
        outputs = []
        for _ in range(2):
            code, out, _ = run(
                capsys, "run", "--model", model_path, "--frames", frames, "--k", "3"
            )
            assert code == 0
            outputs.append(out)
        assert outputs[0] == outputs[1]

    def test_voice_replay(self, embeddings_file, tmp_path, capsys):
        transcripts = str(tmp_path / "polls.txt")
        with open(transcripts, "w") as fh:
            fh.write("move forward\n\nzzz qqq\nshow schedule\n")
        code, out, err = run(
            capsys, "run", "--transcripts", transcripts,
            "--commands", "default19", "--embeddings", embeddings_file,
        )
        assert code == 0
        lines = [l for l in out.splitlines() if l]
        actions = [json.loads(l)["action"] for l in lines]
        assert actions == ["move_forward", "show_schedule"]
        times = [json.loads(l)["ts_ms"] for l in lines]
        assert times == [3000, 12000]
        assert json.loads(err)["voice"]["polls_processed"] == 4

    def test_run_without_sources_is_usage_error(self, capsys):
        code, _, err = run(capsys, "run")
        assert code == 1


class TestUsage:
    def test_unknown_subcommand_exits_1(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 1
        assert err

    def test_unknown_flag_exits_1(self, capsys):
        code, _, _ = run(capsys, "gen-data", "--nonsense", "-o", "x.csv")
        assert code == 1

    def test_help_exits_0(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0

    def test_env_seed_override(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("NATCMD_SEED", "99")
        path_a = str(tmp_path / "a.csv")
        run(capsys, "gen-data", "--labels", "a,b", "--per-label", "2", "-o", path_a)
        monkeypatch.delenv("NATCMD_SEED")
        path_b = str(tmp_path / "b.csv")
        run(capsys, "gen-data", "--labels", "a,b", "--per-label", "2",
            "--seed", "99", "-o", path_b)
        assert open(path_a).read() == open(path_b).read()

    def test_bad_env_value_exits_1(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("NATCMD_SEED", "not-a-number")
        code, _, _ = run(capsys, "gen-data", "--labels", "a,b", "-o",
                         str(tmp_path / "x.csv"))
        assert code == 1
