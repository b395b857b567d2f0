"""Command-line behavior: exit codes, config merging, artifact layout."""

import json
import os

import pytest

from aigem.cli import main
from tests.test_pipeline import SCENARIO, write_ngsim_csv

BUNDLE_FILES = ("train.json", "val.json", "test.json", "scaler.json", "manifest.json")


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    """Scenario -> dataset -> trained checkpoint, shared across tests."""
    root = tmp_path_factory.mktemp("cli")
    scenario = root / "scenario.yaml"
    scenario.write_text(SCENARIO)
    data = root / "data"
    run = root / "run"
    assert (
        main(
            [
                "synth",
                "--scenario",
                str(scenario),
                "--out",
                str(data),
                "--k-h",
                "4",
                "--k-f",
                "5",
            ]
        )
        == 0
    )
    assert (
        main(
            [
                "train",
                "--data",
                str(data),
                "--out",
                str(run),
                "--epochs",
                "2",
                "--k-f",
                "5",
                "--hidden-dim",
                "8",
                "--batch-size",
                "4",
            ]
        )
        == 0
    )
    return {"root": root, "scenario": scenario, "data": data, "run": run}


def test_synth_writes_bundle_and_config(ws):
    for name in BUNDLE_FILES + ("synth_config.json",):
        assert os.path.exists(ws["data"] / name), name
    with open(ws["data"] / "synth_config.json") as fh:
        resolved = json.load(fh)
    assert resolved["command"] == "synth"
    assert resolved["k_h"] == 4 and resolved["k_f"] == 5


def test_train_writes_checkpoint_curves_scaler(ws):
    for name in ("checkpoint.pt", "curves.csv", "scaler.json", "train_config.json"):
        assert os.path.exists(ws["run"] / name), name
    with open(ws["run"] / "curves.csv") as fh:
        lines = fh.read().strip().splitlines()
    assert lines[0] == "epoch,train_rmse,val_rmse"
    assert len(lines) == 3  # header + 2 epochs


def test_eval_writes_reports(ws, tmp_path):
    out = tmp_path / "eval"
    code = main(
        [
            "eval",
            "--data",
            str(ws["data"]),
            "--checkpoint",
            str(ws["run"] / "checkpoint.pt"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    for name in ("report.json", "report.csv", "baseline_report.json", "eval_config.json"):
        assert os.path.exists(out / name), name
    with open(out / "report.json") as fh:
        report = json.load(fh)
    assert report["ade"] >= 0
    assert report["param_count"] > 0
    assert [s for s, _ in report["rmse_seconds"]] == [1]


def test_eval_no_baseline_flag(ws, tmp_path):
    out = tmp_path / "eval"
    code = main(
        [
            "eval",
            "--data",
            str(ws["data"]),
            "--checkpoint",
            str(ws["run"] / "checkpoint.pt"),
            "--out",
            str(out),
            "--no-baseline",
        ]
    )
    assert code == 0
    assert not os.path.exists(out / "baseline_report.json")


def test_predict_writes_trajectories(ws, tmp_path):
    out = tmp_path / "pred"
    code = main(
        [
            "predict",
            "--data",
            str(ws["data"]),
            "--checkpoint",
            str(ws["run"] / "checkpoint.pt"),
            "--out",
            str(out),
            "--split",
            "test",
            "--index",
            "0",
        ]
    )
    assert code == 0
    with open(out / "predictions.json") as fh:
        payload = json.load(fh)
    assert payload["split"] == "test"
    assert payload["k_f"] == 5
    for traj in payload["trajectories"].values():
        assert len(traj) == 5
        assert all(len(p) == 2 for p in traj)


def test_predict_index_out_of_range(ws, tmp_path):
    code = main(
        [
            "predict",
            "--data",
            str(ws["data"]),
            "--checkpoint",
            str(ws["run"] / "checkpoint.pt"),
            "--out",
            str(tmp_path / "pred"),
            "--index",
            "9999",
        ]
    )
    assert code == 1


def test_plot_renders_curves_and_report(ws, tmp_path):
    eval_out = tmp_path / "eval"
    assert (
        main(
            [
                "eval",
                "--data",
                str(ws["data"]),
                "--checkpoint",
                str(ws["run"] / "checkpoint.pt"),
                "--out",
                str(eval_out),
                "--no-baseline",
            ]
        )
        == 0
    )
    out = tmp_path / "figs"
    code = main(
        [
            "plot",
            "--curves",
            str(ws["run"] / "curves.csv"),
            "--report",
            str(eval_out / "report.json"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert os.path.exists(out / "curves.png")
    assert os.path.exists(out / "report_buckets.png")


def test_plot_without_inputs_is_usage_error(tmp_path):
    assert main(["plot", "--out", str(tmp_path / "figs")]) == 1


def test_missing_required_flag_exits_one(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "d")]) == 1


def test_unknown_flag_exits_one(ws, tmp_path):
    code = main(
        [
            "synth",
            "--scenario",
            str(ws["scenario"]),
            "--out",
            str(tmp_path / "d"),
            "--wat",
            "1",
        ]
    )
    assert code == 1


def test_missing_input_file_exits_one(tmp_path):
    code = main(
        [
            "synth",
            "--scenario",
            str(tmp_path / "nope.yaml"),
            "--out",
            str(tmp_path / "d"),
        ]
    )
    assert code == 1


def test_corrupt_csv_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text(
        "Vehicle_ID,Frame_ID,Local_X,Local_Y,v_Vel\n1,0,0.0,0.0,1.0\n1,1,oops,0.0,1.0\n"
    )
    code = main(["ingest", "--csv", str(path), "--out", str(tmp_path / "d")])
    assert code == 2
    assert "line 3" in capsys.readouterr().err


def test_divergent_training_exits_three(ws, tmp_path):
    code = main(
        [
            "train",
            "--data",
            str(ws["data"]),
            "--out",
            str(tmp_path / "run"),
            "--epochs",
            "5",
            "--k-f",
            "5",
            "--hidden-dim",
            "8",
            "--lr",
            "1e200",
        ]
    )
    assert code == 3


def test_overwrite_requires_force(ws, tmp_path, capsys):
    out = tmp_path / "data"
    args = [
        "synth",
        "--scenario",
        str(ws["scenario"]),
        "--out",
        str(out),
        "--k-h",
        "4",
        "--k-f",
        "5",
    ]
    assert main(args) == 0
    assert main(args) == 1
    assert "--force" in capsys.readouterr().err
    assert main(args + ["--force"]) == 0


def test_same_seed_reproduces_cache_bytes(ws, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert (
            main(
                [
                    "synth",
                    "--scenario",
                    str(ws["scenario"]),
                    "--out",
                    str(out),
                    "--k-h",
                    "4",
                    "--k-f",
                    "5",
                    "--seed",
                    "7",
                ]
            )
            == 0
        )
        outs.append(out)
    for name in BUNDLE_FILES:
        a = (outs[0] / name).read_bytes()
        b = (outs[1] / name).read_bytes()
        assert a == b, name


def test_config_file_merges_under_flags(ws, tmp_path):
    cfg = tmp_path / "train.yaml"
    cfg.write_text("epochs: 3\nhidden_dim: 8\nk_f: 5\nbatch_size: 4\n")
    out = tmp_path / "run"
    code = main(
        [
            "train",
            "--data",
            str(ws["data"]),
            "--out",
            str(out),
            "--config",
            str(cfg),
            "--epochs",
            "2",
        ]
    )
    assert code == 0
    with open(out / "train_config.json") as fh:
        resolved = json.load(fh)
    # explicit flag beats the file; file beats the built-in default
    assert resolved["epochs"] == 2
    assert resolved["hidden_dim"] == 8
    with open(out / "curves.csv") as fh:
        assert len(fh.read().strip().splitlines()) == 3  # header + 2 epochs


def test_config_file_unknown_key_exits_one(ws, tmp_path):
    cfg = tmp_path / "train.yaml"
    cfg.write_text("epochs: 2\nwarmup: 10\n")
    code = main(
        ["train", "--data", str(ws["data"]), "--out", str(tmp_path / "run"), "--config", str(cfg)]
    )
    assert code == 1


def test_bad_ego_id_exits_one(ws, tmp_path):
    code = main(
        [
            "synth",
            "--scenario",
            str(ws["scenario"]),
            "--out",
            str(tmp_path / "d"),
            "--ego-id",
            "one",
        ]
    )
    assert code == 1


def test_ingest_smoke(tmp_path):
    csv_path = tmp_path / "traj.csv"
    write_ngsim_csv(str(csv_path), n_frames=60)
    out = tmp_path / "data"
    code = main(
        [
            "ingest",
            "--csv",
            str(csv_path),
            "--out",
            str(out),
            "--k-h",
            "3",
            "--k-f",
            "2",
        ]
    )
    assert code == 0
    with open(out / "manifest.json") as fh:
        manifest = json.load(fh)
    assert manifest["kind"] == "ngsim-csv"
    assert manifest["n_windows"] > 0


def test_ablate_writes_tables(ws, tmp_path):
    out = tmp_path / "abl"
    code = main(
        [
            "ablate",
            "--data",
            str(ws["data"]),
            "--out",
            str(out),
            "--mode",
            "both",
            "--dmin-values",
            "0",
            "25",
            "--epochs",
            "1",
            "--k-f",
            "5",
            "--hidden-dim",
            "8",
        ]
    )
    assert code == 0
    for name in ("dmin_rmse.csv", "concat_rmse.csv", "ablate_notes.txt", "ablate_config.json"):
        assert os.path.exists(out / name), name
    fig_out = tmp_path / "figs"
    code = main(
        [
            "plot",
            "--ablation",
            str(out / "dmin_rmse.csv"),
            str(out / "concat_rmse.csv"),
            "--out",
            str(fig_out),
        ]
    )
    assert code == 0
    assert os.path.exists(fig_out / "dmin_rmse.png")
    assert os.path.exists(fig_out / "concat_rmse.png")
