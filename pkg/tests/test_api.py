import json

import pandas as pd
import pytest

from contraction_rnn.api.routes import create_parser
from contraction_rnn.services import experiment_service
from main import main


def test_parser_registers_subcommands():
    parser = create_parser()
    args = parser.parse_args(["train", "cfg.json", "--no-plots", "--output-dir", "out"])
    assert args.command == "train"
    assert args.no_plots and args.output_dir == "out"
    with pytest.raises(SystemExit):
        parser.parse_args([])


def test_train_converges_with_exit_zero(tmp_path, witness_csv_config, capsys):
    out = tmp_path / "out"
    code = main(["train", str(witness_csv_config), "--output-dir", str(out), "--no-plots"])
    assert code == 0
    assert "convergiu" in capsys.readouterr().out
    assert (out / "weights.json").exists()
    assert not (out / "fit.svg").exists()


def test_train_iteration_cap_exits_two(tmp_path, witness_csv_config):
    cfg = json.loads(witness_csv_config.read_text())
    cfg["model"]["max_outer_iters"] = 1
    path = witness_csv_config.parent / "one.json"
    path.write_text(json.dumps(cfg))
    assert main(["train", str(path), "--output-dir", str(tmp_path / "out"), "--no-plots"]) == 2


def test_invalid_config_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"model": {"delta": 0}, "data": {"generator": {}}}))
    assert main(["train", str(path), "--output-dir", str(tmp_path / "out")]) == 1
    assert "model.delta" in capsys.readouterr().err


def test_missing_csv_reports_path(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"data": {"csv_path": "absent.csv", "x_columns": ["x"], "y_column": "y"}}))
    assert main(["train", str(path), "--output-dir", str(tmp_path / "out")]) == 1
    assert "absent.csv" in capsys.readouterr().err


def test_predict_and_diagnose(tmp_path, witness_csv_config):
    out = tmp_path / "out"
    assert main(["train", str(witness_csv_config), "--output-dir", str(out), "--no-plots"]) == 0
    pred = tmp_path / "pred.csv"
    assert main(["predict", str(out / "weights.json"), str(witness_csv_config.parent / "witness.csv"), str(pred)]) == 0
    assert list(pd.read_csv(pred).columns) == ["x0", "x1", "y", "y_hat"]
    assert main(["diagnose", str(witness_csv_config), "--output-dir", str(tmp_path / "diag")]) == 0
    assert (tmp_path / "diag" / "diagnostics.json").exists()


def test_gen_poly(tmp_path):
    path = tmp_path / "poly.json"
    path.write_text(json.dumps({"data": {"generator": {"n_points": 4}}}))
    assert main(["gen-poly", str(path), "--output-dir", str(tmp_path / "out")]) == 0
    assert pd.read_csv(tmp_path / "out" / "data.csv").shape == (4, 3)


def test_unexpected_error_exits_one(tmp_path, monkeypatch, witness_csv_config, capsys):
    def boom(*args, **kwargs):
        raise RuntimeError("falha inesperada")

    monkeypatch.setattr(experiment_service, "run_experiment", boom)
    assert main(["train", str(witness_csv_config), "--output-dir", str(tmp_path / "out")]) == 1
    assert "falha inesperada" in capsys.readouterr().err
