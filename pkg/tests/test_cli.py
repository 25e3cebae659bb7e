import json

import numpy as np
import pytest

from saginmm.cli import main
from saginmm.config import load_config
from saginmm.metrics import read_trace

from conftest import tiny_config


@pytest.fixture()
def cfg_path(tmp_path):
    cfg = tiny_config(episodes=2, steps=8)
    path = tmp_path / "config.json"
    cfg.save(path)
    return path


def run_cli(*argv):
    return main(list(argv))


# -- argument handling -------------------------------------------------------

def test_no_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        run_cli()
    assert exc.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        run_cli("frobnicate")
    assert exc.value.code == 2


def test_unknown_flag_exits_2(cfg_path):
    with pytest.raises(SystemExit) as exc:
        run_cli("train", "--config", str(cfg_path), "--turbo")
    assert exc.value.code == 2


def test_train_requires_config_or_resume(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli("train", "--out", str(tmp_path))
    assert exc.value.code == 2


def test_missing_config_file_is_reported(tmp_path, capsys):
    rc = run_cli("train", "--config", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path))
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_eval_missing_checkpoint_is_reported(tmp_path, capsys):
    rc = run_cli("eval", "--checkpoint", str(tmp_path / "none.bin"),
                 "--out", str(tmp_path))
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_bad_policy_name_is_reported(cfg_path, tmp_path, capsys):
    rc = run_cli("train", "--config", str(cfg_path), "--policy", "warp",
                 "--out", str(tmp_path), "--episodes", "1")
    assert rc == 1
    assert "unknown policy" in capsys.readouterr().err


# -- end-to-end pipeline -----------------------------------------------------

def test_calibrate_writes_bounds(cfg_path, tmp_path, capsys):
    out = tmp_path / "o"
    rc = run_cli("calibrate", "--config", str(cfg_path), "--out", str(out),
                 "--calibration-episodes", "2")
    assert rc == 0
    written = load_config(out / "config.json")
    assert 0 < written.env.r_min_bps < written.env.r_max_bps
    assert "rate bounds" in capsys.readouterr().out


def test_train_eval_export_pipeline(cfg_path, tmp_path, capsys):
    out = tmp_path / "o"
    assert run_cli("train", "--config", str(cfg_path), "--out", str(out),
                   "--policy", "hdrl", "--trace") == 0
    assert (out / "checkpoint.bin").exists()
    log = (out / "training_log.csv").read_text().splitlines()
    assert len(log) == 3  # header + 2 episodes
    assert log[0].startswith("episode,")
    assert (out / "train_trace.csv").exists()

    assert run_cli("eval", "--checkpoint", str(out / "checkpoint.bin"),
                   "--out", str(out), "--episodes", "2", "--trace") == 0
    captured = capsys.readouterr().out
    line = [l for l in captured.splitlines() if l.startswith("{")][-1]
    rec = json.loads(line)
    assert rec["policy"] == "hdrl"
    assert rec["n_episodes"] == 2
    summary_lines = (out / "summary.jsonl").read_text().splitlines()
    assert json.loads(summary_lines[-1]) == rec
    trace = read_trace(out / "eval_trace.csv")
    assert set(np.unique(trace["episode"])) == {0, 1}

    trace_out = tmp_path / "exported.csv"
    assert run_cli("export-trace", "--checkpoint", str(out / "checkpoint.bin"),
                   "--episodes", "1", "--trace-out", str(trace_out)) == 0
    exported = read_trace(trace_out)
    assert len(exported["episode"]) == 8  # one episode of the step budget


def test_eval_is_deterministic_across_calls(cfg_path, tmp_path, capsys):
    out = tmp_path / "o"
    run_cli("train", "--config", str(cfg_path), "--out", str(out),
            "--episodes", "1")
    capsys.readouterr()
    run_cli("eval", "--checkpoint", str(out / "checkpoint.bin"),
            "--out", str(out), "--episodes", "2", "--seed", "5")
    first = capsys.readouterr().out
    run_cli("eval", "--checkpoint", str(out / "checkpoint.bin"),
            "--out", str(out), "--episodes", "2", "--seed", "5")
    second = capsys.readouterr().out
    assert first == second


def test_resume_continues_to_configured_total(cfg_path, tmp_path):
    out = tmp_path / "o"
    run_cli("train", "--config", str(cfg_path), "--out", str(out),
            "--episodes", "1")
    ckpt = out / "checkpoint.bin"
    run_cli("train", "--resume", str(ckpt), "--out", str(out))
    log = (out / "training_log.csv").read_text().splitlines()
    # 1 episode, then the resumed run tops up to the configured 2
    assert len(log) == 3
    episodes = [int(row.split(",")[0]) for row in log[1:]]
    assert episodes == [0, 1]


def test_out_dir_from_environment(cfg_path, tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("SAGINMM_OUT", str(target))
    monkeypatch.chdir(tmp_path)
    assert run_cli("calibrate", "--config", str(cfg_path),
                   "--calibration-episodes", "1") == 0
    assert (target / "config.json").exists()


def test_compare_prints_metric_rows(cfg_path, tmp_path, capsys):
    out = tmp_path / "o"
    rc = run_cli("compare", "--config", str(cfg_path), "--out", str(out),
                 "--policies", "sl,greedy_sinr", "--episodes", "2")
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "policy\tmetric\tvalue"
    body = [l.split("\t") for l in lines[1:]]
    assert {b[0] for b in body} == {"sl", "greedy_sinr"}
    assert len(body) == 2 * 4
    for _, _, value in body:
        float(value)  # parseable numbers
    summary_lines = (out / "summary.jsonl").read_text().splitlines()
    assert len(summary_lines) == 2


def test_compare_rejects_empty_policy_list(cfg_path, tmp_path, capsys):
    rc = run_cli("compare", "--config", str(cfg_path),
                 "--out", str(tmp_path / "o"), "--policies", " , ")
    assert rc == 1
    assert "no policies" in capsys.readouterr().err
