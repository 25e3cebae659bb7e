import pytest

from plotkit import sample_path
from plotkit.cli import main

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_trajectories_subcommand(tmp_path, capsys):
    out = tmp_path / "traj.png"
    rc = main(["trajectories", str(sample_path("sample_trace.csv")),
               "--out", str(out), "--goal", "440,440"])
    assert rc == 0
    assert out.read_bytes()[:8] == PNG_MAGIC
    assert str(out) in capsys.readouterr().out


def test_convergence_subcommand_with_window(tmp_path):
    out = tmp_path / "conv.png"
    rc = main(["convergence", str(sample_path("sample_training_log.csv")),
               "--out", str(out), "--window", "15"])
    assert rc == 0
    assert out.read_bytes()[:8] == PNG_MAGIC


def test_comparison_subcommand_svg(tmp_path):
    out = tmp_path / "comp.svg"
    rc = main(["comparison", str(sample_path("sample_compare.tsv")),
               "--out", str(out), "--format", "svg"])
    assert rc == 0
    head = out.read_bytes()[:500]
    assert b"<svg" in head or head.startswith(b"<?xml")


def test_missing_input_reports_error(tmp_path, capsys):
    rc = main(["trajectories", str(tmp_path / "nope.csv"),
               "--out", str(tmp_path / "x.png")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_wrong_layout_reports_error(tmp_path, capsys):
    rc = main(["convergence", str(sample_path("sample_trace.csv")),
               "--out", str(tmp_path / "x.png")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "error:" in err and "layout" in err


def test_no_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_bad_format_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["comparison", str(sample_path("sample_compare.tsv")),
              "--out", str(tmp_path / "x.png"), "--format", "pdf"])
    assert exc.value.code == 2


def test_bad_goal_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["trajectories", str(sample_path("sample_trace.csv")),
              "--out", str(tmp_path / "x.png"), "--goal", "oops"])
    assert exc.value.code == 2
