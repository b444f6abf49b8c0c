"""CLI exit codes and argument handling."""

import pytest

from figures.cli import main

from test_render import write_beampattern, write_scene


def test_render_via_cli(tmp_path):
    csv = write_scene(tmp_path / "scene.csv")
    out = tmp_path / "scene.png"
    assert main(["scene", "--in", str(csv), "--out", str(out)]) == 0
    assert out.exists()


def test_beampattern_db_flag(tmp_path):
    csv = write_beampattern(tmp_path / "beam.csv")
    out = tmp_path / "beam.png"
    assert main(["beampattern", "--in", str(csv), "--out", str(out), "--db"]) == 0
    assert out.exists()


def test_missing_input_exit_2(tmp_path, capsys):
    code = main(["scene", "--in", str(tmp_path / "nope.csv")])
    assert code == 2
    assert "does not exist" in capsys.readouterr().err


def test_bad_schema_exit_2(tmp_path, capsys):
    csv = tmp_path / "bad.csv"
    csv.write_text("a,b\n1,2\n")
    code = main(["pd-pulse", "--in", str(csv)])
    assert code == 2
    assert "pulse" in capsys.readouterr().err


def test_unknown_kind_usage_error(tmp_path):
    csv = write_scene(tmp_path / "scene.csv")
    with pytest.raises(SystemExit) as exc:
        main(["sparkline", "--in", str(csv)])
    assert exc.value.code == 2
