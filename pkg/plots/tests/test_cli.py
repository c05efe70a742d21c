from virtdyn_plots import EXPECTED_COLUMNS
from virtdyn_plots.cli import main as cli_main


def test_cli_renders_all_kinds(artifacts, tmp_path, capsys):
    for kind in ("decoupling", "conditioning", "singular-pass", "global-singular", "timing"):
        code = cli_main([kind, "--in", str(artifacts / kind), "--out", str(tmp_path)])
        assert code == 0
        printed = capsys.readouterr().out.strip()
        assert printed.endswith(f"{kind.replace('-', '_')}.png")
        assert (tmp_path / f"{kind.replace('-', '_')}.png").exists()


def test_cli_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "timing_FD.csv"
    bad.write_text("wrong,columns\n1,2\n")
    code = cli_main(["timing", "--in", str(tmp_path), "--out", str(tmp_path / "out")])
    assert code == 2
    err = capsys.readouterr().err
    assert "column mismatch" in err
    assert "expected" in err and "min_ns" in err  # diagnostic names the columns


def test_cli_missing_inputs_exit_code(tmp_path, capsys):
    code = cli_main(["conditioning", "--in", str(tmp_path), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "no input CSV" in capsys.readouterr().err


def test_cli_empty_body_exit_code(tmp_path, capsys):
    empty = tmp_path / "conditioning_DLS.csv"
    empty.write_text(",".join(EXPECTED_COLUMNS["conditioning"]) + "\n")
    code = cli_main(["conditioning", "--in", str(tmp_path), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "no data rows" in capsys.readouterr().err
