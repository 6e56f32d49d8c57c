import subprocess
import sys

import pytest

from conftest import FIELDS
from trace_census.cli import RunConfig, main

K257 = str(FIELDS / "k257.txt")
K49 = str(FIELDS / "k49.txt")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_info(capsys):
    code, out, _ = run(capsys, "info", "--field", K257)
    assert code == 0
    assert "D = 257, κ = 1" in out
    assert "(Tr = 0;" in out and "(Tr = 1;" in out


def test_info_errors(capsys, tmp_path):
    bad = tmp_path / "red.txt"
    bad.write_text("poly = 1, 0, -1, 0\n")
    code, _, err = run(capsys, "info", "--field", str(bad))
    assert code != 0 and "reducible" in err and "[field]" in err
    code, _, err = run(capsys, "info", "--field", str(tmp_path / "missing.txt"))
    assert code != 0 and "file not found" in err


def test_units_and_good_pairs(capsys):
    code, out, _ = run(capsys, "units", "--field", K257)
    assert code == 0 and "R = 1.9745938707" in out
    code, out, _ = run(capsys, "good-pairs", "--field", K257, "--radius", "3")
    assert code == 0 and "good nontrivial characters: 011" in out
    code, out, _ = run(capsys, "good-pairs", "--field", K49)
    assert "good nontrivial characters: none" in out


def test_count(capsys):
    code, out, _ = run(capsys, "count", "--trace", "15", "--field", K257)
    assert code == 0 and out.strip() == "N_15 = 6"
    code, out, _ = run(capsys, "count", "--trace", "15", "--naive", "--field", K257)
    assert out.strip() == "N_15 = 6"


def test_series_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "series", "--xmax", "500", "--out", str(a), "--field", K257)[0] == 0
    assert run(capsys, "series", "--xmax", "500", "--out", str(b), "--field", K257, "--threads", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "a,N_a,r_a,E_a"


def test_lvalue(capsys):
    code, out, _ = run(capsys, "lvalue", "--char", "011", "--cutoff", "2000", "--field", K257)
    assert code == 0
    assert out.startswith("L(1,v) = 0.5444034309") and "(B=2000)" in out
    code, _, err = run(capsys, "lvalue", "--char", "000", "--cutoff", "2000", "--field", K257)
    assert code == 1 and "[lvalue]" in err and "pole" in err


def test_coeff(capsys):
    code, out, _ = run(capsys, "coeff", "--k", "3", "--cutoff", "2000", "--field", K257)
    assert code == 0 and "C (k=3) = 0.04198374" in out
    code, out, _ = run(capsys, "coeff", "--field", K49, "--cutoff", "2000")
    assert "C (k=3) = 0 " in out


def test_fit_and_report(capsys, tmp_path):
    s = tmp_path / "s.csv"
    run(capsys, "series", "--xmax", "5000", "--out", str(s), "--field", K257)
    code, out, _ = run(capsys, "fit", "--degree", "1", "--xmin", "100", "--xmax", "5000", "--series", str(s), "--field", K257)
    assert code == 0 and "log^4 X:" in out and "log^3 X:" in out
    rep = tmp_path / "r.csv"
    code, out, _ = run(capsys, "report", "--grid", "log20", "--xmax", "5000", "--series", str(s),
                       "--cutoff", "2000", "--out", str(rep), "--field", K257)
    assert code == 0
    lines = rep.read_text().splitlines()
    assert lines[0] == "X,S(X),S/log^4X,predicted_leading"
    code, _, err = run(capsys, "fit", "--xmax", "9000", "--series", str(s), "--field", K257)
    assert code == 1 and "[series]" in err


def test_pipeline_k49(capsys, tmp_path):
    code, out, _ = run(capsys, "pipeline", "--field", K49, "--xmax", "1000", "--outdir", str(tmp_path / "o"))
    assert code == 0
    assert "good nontrivial characters: none; predicted leading coefficient 0" in out
    assert (tmp_path / "o" / "summary.txt").read_text() == out


def test_pipeline_config_and_determinism(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"field = {K257}\nxmax = 10000\nk = 3\ncutoff = 2000\noutdir = out1\n")
    code, out, _ = run(capsys, "pipeline", "--config", str(cfg))
    assert code == 0 and "leading coefficient comparison" in out
    cfg2 = tmp_path / "run2.cfg"
    cfg2.write_text(cfg.read_text().replace("out1", "out2"))
    assert run(capsys, "pipeline", "--config", str(cfg2))[0] == 0
    for name in ("series.csv", "report.csv", "summary.txt"):
        assert (tmp_path / "out1" / name).read_bytes() == (tmp_path / "out2" / name).read_bytes()


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("field = x.txt\nspeed = 11\n")
    with pytest.raises(ValueError, match="unknown key"):
        RunConfig.from_file(cfg)
    code, _, err = run(capsys, "pipeline", "--config", str(cfg))
    assert code == 1 and "[config]" in err


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--field", K49, "--amax", "60", "--norm-max", "100", "--probes", "500")
    assert code == 0
    assert out.count("ok") == 2 and "0 on an embedding hyperplane" in out


def test_console_entry():
    r = subprocess.run([sys.executable, "-m", "trace_census", "info", "--field", K49],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "D = 49, κ = 1" in r.stdout
    r = subprocess.run([sys.executable, "-m", "trace_census", "bogus"], capture_output=True, text=True)
    assert r.returncode != 0
