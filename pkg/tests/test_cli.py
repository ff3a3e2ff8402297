import json
from importlib import resources

import jsonschema
import pytest

from chaoscope.cli import config_hash, main, parse_measure


def schema(kind):
    return json.loads(resources.files("chaoscope").joinpath("schemas", f"{kind}.json").read_text())


def run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main(["--out", str(out), *argv])
    return code, out


REPORTS = [
    (["dsl", "check", "--corpus", "a0-signal"], "dsl-check", 0),
    (["tile", "solve", "--size", "4"], "tile-solve", 0),
    (["tile", "cover", "--n", "1"], "tile-cover", 0),
    (["tile", "cover", "--n", "2", "--budget", "20"], "tile-cover", 3),
    (["tile", "torus", "--pmax", "3"], "tile-torus", 0),
    (["tile", "macro", "--n", "3", "--orientation", "NW"], "tile-macro", 0),
    (["ca", "run", "--f0", "15", "--f0", "6"], "ca-run", 0),
    (["tm", "run", "--builtin", "floor_log", "--b", "3", "--input", "30", "--unary"], "tm-run", 0),
    (["tm", "run", "--builtin", "floor_log", "--input", "300", "--unary", "--budget", "10"], "tm-run", 3),
    (["hier", "signal", "--l", "2", "--k", "7"], "hier-signal", 0),
    (["pressure", "sandwich", "--forbid", "11", "--n", "12", "--beta", "1"], "pressure-sandwich", 0),
    (["pressure", "sample", "--forbid", "11", "--side", "64", "--sweeps", "4", "--seeds", "2"], "pressure-sample", 0),
    (["pressure", "certify", "--forbid", "11", "--center", "1", "--radius", "1/1000", "--beta-lo", "10",
      "--beta-hi", "12"], "pressure-certify", 0),
    (["pressure", "certify", "--forbid", "11", "--center", "1", "--radius", "1/1000", "--beta-lo", "10",
      "--beta-hi", "12", "--budget", "0"], "pressure-certify", 3),
    (["measure", "dstar", "--mu", "++:1/2,--:1/2", "--nu", "+-:1"], "measure-dstar", 0),
    (["measure", "path", "--m", "4", "--horizon", "6"], "measure-path", 0),
    (["measure", "gamma", "--mu", "+:1/4,-:3/4"], "measure-gamma", 0),
    (["pipeline", "ground-states", "--kmax", "6"], "pipeline-ground-states", None),
]


@pytest.mark.parametrize("argv,kind,code", REPORTS, ids=[" ".join(r[0][:2]) + f"-{i}" for i, r in enumerate(REPORTS)])
def test_reports_validate(tmp_path, argv, kind, code):
    got, out = run(tmp_path, *argv)
    if code is not None:
        assert got == code
    doc = json.loads((out / f"{kind}.json").read_text())
    jsonschema.validate(doc, schema(kind))
    assert doc["config_hash"] == config_hash(doc["config"])
    assert (out / f"{kind}.timing.json").exists()


def test_outputs_are_byte_identical(tmp_path):
    argv = ["pressure", "sample", "--forbid", "11", "--side", "64", "--sweeps", "4", "--seeds", "3"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["--out", str(a), *argv]) == 0
    assert main(["--out", str(b), "--workers", "2", *argv]) == 0
    for name in ("pressure-sample.json", "pressure-sample.csv", "pressure-sample.gp"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_series_emits_csv_and_script(tmp_path):
    code, out = run(tmp_path, "pressure", "sandwich", "--forbid", "11", "--n", "8", "--series", "0:2:1/2")
    assert code == 0
    lines = (out / "pressure-series.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "beta,lower,upper,oracle"
    assert len(lines) == 2 + 5
    assert "plot 'pressure-series.csv'" in (out / "pressure-series.gp").read_text()


def test_hier_table_matches_library(tmp_path):
    from chaoscope.hierarchy import scale_table
    code, out = run(tmp_path, "hier", "table", "--kmax", "5")
    assert code == 0
    rows = (out / "hier-table.csv").read_text().splitlines()[2:]
    assert [int(r.split(",")[0]) for r in rows] == [r.k for r in scale_table(5)]
    assert rows[3].split(",")[3] == str(scale_table(5)[3].l_nk)


def test_dsl_check_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.tiledsl"
    bad.write_text("tiledsl 1\nTILES\n  tile a n=x e=y s=x\n")
    assert main(["dsl", "check", str(bad)]) == 1
    assert f"{bad}:3:" in capsys.readouterr().err


def test_dsl_fmt_writes_canonical(tmp_path):
    f = tmp_path / "t.tiledsl"
    f.write_text("tiledsl 1\nTILES\n   tile a  n=x e=y s=x w=y\n")
    assert main(["dsl", "fmt", str(f), "--write"]) == 0
    assert "  tile a n=x e=y s=x w=y\n" in f.read_text()


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["tile", "cover", "--n", "5"],
    ["tile", "torus", "--pmax", "9"],
    ["hier", "table", "--kmax", "-1"],
    ["measure", "dstar", "--mu", "++:x", "--nu", "+:1"],
    ["pressure", "sandwich", "--n", "4"],
    ["pipeline", "ground-states", "--kmax", "1"],
    ["tm", "run", "--builtin", "power_check", "--b", "5"],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_workers_env(monkeypatch, tmp_path):
    monkeypatch.setenv("CHAOSCOPE_WORKERS", "x")
    assert main(["pressure", "sample", "--forbid", "11", "--side", "16", "--sweeps", "1"]) == 2


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "pipeline" in capsys.readouterr().out


def test_measure_text_format():
    mu = parse_measure("++:1/2, --:1/4, -+:1/4")
    assert mu.k == 2 and mu.length == 2


def test_tm_table_round_trips(tmp_path, capsys):
    assert main(["tm", "table", "--builtin", "nearest_power", "--b", "3"]) == 0
    text = capsys.readouterr().out
    f = tmp_path / "m.tmspec"
    f.write_text(text)
    assert main(["tm", "run", "--spec", str(f), "--input", "10", "--unary"]) == 0
