import numpy as np
import pytest

from tiletopo.cli import main
from tiletopo.config import load_config
from tiletopo.errors import ConfigError
from tiletopo.io import read_pgm
from tiletopo.tile import cloud_from_csv


def test_classify_line(capsys):
    assert main(["classify", "-p", "3,3,3", "-s", "2,9/5"]) == 0
    assert capsys.readouterr().out.strip() == "criterion=0.333333 classification=tame_ball"


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_budget_exceeded_exit_code(capsys):
    assert main(["approximate", "-p", "3,3", "-s", "2", "--set", "approximate.level=20"]) == 2
    assert "budget" in capsys.readouterr().err


def test_bad_config_reports_line(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[pair]\np = 3,3\ns = 2/0\n")
    assert main(["classify", "--config", str(cfg)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_config_parsing():
    cfg = load_config("[pair]\np = 3, 3, 3\ns = 2, 9/5\n[iterate]\nu = 1/3, 0; 0, -1/4\n", ["run.seed=5"])
    assert cfg["pair"]["p"] == (3, 3, 3)
    assert str(cfg["pair"]["s"][1]) == "9/5"
    assert cfg["run"]["seed"] == 5
    assert len(cfg["iterate"]["u"]) == 2
    with pytest.raises(ConfigError):
        load_config("[nope]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config("[verify]\nchecks = injectivity, magic\n")


def test_verify_degenerate_passes(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[pair]\np = 2,2\ns = 0\n[verify]\npairs = 2000\nsamples = 200\n"
                   "height_depth = 3\ndepth = 2\nlevel = 8\ngrid = 30\n")
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    kv = (tmp_path / "o" / "report.kv").read_text()
    assert kv.count("passed=true") == 3
    assert "# config pair.p=2,2" in kv


def test_verify_failure_exit_code(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[pair]\np = 3,3\ns = 1\n[verify]\nchecks = convergence\ndepth = 0\nlevel = 4\n"
                   "grid = 10\ntolerance = 1/1000\n")
    assert main(["verify", "--config", str(cfg)]) == 1


def test_same_config_and_seed_give_identical_bytes(tmp_path):
    args = ["approximate", "-p", "3,-2", "-s", "3/2", "--set", "approximate.level=3", "--seed", "4"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "cloud_n3.csv").read_bytes()
    assert a == (tmp_path / "b" / "cloud_n3.csv").read_bytes()
    assert b"# config run.seed=4" in a


def test_export_round_trip_and_pgm(tmp_path):
    main(["approximate", "-p", "3,3", "-s", "2", "--set", "approximate.level=4", "--out", str(tmp_path)])
    src = tmp_path / "cloud_n4.csv"
    main(["export", str(src), "--out", str(tmp_path / "csv")])
    text = src.read_text()
    again = (tmp_path / "csv" / "cloud_n4.csv").read_text()
    strip = lambda t: [ln for ln in t.splitlines() if not ln.startswith("#")]
    assert strip(again) == strip(text)
    assert again.splitlines()[0] == "# tiletopo cloud d=2 n=4"
    main(["export", str(src), "--format", "pgm", "--out", str(tmp_path / "pgm"),
          "--set", "raster.width=64"])
    img = read_pgm((tmp_path / "pgm" / "cloud_n4.pgm").read_bytes())
    assert img.shape[1] == 64 and img.max() == 255


def test_iterate_writes_obj_per_depth(tmp_path):
    assert main(["iterate", "-p", "3,3,3", "-s", "2,9/5", "--set", "iterate.depth=2",
                 "--set", "iterate.grid=5", "--out", str(tmp_path)]) == 0
    for k in range(3):
        lines = (tmp_path / f"mesh_depth{k}.obj").read_text().splitlines()
        body = [ln for ln in lines if not ln.startswith("#")]
        assert sum(ln.startswith("v ") for ln in body) == 6 * 25
        assert sum(ln.startswith("f ") for ln in body) == 6 * 2 * 16
        assert all(ln[0] in "vf" for ln in body)


def test_iterate_csv_points(tmp_path):
    main(["iterate", "-p", "2,2", "-s", "1", "--set", "iterate.depth=1", "--format", "csv",
          "--out", str(tmp_path)])
    pts, meta = cloud_from_csv((tmp_path / "points_depth1.csv").read_text())
    assert meta["d"] == 2 and np.isfinite(pts).all()
