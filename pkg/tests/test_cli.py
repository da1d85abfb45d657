import csv
import io
import json

import pytest

from bhdirac.cli import COLUMNS, alpha_grid, main, read_config


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_saddle_row(capsys):
    code, out, _ = run(capsys, "saddle", "--alpha", "0.1", "--k", "-1")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[: len(COLUMNS)] == COLUMNS
    (r,) = rows(out)
    assert float(r["a"]) == pytest.approx(8.9186905e-2, rel=1e-4)
    assert float(r["b"]) == pytest.approx(7.8238289e-2, rel=1e-4)
    assert r["hessian_signature"] == "-+" and r["status"] == "ok"
    # 9 significant digits
    assert r["re_E"] == "0.997008898"


def test_zero_coupling_exits_nonzero(capsys):
    code, out, err = run(capsys, "saddle", "--alpha", "0", "--k", "-1")
    assert code != 0 and out == ""
    assert "no bound state at zero coupling" in err


def test_bad_seed_exits_nonzero(capsys):
    code, _, err = run(capsys, "shoot", "--alpha", "0.1", "--k", "-1", "--seed-re", "1.3")
    assert code != 0 and "|E| >= 1" in err


def test_shoot_coulomb(capsys):
    code, out, _ = run(capsys, "shoot", "--interaction", "coulomb", "--alpha", "0.1")
    (r,) = rows(out)
    assert code == 0
    assert float(r["re_E"]) == pytest.approx(0.99498743710662, abs=1e-8)


def test_ground_phi1(capsys):
    code, out, _ = run(capsys, "ground", "--family", "Phi1", "--n", "15")
    (r,) = rows(out)
    assert code == 0
    assert float(r["re_E"]) == pytest.approx(0.9947208, abs=2e-7)
    assert float(r["im_E"]) == pytest.approx(-2.0498160e-5, abs=5e-8)


def test_json_mirrors_csv(capsys):
    _, out_csv, _ = run(capsys, "saddle", "--alpha", "0.2", "--k", "1")
    _, out_json, _ = run(capsys, "saddle", "--alpha", "0.2", "--k", "1", "--format", "json")
    (rc,) = rows(out_csv)
    (rj,) = json.loads(out_json)
    assert list(rj) == list(rc)
    for key in ("a", "b", "re_E"):
        assert float(rc[key]) == rj[key]


def test_output_is_deterministic(capsys, tmp_path):
    args = ["converge", "--family", "Phi1", "--n-min", "3", "--n-max", "5", "--levels", "2"]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_parallel_workers_give_identical_rows(capsys, monkeypatch):
    args = ("sweep", "--alpha-min", "0.05", "--alpha-max", "0.15", "--step", "0.05",
            "--family", "Phi1", "--n", "6")
    _, serial, _ = run(capsys, *args)
    monkeypatch.setenv("BHDIRAC_WORKERS", "2")
    _, parallel, _ = run(capsys, *args)
    assert serial == parallel


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ground-state run\nalpha = 0.05\nk = -1\nfamily = Phi1\nn = 4\n")
    _, out, _ = run(capsys, "ground", "--config", str(cfg))
    assert rows(out)[0]["alpha"] == "0.05"
    _, out, _ = run(capsys, "ground", "--config", str(cfg), "--alpha", "0.1")
    r = rows(out)[0]
    assert r["alpha"] == "0.1" and r["n"] == "4"


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(Exception, match="unknown key"):
        read_config(cfg)


def test_sweep_with_shooting_columns(capsys):
    code, out, _ = run(capsys, "sweep", "--alpha-min", "0.05", "--alpha-max", "0.1", "--step",
                       "0.05", "--family", "Phi2", "--n", "10", "--with-shooting")
    table = rows(out)
    assert code == 0
    assert [r["branch"] for r in table] == ["positive", "shooting"] * 2
    alphas = [float(r["alpha"]) for r in table if r["branch"] == "positive"]
    assert alphas == sorted(alphas) and len(set(alphas)) == 2
    for r_min, r_sh in zip(table[::2], table[1::2]):
        assert abs(float(r_min["re_E"]) - float(r_sh["re_E"])) < 1e-3
        assert r_sh["iterations"] != ""


def test_failed_rows_set_exit_code(capsys):
    # a very high Phi2 order exceeds the conditioning cap at the default precision
    code, out, err = run(capsys, "converge", "--family", "Phi2", "--n-min", "60", "--n-max", "60")
    table = rows(out)
    assert code == 1
    assert table[0]["status"].startswith("error:")
    assert "error:" in err


def test_alpha_grid():
    assert alpha_grid(0.05, 0.3, 0.05) == [0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
    with pytest.raises(Exception):
        alpha_grid(0.3, 0.1, 0.05)


def test_converge_coulomb_interlacing(capsys):
    code, out, _ = run(capsys, "converge", "--interaction", "coulomb", "--family", "Phi1",
                       "--n-min", "4", "--n-max", "7", "--levels", "2")
    table = rows(out)
    assert code == 0
    flags = {r["interlaced"] for r in table if r["n"] != "4"}
    assert flags == {"true"}


def test_shipped_configs_parse():
    from pathlib import Path

    paths = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))
    assert paths
    for p in paths:
        assert read_config(p)
