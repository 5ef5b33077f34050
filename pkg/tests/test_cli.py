import json

import numpy as np

from localsyn.cli import SWEEP_HEADER, main, validate_dump


def _run(tmp_path, *argv):
    return main(list(argv) + ["--out", str(tmp_path)])


def test_sweep_csv_and_determinism(tmp_path, capsys):
    args = ["sweep", "--e-min", "0", "--e-max", "2", "--horizon", "20", "--theta-points", "128", "--threads", "2",
            "--emit-gnuplot"]
    assert _run(tmp_path / "a", *args) == 0
    assert _run(tmp_path / "b", *args) == 0
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER) and len(lines) == 4
    J = [float(l.split(",")[1]) for l in lines[1:]]
    assert J == sorted(J, reverse=True)
    assert all(l.endswith(",ok") for l in lines[1:])
    assert (tmp_path / "a" / "sweep.gp").exists()


def test_config_file_and_errors(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[plant]\nalpha = 1.5\nbeta = 1.0\nkappa = 0.8\n[sweep]\ne_min = 2\ne_max = 2\nhorizon = 10\n"
                   "param = sl\n[oracle]\ntheta_points = 128\n")
    assert _run(tmp_path / "o", "sweep", "--config", str(cfg), "--no-oracle") == 0
    rows = (tmp_path / "o" / "sweep.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].split(",")[2] == "nan"
    assert _run(tmp_path, "sweep", "--e-min", "3", "--e-max", "1") == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[plant]\nnope = 1\n")
    assert _run(tmp_path, "sweep", "--config", str(bad)) == 2
    assert _run(tmp_path, "sweep", "--horizon", "0") == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["dump-maps", "--out", str(blocker / "sub")]) == 2


def test_verify_exit_codes(tmp_path, capsys):
    assert _run(tmp_path, "verify", "--verify-e-max", "1", "--random-params", "1", "--seed", "4") == 0
    out = capsys.readouterr().out
    assert "NOTE: E=0" in out and "FAIL" not in out
    assert _run(tmp_path, "verify", "--verify-e-max", "0", "--inject-fault") == 1


def test_oracle_command(tmp_path, capsys):
    assert _run(tmp_path, "oracle", "--theta-points", "128", "--oracle-t", "120") == 0
    rows = (tmp_path / "oracle.csv").read_text().splitlines()
    assert rows[0] == "theta,cost_sq" and len(rows) == 129
    assert "J_inf = 31.41080" in capsys.readouterr().out


def test_dump_maps(tmp_path, capsys):
    assert _run(tmp_path, "dump-maps", "-E", "0") == 0
    path = tmp_path / "maps_E0.json"
    first = path.read_bytes()
    doc = json.loads(first)
    assert validate_dump(doc) == []
    ell = next(b for b in doc["maps"]["sl_raw"]["blocks"] if b["name"] == "l")
    h = {e["site"]: e["terms"] for e in ell["h"]}
    # (z - beta) [a k, a - z, a k] with a = 1.5, k = 0.8, beta = 1
    assert np.allclose(h[1], [[1, 1.2], [0, -1.2]]) and h[-1] == h[1]
    assert np.allclose(h[0], [[2, -1.0], [1, 2.5], [0, -1.5]])
    assert _run(tmp_path, "dump-maps", "-E", "0") == 0
    assert path.read_bytes() == first
    doc["maps"]["sl"]["blocks"][0]["V"][0]["out_site"] = 99
    assert validate_dump(doc)
