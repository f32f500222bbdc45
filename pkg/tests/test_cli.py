import csv
import math

import numpy as np
import pytest

from kpburgers.cli import main
from kpburgers.experiments import KSTAR_ORIGIN
from kpburgers.fieldio import read_field


@pytest.fixture(autouse=True)
def out_root(tmp_path, monkeypatch):
    monkeypatch.setenv("KPB_OUTPUT_ROOT", str(tmp_path / "out"))
    return tmp_path / "out"


def _lines(capsys):
    return capsys.readouterr().out.strip().splitlines()


def test_kernel_eval_origin(capsys):
    assert main(["kernel-eval", "--what", "Kstar", "--x", "0", "--y", "0"]) == 0
    assert float(_lines(capsys)[0]) == pytest.approx(KSTAR_ORIGIN, rel=1e-10)


def test_kernel_eval_broadcast_and_scaling(capsys):
    # K(x, y, t) = t^-5/4 K*(x/sqrt t, y/t^(3/4))
    assert main(["kernel-eval", "--what", "K", "--x", "0.4", "--y", "0.3", "--t", "4"]) == 0
    k = float(_lines(capsys)[0])
    assert main(["kernel-eval", "--what", "Kstar", "--x", "0.2", "--y", str(0.3 / 4**0.75)]) == 0
    ks = float(_lines(capsys)[0])
    assert k == pytest.approx(4**-1.25 * ks, rel=1e-9)


def test_kernel_table(tmp_path, capsys):
    out = tmp_path / "k.csv"
    assert main(["kernel-table", "--x-range=-1,1,3", "--y-range=0,1,2", "--t", "1,2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 12
    assert list(rows[0]) == ["x", "y", "t", "l", "value"]


def test_fit_decay(tmp_path, capsys):
    p = tmp_path / "s.csv"
    t = np.geomspace(1, 100, 30)
    p.write_text("t,v\n" + "".join(f"{float(a)!r},{float(3 * a**-1.75)!r}\n" for a in t))
    assert main(["fit-decay", "--series", str(p), "--window", "1,100"]) == 0
    out = dict(line.split("=", 1) for line in _lines(capsys))
    assert float(out["slope"]) == pytest.approx(-1.75, abs=1e-12)
    assert float(out["log_amplitude"]) == pytest.approx(math.log(3), abs=1e-12)


def test_unknown_experiment(capsys):
    assert main(["verify", "--experiment", "nope"]) == 2
    err = capsys.readouterr().err
    assert "nope" in err and "kernel-bounds" in err


def test_bad_config_file(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[grid]\nnx = 7\n")
    assert main(["evolve", "--config", str(p)]) == 2
    assert "[grid]" in capsys.readouterr().err


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(
        "[grid]\nnx = 32\nny = 32\nLx = 16\nLy = 16\n"
        "[solve]\ndt = 0.1\nT = 1\nstride = 5\nboundary_tol = none\n"
        "[data]\namplitude = 0.3\n[output]\ndir = small\n"
    )
    return p


def test_evolve_is_deterministic(small_config, out_root, capsys):
    assert main(["evolve", "--config", str(small_config)]) == 0
    d = out_root / "small" / "trajectory"
    first = {f.name: f.read_bytes() for f in sorted(d.iterdir())}
    assert main(["evolve", "--config", str(small_config)]) == 0
    assert {f.name: f.read_bytes() for f in sorted(d.iterdir())} == first
    assert (out_root / "small" / "resolved_config.ini").is_file()


def test_build_w(small_config, out_root, capsys):
    assert main(["build-w", "--config", str(small_config), "--times", "0,1"]) == 0
    rows = list(csv.DictReader((out_root / "small" / "w" / "index.csv").open()))
    assert [float(r["t"]) for r in rows] == [0.0, 1.0]
    assert float(rows[0]["linf_u_minus_w"]) == 0.0
    w, t = read_field(out_root / "small" / "w" / "w_00000.kpbf")
    assert t == 0.0 and w.grid.nx == 32


def test_verify_invariants(out_root, capsys):
    assert main(["verify", "--experiment", "invariants"]) == 0
    out = capsys.readouterr().out
    assert "C9 PASS" in out
    assert (out_root / "invariants" / "report.csv").is_file()
