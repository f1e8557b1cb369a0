import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from iso3bp import storage
from iso3bp.cli import main
from iso3bp.fixtures import Q1, named_point

P0_FLAGS = ["--t", "2.6733789255846", "--a", "4.3170475352787", "--b", "1.490359743"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_refine_seed(capsys):
    code, out, _ = run(capsys, "refine-seed", "--kind", "odd-even", *P0_FLAGS, "--eps1", "1e-10")
    assert code == 0
    r = rows(out)[0]
    assert float(r["residual"]) < 1e-9
    code, out, _ = run(capsys, "refine-seed", "--t", r["tau"], "--a", r["a"], "--b", r["b"])
    assert code == 0 and rows(out)[0]["iterations"] == "0"
    assert rows(out)[0]["tau"] == r["tau"]


def test_refine_garbage_seed(capsys):
    code, _, err = run(capsys, "refine-seed", "--t", "1", "--a", "0", "--b", "0")
    assert code == 1 and err.startswith("error: no-convergence")


def test_trace_branch_writes_file(capsys, tmp_path):
    out = tmp_path / "b.txt"
    code, text, _ = run(capsys, "trace-branch", *P0_FLAGS, "--max-pillars", "2", "--out", str(out))
    assert code == 0
    summary = rows(text)[0]
    assert summary["termination"] == "max-pillars" and summary["pillars"] == "2"
    br = storage.read_branch(out)
    q1 = br.pillars[1].coords
    assert np.max(np.abs(q1 - [float(v) for v in Q1])) < 1e-3


def test_trace_toward_p3(capsys, tmp_path):
    out = tmp_path / "p3.txt"
    code, text, _ = run(capsys, "trace-branch", *P0_FLAGS, "--orientation", "-1", "--out", str(out))
    assert code == 0 and rows(text)[0]["termination"] == "left-box"
    c = storage.read_branch(out).coords() * [4, 1, 1]
    assert np.min(np.max(np.abs(c - named_point("P3")), axis=1)) < 1e-2


def test_trace_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "trace-branch", *P0_FLAGS, "--max-pillars", "1",
                       "--out", str(tmp_path / "missing" / "b.txt"))
    assert code == 2 and "cannot write" in err


@pytest.fixture(scope="module")
def s1_file(tmp_path_factory, s1_toward_p2):
    path = tmp_path_factory.mktemp("br") / "s1.txt"
    storage.write_branch(s1_toward_p2, path)
    return path


def test_find_bifurcation(capsys, s1_file, tmp_path):
    code, out, _ = run(capsys, "find-bifurcation", str(s1_file))
    assert code == 0
    r = rows(out)[0]
    got = np.array([float(r["T"]), float(r["a"]), float(r["b"])])
    assert np.max(np.abs(got - named_point("B"))) < 1e-2
    br = storage.read_branch(s1_file)
    br.points = br.points[:2000]
    short = tmp_path / "short.txt"
    storage.write_branch(br, short)
    code, _, err = run(capsys, "find-bifurcation", str(short))
    assert code == 1 and err.startswith("error: no-interior-minimum")


def test_locate_periodic(capsys, s1_file, tmp_path):
    csv_out, svg_out = tmp_path / "orbit.csv", tmp_path / "orbit.svg"
    code, out, _ = run(capsys, "locate-periodic", str(s1_file), "--p", "9", "--q", "4",
                       "--out", str(csv_out), "--plot", str(svg_out), "--samples", "50")
    assert code == 0
    r = rows(out)[0]
    assert r["target"] == "9/4" and float(r["closure_error"]) < 1e-4
    t, states = storage.read_trajectory(csv_out)
    assert t.size == 51 and states.shape == (51, 5)
    assert svg_out.read_text().rstrip().endswith("</svg>")
    code, _, err = run(capsys, "locate-periodic", str(s1_file), "--p", "100", "--q", "1")
    assert code == 1 and err.startswith("error: target-out-of-range")


def test_integrate(capsys, tmp_path):
    code, out, _ = run(capsys, "integrate", "--a", "4.743416490252569", "--b", "0",
                       "--t-end", "20", "--samples", "3")
    assert code == 0
    t, states = storage.loads_trajectory(out)
    assert np.allclose(states[-1], [0, 10, 0, 0, 2 * 4.743416490252569], atol=1e-9)
    plot = tmp_path / "fr.svg"
    code, out, _ = run(capsys, "integrate", "--a", "2", "--b", "1", "--t-end", "3", "--extended",
                       "--samples", "5", "--plot", str(plot))
    assert code == 0 and out.splitlines()[0].endswith("x15") and plot.exists()
    code, out, _ = run(capsys, "integrate", "--a", "2", "--b", "1", "--t-end", "3", "--format", "svg")
    assert code == 0 and "<svg" in out
    code, _, err = run(capsys, "integrate", "--a", "0", "--b", "0", "--t-end", "50")
    assert code == 1 and err.startswith("error: ")


def test_verify_tables(capsys, monkeypatch):
    monkeypatch.setenv("ISO3BP_THREADS", "1")
    code, out, _ = run(capsys, "verify-tables", "--table", "fs9")
    assert code == 0
    assert [r["status"] for r in rows(out)] == ["pass"] * 9
    code, out, err = run(capsys, "verify-tables", "--table", "t9", "--perturb-b", "0.01")
    assert code == 1 and "t9[1,1]" in err
    code, out, _ = run(capsys, "verify-tables", "--table", "fth9")
    statuses = [r["status"] for r in rows(out)]
    assert statuses[-1] == "advisory-fail" and statuses[:-1] == ["pass"] * 8
    assert code == 0


def test_verify_tables_worker_pool_keeps_order(capsys, monkeypatch):
    monkeypatch.setenv("ISO3BP_THREADS", "2")
    code, out, _ = run(capsys, "verify-tables", "--table", "t9")
    assert code == 0
    assert [r["row"] for r in rows(out)] == [f"t9[{i},{j}]" for i in (1, 2, 3) for j in (1, 2, 3)]
    monkeypatch.setenv("ISO3BP_THREADS", "zero")
    code, _, err = run(capsys, "verify-tables", "--table", "t9")
    assert code == 2


def test_render(capsys, tmp_path, s1_file):
    out1, out2 = tmp_path / "a.svg", tmp_path / "b.svg"
    for out in (out1, out2):
        assert run(capsys, "render", str(s1_file), "--projection", "Tab", "--out", str(out))[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    traj = tmp_path / "eq.csv"
    run(capsys, "integrate", "--a", "4.743416490252569", "--b", "0", "--t-end", "13.3",
        "--out", str(traj))
    code, svg, _ = run(capsys, "render", str(traj), "--figure", "xy")
    assert code == 0 and 'id="track-body2"' in svg
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert run(capsys, "render", str(bad))[0] == 2
    assert run(capsys, "render", str(tmp_path / "nope.csv"))[0] == 2


def test_usage_errors_exit_two():
    proc = subprocess.run([sys.executable, "-m", "iso3bp.cli", "frobnicate"], capture_output=True)
    assert proc.returncode == 2
    proc = subprocess.run([sys.executable, "-m", "iso3bp.cli", "find-bifurcation", "/nonexistent"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stderr.startswith("error: usage")
