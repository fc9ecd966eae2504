import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from kprofile.cli import main, parse_dims, replay
from kprofile.delay import TimeSeriesCube
from kprofile.ingest import file_sha256, save_cube, write_wav
from kprofile.synthetic import plane_to_cloud_cube

FAST = ["--candidates", "1", "--restarts", "1"]


def _csv(path, X):
    np.savetxt(path, X, delimiter=",", fmt="%.17g")
    return str(path)


def _read(path):
    return np.loadtxt(path, delimiter=",", skiprows=1)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_dims():
    assert parse_dims("3..7") == range(3, 8)
    assert parse_dims("4") == range(4, 5)
    from kprofile import InvalidConfig
    with pytest.raises(InvalidConfig):
        parse_dims("5..2")


def test_ks_gen_and_sidecar(tmp_path):
    rc = main(["ks-gen", "--alpha", "19", "--samples", "40", "--transient-steps", "0",
               "--sample-stride", "5", "--out-dir", str(tmp_path)])
    assert rc == 0
    X = np.loadtxt(tmp_path / "ks_alpha19.csv", delimiter=",")
    assert X.shape == (40, 32)
    meta = json.loads((tmp_path / "ks_alpha19.json").read_text())
    assert meta["alpha"] == 19.0 and meta["resolved_sample_stride"] == 5
    assert (tmp_path / "ks_alpha19.manifest.json").exists()


def test_exit_codes(tmp_path):
    assert main(["ks-gen", "--alpha", "19", "--grid", "33", "--out-dir", str(tmp_path)]) == 2
    assert main(["no-such-command"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    assert main(["profile", str(bad), "--out-dir", str(tmp_path)]) == 3
    assert main(["profile", str(tmp_path / "missing.csv"), "--out-dir", str(tmp_path)]) == 3
    good = _csv(tmp_path / "g.csv", np.random.default_rng(0).standard_normal((10, 3)))
    assert main(["profile", good, "--dims", "2..1", "--out-dir", str(tmp_path)]) == 2
    assert main(["profile", good, "--dims", "1..5", "--out-dir", str(tmp_path)]) == 2


def test_line_profile(tmp_path, capsys):
    X = np.outer(np.linspace(-1, 2, 30), np.arange(1.0, 6.0))
    p = _csv(tmp_path / "line.csv", X)
    assert main(["profile", p, "--out-dir", str(tmp_path), "--format", "json"]) == 0
    out = json.loads((tmp_path / "line.profile.json").read_text())
    assert out["good_dimension"] == 1
    assert all(abs(e["kappa"] - 1) < 1e-6 for e in out["entries"])
    assert "good dimension (kappa >= 0.2): 1" in capsys.readouterr().out


def test_global_flags_after_subcommand(tmp_path):
    p = _csv(tmp_path / "x.csv", np.random.default_rng(1).standard_normal((12, 3)))
    assert main(["profile", p, "--seed", "5", "--kappa-threshold", "0.5",
                 "--out-dir", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "x.profile.manifest.json").read_text())
    assert man["seed"] == 5 and man["config"]["kappa_threshold"] == 0.5


def test_threads_env(tmp_path, monkeypatch):
    p = _csv(tmp_path / "x.csv", np.random.default_rng(2).standard_normal((12, 3)))
    monkeypatch.setenv("KPROFILE_THREADS", "2")
    assert main(["profile", p, "--out-dir", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "x.profile.manifest.json").read_text())
    assert man["threads"] == 2 and man["config"]["sap"]["threads"] == 2
    assert main(["--threads", "1", "profile", p, "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "x.profile.manifest.json").read_text())["threads"] == 1
    monkeypatch.setenv("KPROFILE_THREADS", "many")
    assert main(["profile", p, "--out-dir", str(tmp_path)]) == 2


def test_manifest_replay_bit_identical(tmp_path):
    p = _csv(tmp_path / "x.csv", np.random.default_rng(3).standard_normal((30, 5)))
    out = tmp_path / "out"
    argv = ["--seed", "9", "profile", p, "--init", "random", "--plot", "--max-secants", "200",
            "--out-dir", str(out)]
    assert main(argv) == 0
    man = json.loads((out / "x.profile.manifest.json").read_text())
    assert man["inputs"] == {p: file_sha256(p)}
    assert man["argv"] == argv and man["command"] == "profile"
    for f in man["outputs"]:
        open(f, "w").close()
    assert replay(out / "x.profile.manifest.json") == 0
    assert {f: file_sha256(f) for f in man["outputs"]} == man["outputs"]


def test_svg_deterministic(tmp_path):
    p = _csv(tmp_path / "x.csv", np.random.default_rng(4).standard_normal((20, 4)))
    for d in ("a", "b"):
        assert main(["profile", p, "--plot", "--out-dir", str(tmp_path / d)]) == 0
    a = (tmp_path / "a" / "x.profile.svg").read_bytes()
    assert a == (tmp_path / "b" / "x.profile.svg").read_bytes()
    assert a.startswith(b"<svg") or a.startswith(b"<?xml")


def test_compare_pca_full_dimension(tmp_path):
    p = _csv(tmp_path / "x.csv", np.random.default_rng(5).standard_normal((25, 4)))
    assert main(["compare-pca", p, "--out-dir", str(tmp_path), "--plot"]) == 0
    rows = _read(tmp_path / "x.compare-pca.csv")
    assert rows[-1, 0] == 4 and abs(rows[-1, 1]) < 1e-6
    sv = _read(tmp_path / "x.compare-pca.singular-values.csv")
    assert sv.shape == (4, 2) and np.all(np.diff(sv[:, 1]) <= 0)


def test_monitor_constant_cube_flat(tmp_path):
    rng = np.random.default_rng(6)
    cube = TimeSeriesCube(np.repeat(rng.standard_normal((1, 10, 2)), 7, axis=0))
    spec = save_cube(cube, tmp_path / "const.csv", ["u", "w"])
    assert main(["monitor", str(spec.path), "--variables", "u,w", "--delay", "2", "--dims", "1..2",
                 "--plot", "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "const.monitor.csv")
    assert len(rows) == 2 * 6
    for d in ("1", "2"):
        assert len({r["kappa"] for r in rows if r["m"] == d}) == 1
    assert (tmp_path / "const.monitor.svg").exists()


def test_monitor_transition(tmp_path):
    spec = save_cube(plane_to_cloud_cube(T=16, P=40, v=4, seed=0), tmp_path / "tr.csv")
    assert main(["monitor", str(spec.path), "--variables", ",".join(spec.variable_columns),
                 "--delay", "2", "--stride", "2", "--dims", "1..2", "--out-dir", str(tmp_path)]) == 0
    k2 = {int(r["t_start"]): float(r["kappa"]) for r in _rows(tmp_path / "tr.monitor.csv") if r["m"] == "2"}
    before = [k for t, k in k2.items() if t + 2 <= 8]
    after = [k for t, k in k2.items() if t >= 8]
    assert min(before) - max(after) >= 0.1


def test_monitor_requires_variables(tmp_path):
    spec = save_cube(TimeSeriesCube(np.zeros((3, 2, 1))), tmp_path / "c.csv")
    assert main(["monitor", str(spec.path), "--delay", "1", "--out-dir", str(tmp_path)]) == 2


def test_audio_channel_mismatch(tmp_path):
    p = tmp_path / "mono.wav"
    write_wav(p, 8000, 0.1 * np.sin(np.arange(4000)))
    assert main(["audio-profile", str(p), "--channels", "2", "--out-dir", str(tmp_path)]) == 3


def test_audio_profile_runs(tmp_path, capsys):
    p = tmp_path / "st.wav"
    t = np.arange(8000) / 8000
    write_wav(p, 8000, 0.4 * np.column_stack([np.sin(2 * np.pi * 5 * t), np.cos(2 * np.pi * 5 * t)]))
    assert main(["audio-profile", str(p), "--decimation", "10", "--window-len", "40", "--hop", "7",
                 "--dims", "1..3", "--out-dir", str(tmp_path)] + FAST) == 0
    assert "windows in R^80" in capsys.readouterr().out
    man = json.loads((tmp_path / "st.audio-profile.manifest.json").read_text())
    assert man["config"]["audio"]["resolved_hop"] == 7


def test_project_plane_is_coplanar(tmp_path):
    rng = np.random.default_rng(7)
    Q = np.linalg.qr(rng.standard_normal((10, 2)))[0]
    X = rng.standard_normal((50, 2)) @ Q.T + rng.standard_normal(10)
    p = _csv(tmp_path / "plane.csv", X)
    assert main(["project", p, "--dim", "3", "--plot", "--out-dir", str(tmp_path)]) == 0
    Y = np.loadtxt(tmp_path / "plane.project3.csv", delimiter=",")
    s = np.linalg.svd(Y - Y.mean(axis=0), compute_uv=False)
    assert Y.shape == (50, 3) and s[2] < 1e-6 * s[0]
    assert (tmp_path / "plane.project3.svg").read_text().startswith("<")
    B = np.loadtxt(tmp_path / "plane.project3.basis.csv", delimiter=",")
    assert np.allclose(B.T @ B, np.eye(3), atol=1e-12)


def test_project_full_dimension_is_isometry(tmp_path):
    X = np.random.default_rng(8).standard_normal((20, 4))
    p = _csv(tmp_path / "x.csv", X)
    assert main(["project", p, "--dim", "4", "--out-dir", str(tmp_path)]) == 0
    Y = np.loadtxt(tmp_path / "x.project4.csv", delimiter=",")
    dX = np.linalg.norm(X[:, None] - X[None], axis=2)
    dY = np.linalg.norm(Y[:, None] - Y[None], axis=2)
    assert np.max(np.abs(dX - dY)) < 1e-8
    assert main(["project", p, "--dim", "5", "--out-dir", str(tmp_path)]) == 2


def test_console_script_version():
    r = subprocess.run([sys.executable, "-m", "kprofile.cli", "--version"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and r.stdout.startswith("kprofile ")
