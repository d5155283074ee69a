import json
import subprocess
import sys

import numpy as np
import pytest

from kernelsense.cli import run
from kernelsense.config import ConfigError, parse_config
from kernelsense.framing import generate_ar1, save_samples


def write_cfg(tmp_path, name="cfg.json", **over):
    cfg = {"version": 1, "detector": {"kind": "glrt"}, "d": 16, "length": 64,
           "snr_db": [-10, 0], "trials": 60, "base_seed": 7}
    cfg.update(over)
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def test_sweep_writes_one_row_per_snr(tmp_path, capsys):
    assert run(["sweep", "--config", write_cfg(tmp_path), "--threads", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "snr_db,threshold,pd,pf"
    assert [float(l.split(",")[0]) for l in lines[1:]] == [-10.0, 0.0]


def test_out_flag_and_config_output(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert run(["sweep", "--config", write_cfg(tmp_path), "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    cfg = write_cfg(tmp_path, "b.json", output=str(tmp_path / "b.csv"))
    assert run(["sweep", "--config", cfg]) == 0
    assert (tmp_path / "b.csv").read_text() == out.read_text()


def test_unknown_key_is_a_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, detector={"kind": "kpca", "kernel": {"kind": "polynomial", "sigma": 2}})
    assert run(["sweep", "--config", cfg]) == 1
    assert "sigma" in capsys.readouterr().err
    assert run(["sweep", "--config", write_cfg(tmp_path, trails=5)]) == 1
    assert "trails" in capsys.readouterr().err


@pytest.mark.parametrize("over", [
    {"version": 2},
    {"target_pf": 1.5},
    {"d": 128, "length": 64},
    {"detector": {"kind": "kglrt", "kernel": {"kind": "polynomial"}}},
    {"detector": {"kind": "glrt", "kernel": {"kind": "linear"}}},
    {"signal": {"kind": "file", "path": "missing.csv"}},
    {"snr_db": []},
])
def test_invalid_configs_exit_one(tmp_path, over):
    assert run(["sweep", "--config", write_cfg(tmp_path, **over)]) == 1


def test_argument_errors_exit_one(tmp_path):
    cfg = write_cfg(tmp_path)
    for argv in (["roc", "--config", cfg, "--snr", "abc"], ["sweep"], ["bogus"],
                 ["sweep", "--config", str(tmp_path / "nope.json")],
                 ["sweep", "--config", cfg, "--threads", "-1"]):
        with pytest.raises(SystemExit) as exc:
            code = run(argv)
            raise SystemExit(code)
        assert exc.value.code == 1, argv


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{version: 1")
    assert run(["sweep", "--config", str(p)]) == 1


def test_default_scale_kpca_config_runs(tmp_path, capsys):
    cfg = write_cfg(tmp_path, d=128, length=500, trials=50, snr_db=[-8],
                    detector={"kind": "kpca", "kernel": {"kind": "polynomial", "c": 1, "degree": 2}},
                    target_pf=0.1)
    assert run(["sweep", "--config", cfg]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert 0 <= float(row[2]) <= 1


def test_roc_subcommand(tmp_path, capsys):
    assert run(["roc", "--config", write_cfg(tmp_path, detector={"kind": "ec"}), "--snr", "30"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "pf,pd"
    pts = np.array([[float(v) for v in l.split(",")] for l in lines[1:]])
    assert pts[0].tolist() == [0, 0] and pts[-1].tolist() == [1, 1]
    assert [0.0, 1.0] in pts.tolist()
    # 60 + 60 continuous scores, all distinct
    assert len(pts) == 120 + 2


def test_calibrate_subcommand(tmp_path, capsys):
    assert run(["calibrate", "--config", write_cfg(tmp_path)]) == 0
    thr = float(capsys.readouterr().out)
    assert thr > 1


def test_calibrate_with_too_few_trials_is_runtime_error(tmp_path):
    assert run(["calibrate", "--config", write_cfg(tmp_path, trials=5)]) == 2


def test_similarity_on_repeated_segments(tmp_path, capsys):
    seg = np.random.default_rng(0).standard_normal(100)
    save_samples(tmp_path / "rep.csv", np.tile(seg, 5))
    cfg = write_cfg(tmp_path, detector={"kind": "pca"}, signal={"kind": "file", "path": "rep.csv"},
                    segment_len=100)
    assert run(["similarity", "--config", cfg]) == 0
    vals = [float(v) for v in capsys.readouterr().out.split()]
    assert len(vals) == 4
    np.testing.assert_allclose(vals, 1.0, atol=1e-6)


def test_similarity_short_file_exits_one(tmp_path):
    save_samples(tmp_path / "short.csv", np.ones(150))
    cfg = write_cfg(tmp_path, detector={"kind": "pca"}, signal={"kind": "file", "path": "short.csv"},
                    segment_len=100)
    assert run(["similarity", "--config", cfg]) == 1


def test_similarity_rejects_other_detectors(tmp_path):
    cfg = write_cfg(tmp_path, signal={"kind": "ar1"}, length=400, segment_len=100)
    assert run(["similarity", "--config", cfg]) == 1


@pytest.mark.parametrize("kind", ["pca", "kpca"])
def test_similarity_on_ar1(tmp_path, capsys, kind):
    cfg = write_cfg(tmp_path, detector={"kind": kind}, signal={"kind": "ar1", "coeff": 0.95, "seed": 3},
                    length=1000, segment_len=200)
    assert run(["similarity", "--config", cfg]) == 0
    vals = [float(v) for v in capsys.readouterr().out.split()]
    assert len(vals) == 4
    assert all(0 <= v <= 1 + 1e-6 for v in vals)


def test_zero_signal_file_is_runtime_error(tmp_path, capsys):
    save_samples(tmp_path / "zeros.csv", np.zeros(64))
    cfg = write_cfg(tmp_path, signal={"kind": "file", "path": "zeros.csv"})
    assert run(["sweep", "--config", cfg]) == 2
    assert "failed" in capsys.readouterr().err


def test_relative_path_resolves_against_config_dir(tmp_path):
    sub = tmp_path / "sub"
    sub.mkdir()
    save_samples(sub / "x.csv", generate_ar1(64, 0.9, 1))
    text = json.dumps({"version": 1, "detector": {"kind": "pca"}, "signal": {"kind": "file", "path": "x.csv"}})
    _, source = parse_config(text, sub)
    assert source.path == str(sub / "x.csv")
    with pytest.raises(ConfigError):
        parse_config(text, tmp_path)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "kernelsense", "calibrate", "--config", write_cfg(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert float(proc.stdout) > 1
    proc = subprocess.run([sys.executable, "-m", "kernelsense", "sweep", "--config", "/nonexistent.json"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
