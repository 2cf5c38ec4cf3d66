import csv
import json
import shutil
import subprocess

import numpy as np
import pytest

from spikecodec.cli import main


def write_config(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


BASE = {
    "encoder": {
        "tau": 3e-3, "u_th": 0.1, "u_min": 1.0, "u_max": 5.0,
        "sample_period": 1.0 / 3000.0, "resolution": 100,
    },
    "signal": {"type": "sine", "amplitude": 2.0, "frequency": 500.0,
               "offset": 3.0, "windows": 12},
    "tuner": {"generations": 30},
}


class TestEncodeDecode:
    def test_encode_writes_train_and_sidecar(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE)
        out = str(tmp_path / "train.csv")
        assert main(["encode", "--config", cfg, "--out", out]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 12
        assert all(r["bin"] for r in rows)  # all windows spike in range
        meta = json.loads((tmp_path / "train.json").read_text())
        assert meta["encoder"]["u_th"] == 0.1
        assert "12 windows" in capsys.readouterr().out

    def test_decode_ideal_recovers_held_voltages(self, tmp_path):
        cfg = write_config(tmp_path, BASE)
        train = str(tmp_path / "train.csv")
        main(["encode", "--config", cfg, "--out", train])
        out = str(tmp_path / "decoded.csv")
        assert main(["decode", "--train", train, "--out", out]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        t = np.arange(12) / 3000.0
        held = 2.0 * np.sin(2 * np.pi * 500.0 * t) + 3.0
        decoded = np.array([float(r["u_hat"]) for r in rows])
        # one reader bin of quantization at most
        assert np.abs(decoded - held).max() < 0.25

    def test_decode_linear_needs_tuning_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE)
        train = str(tmp_path / "train.csv")
        main(["encode", "--config", cfg, "--out", train])
        rc = main(["decode", "--train", train, "--mode", "linear",
                   "--out", str(tmp_path / "d.csv")])
        assert rc == 1
        assert "tuning" in capsys.readouterr().err

    def test_decode_linear_with_tuning(self, tmp_path):
        cfg = write_config(tmp_path, BASE)
        train = str(tmp_path / "train.csv")
        tuning = str(tmp_path / "tuning.json")
        main(["encode", "--config", cfg, "--out", train])
        main(["tune", "--config", cfg, "--out", tuning])
        out = str(tmp_path / "decoded.csv")
        assert main(["decode", "--train", train, "--mode", "linear",
                     "--tuning", tuning, "--out", out]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 12


class TestTune:
    def test_writes_fit_summary(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE)
        out = str(tmp_path / "tuning.json")
        assert main(["tune", "--config", cfg, "--out", out, "--seed", "5"]) == 0
        doc = json.loads((tmp_path / "tuning.json").read_text())
        for key in ("k1", "k2", "t_lin_min", "t_lin_max", "eps_lin", "mu", "seed"):
            assert key in doc
        assert doc["seed"] == 5
        assert doc["encoder"]["u_max"] == 5.0
        assert "eps_lin" in capsys.readouterr().out


class TestSweepConstant:
    def test_per_threshold_reports(self, tmp_path):
        cfg = write_config(tmp_path, {})  # defaults handle the wide window
        out_dir = str(tmp_path / "sweep")
        assert main(["sweep-constant", "--config", cfg, "--thresholds", "0.1,0.9",
                     "--points", "32", "--out-dir", out_dir]) == 0
        with open(tmp_path / "sweep" / "sweep_uth_0.1.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 32
        assert set(rows[0]) == {"u_in", "eps_u", "eps_ts"}
        lo = json.loads((tmp_path / "sweep" / "sweep_uth_0.1.json").read_text())
        hi = json.loads((tmp_path / "sweep" / "sweep_uth_0.9.json").read_text())
        assert hi["t_max"] > lo["t_max"]  # higher threshold stretches the code
        assert hi["mu"] > lo["mu"]


class TestSft:
    def test_single_point_outputs(self, tmp_path):
        cfg = write_config(tmp_path, {**BASE, "sft": {"frame_size": 24},
                                      "signal": {**BASE["signal"], "windows": 24}})
        prefix = str(tmp_path / "run")
        assert main(["sft", "--config", cfg, "--out-prefix", prefix]) == 0
        doc = json.loads((tmp_path / "run.json").read_text())
        assert doc["frame_size"] == 24
        assert doc["rmse_mag"] >= 0
        with open(tmp_path / "run_spectrum.csv", newline="") as fh:
            assert len(list(csv.DictReader(fh))) == 24
        assert (tmp_path / "run_ideal.csv").exists()

    def test_sweep_summary_sorted(self, tmp_path):
        cfg = write_config(tmp_path, {**BASE, "sft": {"frame_size": 24}})
        out_dir = str(tmp_path / "sweep")
        assert main(["sft-sweep", "--config", cfg, "--freqs", "500,100",
                     "--out-dir", out_dir]) == 0
        with open(tmp_path / "sweep" / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["freq_hz"]) for r in rows] == [100.0, 500.0]
        assert (tmp_path / "sweep" / "spectrum_500hz.csv").exists()


class TestFailureModes:
    def test_invalid_encoder_names_the_violated_rule(self, tmp_path, capsys):
        bad = {"encoder": {**BASE["encoder"], "sample_period": 1.48e-4}}
        cfg = write_config(tmp_path, bad)
        rc = main(["encode", "--config", cfg, "--out", str(tmp_path / "t.csv")])
        assert rc == 1
        assert "slowest spike" in capsys.readouterr().err

    def test_unknown_signal_type(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"signal": {"type": "square", "windows": 4}})
        rc = main(["encode", "--config", cfg, "--out", str(tmp_path / "t.csv")])
        assert rc == 1
        assert "square" in capsys.readouterr().err

    def test_missing_train_file(self, tmp_path, capsys):
        rc = main(["decode", "--train", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "d.csv")])
        assert rc == 1


class TestDeterminism:
    def test_noisy_encode_reruns_byte_identical(self, tmp_path):
        doc = {**BASE, "noise": {"delta_u": 0.05, "mode": "per-window", "rng_seed": 0}}
        cfg = write_config(tmp_path, doc)
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        main(["encode", "--config", cfg, "--out", str(a), "--seed", "11"])
        main(["encode", "--config", cfg, "--out", str(b), "--seed", "11"])
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_console_script_installed(self):
        exe = shutil.which("spikecodec")
        assert exe, "console script should be on PATH after install"
        out = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert out.returncode == 0
        assert "sft-sweep" in out.stdout
