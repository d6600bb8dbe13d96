"""Tests for the command-line runner."""
from __future__ import annotations

import json
import math

import pandas as pd
import pytest

from app import __version__
from app.cli.main import main
from app.storage.run_storage import load_manifest

QUARTER_PI = repr(math.pi / 4)


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / "run")


def read(prefix: str, suffix: str = ".csv") -> pd.DataFrame:
    return pd.read_csv(prefix + suffix)


class TestSweeps:
    def test_single_round_sweep(self, out):
        assert main(["sweep-single", "--points", "9", "--out", out]) == 0
        frame = read(out)
        assert list(frame.columns) == ["lambda", "e_cd_1", "e_ab_1", "sum"]
        assert len(frame) == 9
        assert frame["lambda"].iloc[-1] == pytest.approx(math.pi / 2)
        assert frame["e_cd_1"].iloc[4] == pytest.approx(1.0, abs=1e-9)
        assert (frame["sum"] <= 1 + 1e-9).all()

    def test_degenerate_range(self, out):
        assert main(["sweep-single", "--lambda-min", "0", "--lambda-max", "0", "--points", "2", "--out", out]) == 0
        frame = read(out)
        assert frame["e_cd_1"].tolist() == [0.0, 0.0]

    def test_multi_round_sweep_full_swap(self, out):
        assert main(["sweep-multi", "--lambda", QUARTER_PI, "--rounds", "2", "--out", out]) == 0
        frame = read(out)
        assert frame["n"].tolist() == [1, 2]
        assert frame["e_cd_n"].tolist() == pytest.approx([1.0, 0.0], abs=1e-9)

    def test_multi_round_sweep_small_strength(self, out):
        assert main(["sweep-multi", "--lambda", "0.1", "--rounds", "50", "--out", out]) == 0
        frame = read(out)
        assert len(frame) == 50
        assert (frame["e_cd_n"] > 0).all()


class TestPairs:
    def test_count(self, out):
        assert main(["count", "--lambda", f"{QUARTER_PI},0", "--x", "0", "--out", out]) == 0
        frame = read(out)
        assert frame["n"].tolist() == [1, 0]
        assert frame["saturated"].tolist() == [False, False]

    def test_equal_share(self, out):
        assert main(["equal-share", "--rounds", "2", "--points", "9", "--lambda-max", QUARTER_PI, "--out", out]) == 0
        assert len(read(out)) == 9
        per_pair = read(out, ".pairs.csv")
        assert per_pair["n"].tolist() == [1, 2]
        assert (per_pair["e_cd"] > 0).all()

    def test_optimize_is_reproducible(self, tmp_path):
        flags = ["--x", "2", "--restarts", "1", "--max-evals", "20", "--optimizer-cap", "30", "--cap", "100"]
        first, second = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["optimize", *flags, "--out", first]) == 0
        assert main(["optimize", *flags, "--out", second]) == 0
        for suffix in (".csv", ".results.json"):
            with open(first + suffix, "rb") as a, open(second + suffix, "rb") as b:
                assert a.read() == b.read()
        frame = read(first)
        assert frame["best_n"].iloc[0] >= 1

    def test_optimizer_matches_or_beats_fixed_gate(self, tmp_path):
        counted, optimized = str(tmp_path / "count"), str(tmp_path / "opt")
        eighth_pi = repr(math.pi / 8)
        assert main(["count", "--lambda", eighth_pi, "--x", "2", "--cap", "100", "--out", counted]) == 0
        flags = ["--x", "2", "--restarts", "1", "--max-evals", "20", "--optimizer-cap", "30", "--cap", "100"]
        assert main(["optimize", *flags, "--out", optimized]) == 0
        assert read(counted)["n"].iloc[0] == 1
        assert read(optimized)["best_n"].iloc[0] >= read(counted)["n"].iloc[0]


class TestVerify:
    def test_single_pair_certified(self, out, capsys):
        assert main(["verify", "--n-target", "1", "--t", "0.3", "--out", out]) == 0
        assert "OK" in capsys.readouterr().out
        assert len(read(out)) == 1

    def test_zero_strength_fails(self, out, capsys):
        assert main(["verify", "--n-target", "3", "--t", "0", "--out", out]) == 1
        assert "FAIL" in capsys.readouterr().out

    def test_searches_for_t(self, out):
        assert main(["verify", "--n-target", "2", "--out", out]) == 0
        assert read(out)["n"].tolist() == [1, 2]


class TestConfiguration:
    @pytest.mark.parametrize(
        "argv",
        [
            ["sweep-single", "--points", "1"],
            ["sweep-multi", "--lambda", "0.1,abc"],
            ["count", "--x", "-1"],
            ["count", "--x", "45"],
            ["count", "--x-min", "1", "--x-max", "45"],
            ["sweep-single", "--lambda-min", "1", "--lambda-max", "0"],
            ["teleport"],
            ["sweep-single", "--log-level", "LOUD"],
        ],
    )
    def test_usage_errors_exit_two(self, argv, out):
        assert main([*argv, "--out", out]) == 2

    def test_missing_config_file(self, tmp_path, out):
        assert main(["sweep-single", "--config", str(tmp_path / "missing.env"), "--out", out]) == 2

    def test_precedence(self, tmp_path, out, monkeypatch):
        config = tmp_path / "run.env"
        config.write_text("TRANSFER_POINTS=5\nTRANSFER_LAMBDA_MAX=1.0\n")
        monkeypatch.delenv("TRANSFER_POINTS", raising=False)

        assert main(["sweep-single", "--config", str(config), "--out", out]) == 0
        frame = read(out)
        assert len(frame) == 5
        assert frame["lambda"].iloc[-1] == 1.0

        monkeypatch.setenv("TRANSFER_POINTS", "4")
        assert main(["sweep-single", "--config", str(config), "--out", out]) == 0
        assert len(read(out)) == 4

        assert main(["sweep-single", "--config", str(config), "--points", "3", "--out", out]) == 0
        assert len(read(out)) == 3

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out


class TestManifest:
    def test_manifest_digests_outputs(self, out):
        assert main(["sweep-single", "--points", "5", "--out", out]) == 0
        manifest = load_manifest(out + ".manifest.json")
        assert manifest.command == "sweep-single"
        assert manifest.version == __version__
        assert manifest.config["points"] == 5
        assert [digest.path for digest in manifest.outputs] == [out + ".csv"]

    def test_replay_matches(self, out, capsys):
        assert main(["sweep-single", "--points", "5", "--out", out]) == 0
        assert main(["replay", "--manifest", out + ".manifest.json"]) == 0
        assert "match" in capsys.readouterr().out

    def test_replay_detects_tampering(self, out, capsys):
        assert main(["count", "--lambda", "0.2", "--x", "3", "--out", out]) == 0
        path = out + ".manifest.json"
        with open(path) as f:
            raw = json.load(f)
        raw["outputs"][0]["sha256"] = "0" * 64
        with open(path, "w") as f:
            json.dump(raw, f)
        assert main(["replay", "--manifest", path]) == 1
        assert "MISMATCH" in capsys.readouterr().out

    def test_replay_missing_manifest(self, tmp_path):
        assert main(["replay", "--manifest", str(tmp_path / "nope.json")]) == 2

    def test_replay_rejects_invalid_recorded_config(self, out):
        assert main(["sweep-single", "--points", "5", "--out", out]) == 0
        path = out + ".manifest.json"
        with open(path) as f:
            raw = json.load(f)
        raw["config"]["points"] = 1
        with open(path, "w") as f:
            json.dump(raw, f)
        assert main(["replay", "--manifest", path]) == 2
