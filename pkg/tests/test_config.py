"""Tests for run settings and grid parsing."""
from __future__ import annotations

import math

import pytest
from pydantic import ValidationError

from app.core.config import MAX_THRESHOLD_EXPONENT, TOLERANCES, Settings, parse_grid


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for key in ("TRANSFER_POINTS", "TRANSFER_LAMBDAS", "TRANSFER_XS", "TRANSFER_ROUNDS"):
        monkeypatch.delenv(key, raising=False)


class TestParseGrid:
    def test_parses_and_skips_blanks(self):
        assert parse_grid("0.1, 0.2,,0.3 ") == [0.1, 0.2, 0.3]

    @pytest.mark.parametrize("raw", ["", " , ", "0.1,abc", "0.1,inf", "nan"])
    def test_rejects(self, raw):
        with pytest.raises(ValueError):
            parse_grid(raw)

    def test_comma_is_not_a_decimal_separator(self):
        assert parse_grid("0,5") == [0.0, 5.0]


class TestSettings:
    def test_defaults(self):
        settings = Settings()
        assert settings.lambda_max == pytest.approx(math.pi / 2)
        assert settings.eigensolver == "lapack"
        assert settings.lambda_grid() == [0.05, 0.1, 0.2]
        assert settings.x_grid() == [float(x) for x in range(1, 11)]

    def test_explicit_x_grid_wins(self):
        assert Settings(xs="0,2.5").x_grid() == [0.0, 2.5]

    def test_fractional_x_range(self):
        assert Settings(x_min=0.5, x_max=2.5).x_grid() == [0.5, 1.5, 2.5]

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("TRANSFER_POINTS", "17")
        assert Settings().points == 17
        assert Settings(points=5).points == 5

    def test_dotenv_file(self, tmp_path):
        config = tmp_path / "run.env"
        config.write_text("TRANSFER_ROUNDS=7\nTRANSFER_EIGENSOLVER=jacobi\n")
        settings = Settings(_env_file=config)
        assert (settings.rounds, settings.eigensolver) == (7, "jacobi")

    def test_log_level_is_normalized(self):
        assert Settings(log_level="debug").log_level == "DEBUG"

    def test_settings_are_hashable(self):
        assert hash(Settings(seed=1)) == hash(Settings(seed=1))

    @pytest.mark.parametrize(
        "overrides",
        [
            {"points": 1},
            {"rounds": 0},
            {"lambdas": "0.1,x"},
            {"xs": "1,-2"},
            {"xs": "3,45"},
            {"x_max": 45.0},
            {"cap": 2_000_000},
            {"x_min": -1.0},
            {"lambda_min": 2.0, "lambda_max": 1.0},
            {"lambda_max": math.inf},
            {"rounds": 20, "cap": 10},
            {"eigensolver": "qr"},
            {"log_level": "chatty"},
        ],
    )
    def test_rejects_bad_values(self, overrides):
        with pytest.raises(ValidationError):
            Settings(**overrides)


def test_tolerances_are_ordered():
    assert TOLERANCES.ppt <= TOLERANCES.oracle
    assert TOLERANCES.log_negativity_clamp <= TOLERANCES.trace


def test_threshold_exponent_limit_matches_clamp():
    assert MAX_THRESHOLD_EXPONENT == pytest.approx(39.863, abs=1e-3)
    assert 2.0 ** (-MAX_THRESHOLD_EXPONENT) == pytest.approx(TOLERANCES.log_negativity_clamp)
    assert Settings(xs="0,39.5").x_grid() == [0.0, 39.5]
