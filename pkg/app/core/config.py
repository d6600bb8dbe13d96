from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

from pydantic import ValidationInfo, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


@dataclass(frozen=True)
class Tolerances:
    """Every numeric tolerance used by the simulator, in one place."""

    hermitian: float = 1e-10
    trace: float = 1e-10
    eigen_floor: float = 1e-10
    unitary: float = 1e-10
    log_negativity_clamp: float = 1e-12
    ppt: float = 1e-12
    jacobi_offdiag: float = 1e-14
    jacobi_max_sweeps: int = 100
    simplex_diameter: float = 1e-6
    family_normalization: float = 1e-12
    family_floor: float = 1e-12
    threshold_slack: float = 1e-12
    oracle: float = 1e-9
    closed_form_state: float = 1e-12


TOLERANCES = Tolerances()

MAX_DIM: int = 16
QUBIT_DIM: int = 2
PAULI_PARAM_COUNT: int = 15
DEFAULT_ROUND_CAP: int = 10_000
MAX_ROUND_CAP: int = 1_000_000
OPTIMIZER_ROUND_CAP: int = 500
OBJECTIVE_CACHE_SIZE: int = 4096
THETA_BOX: float = math.pi
FIND_T_UPPER: float = math.pi / 8
# 2^-x below the log-negativity clamp cannot be told apart from zero
MAX_THRESHOLD_EXPONENT: float = -math.log2(TOLERANCES.log_negativity_clamp)


class Settings(BaseSettings):
    """Run configuration: CLI flags > TRANSFER_* environment > config file > defaults."""

    model_config = SettingsConfigDict(env_prefix="TRANSFER_", extra="ignore", frozen=True)

    PROJECT_NAME: str = "Entanglement Relay"

    lambda_min: float = 0.0
    lambda_max: float = math.pi / 2
    points: int = 201
    lambdas: str = "0.05,0.1,0.2"
    rounds: int = 4

    xs: str | None = None
    x_min: float = 1.0
    x_max: float = 10.0

    restarts: int = 4
    max_evals: int = 2000
    seed: int = 2024
    cap: int = DEFAULT_ROUND_CAP
    optimizer_cap: int = OPTIMIZER_ROUND_CAP
    grid_points: int = 200
    warm_start_xxyy: bool = True

    n_target: int = 10
    t: float | None = None

    out: str = "results/run"
    eigensolver: Literal["jacobi", "lapack"] = "lapack"
    log_level: str = "INFO"

    @field_validator("points")
    @classmethod
    def _at_least_two_points(cls, value: int) -> int:
        if value < 2:
            raise ValueError("points must be at least 2")
        return value

    @field_validator("rounds", "restarts", "max_evals", "cap", "optimizer_cap", "grid_points", "n_target")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be a positive integer")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value!r}")
        return level

    @field_validator("lambdas", "xs")
    @classmethod
    def _parsable_grid(cls, value: str | None, info: ValidationInfo) -> str | None:
        if value is not None:
            values = parse_grid(value)
            if info.field_name == "xs":
                _check_threshold_exponents(values)
        return value

    @field_validator("lambda_min", "lambda_max", "x_min", "x_max")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @model_validator(mode="after")
    def _ordered_ranges(self) -> "Settings":
        if self.lambda_max < self.lambda_min:
            raise ValueError("lambda_max must not be below lambda_min")
        if self.x_max < self.x_min:
            raise ValueError("x_max must not be below x_min")
        _check_threshold_exponents([self.x_min, self.x_max])
        if self.cap > MAX_ROUND_CAP:
            raise ValueError(f"cap={self.cap} exceeds the hard ceiling {MAX_ROUND_CAP}")
        if self.rounds > self.cap:
            raise ValueError(f"rounds={self.rounds} exceeds the round cap {self.cap}")
        return self

    def lambda_grid(self) -> list[float]:
        return parse_grid(self.lambdas)

    def x_grid(self) -> list[float]:
        if self.xs:
            values = parse_grid(self.xs)
        else:
            count = int(math.floor(self.x_max - self.x_min + 1e-9)) + 1
            values = [self.x_min + step for step in range(count)]
        return values


def _check_threshold_exponents(values: list[float]) -> None:
    for value in values:
        if value < 0:
            raise ValueError("x values must be nonnegative")
        if value > MAX_THRESHOLD_EXPONENT:
            raise ValueError(f"x={value} is beyond the resolvable limit {MAX_THRESHOLD_EXPONENT:.4g}")


def parse_grid(raw: str) -> list[float]:
    """Parse a comma-separated list of numbers; '.' is the only decimal separator."""
    values: list[float] = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        value = float(token)
        if not math.isfinite(value):
            raise ValueError(f"grid value {token!r} is not finite")
        values.append(value)
    if not values:
        raise ValueError("grid is empty")
    return values


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
