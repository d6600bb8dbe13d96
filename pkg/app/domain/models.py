from __future__ import annotations

import math
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import (
    DEFAULT_ROUND_CAP,
    MAX_ROUND_CAP,
    MAX_THRESHOLD_EXPONENT,
    OPTIMIZER_ROUND_CAP,
    PAULI_PARAM_COUNT,
    THETA_BOX,
    TOLERANCES,
)
from app.domain.qstate import DensityOp, bell_state


class XXYYSpec(BaseModel):
    """Interaction strength of exp(-i*lambda*(XX + YY)); lambda = gamma * t."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    kind: Literal["xxyy"] = "xxyy"
    lambda_: float = Field(alias="lambda")

    @field_validator("lambda_")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("lambda must be finite")
        return value

    @classmethod
    def of(cls, value: float) -> "XXYYSpec":
        return cls.model_validate({"lambda": value})

    def canonical(self) -> float:
        """lambda reduced to [0, pi/2); the gate differs there only by the local Z(x)Z."""
        return self.lambda_ % (math.pi / 2)


class PauliParamSpec(BaseModel):
    """Coefficients of the 15 traceless two-qubit Pauli generators."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["pauli"] = "pauli"
    theta: tuple[float, ...]

    @field_validator("theta")
    @classmethod
    def _in_box(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if len(value) != PAULI_PARAM_COUNT:
            raise ValueError(f"theta needs {PAULI_PARAM_COUNT} coefficients, got {len(value)}")
        for coefficient in value:
            if not math.isfinite(coefficient):
                raise ValueError("theta must be finite")
            if abs(coefficient) > THETA_BOX + 1e-12:
                raise ValueError(f"theta coefficient {coefficient} outside [-pi, pi]")
        return value


UnitarySpec = XXYYSpec | PauliParamSpec


class UnitaryCheck(BaseModel):
    ok: bool
    residual: float


class EntanglementValue(BaseModel):
    """Log-negativity in ebits plus the smallest partial-transpose eigenvalue."""

    log_negativity: float
    min_pt_eigenvalue: float


class ProtocolConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    initial_ab: DensityOp = Field(default_factory=bell_state)
    unitary: UnitarySpec = Field(discriminator="kind")
    max_rounds: int = Field(default=DEFAULT_ROUND_CAP, ge=1, le=MAX_ROUND_CAP)
    threshold_exponent: float = Field(default=0.0, ge=0.0, le=MAX_THRESHOLD_EXPONENT)

    @property
    def threshold(self) -> float:
        return float(2.0 ** (-self.threshold_exponent))


class RoundRecord(BaseModel):
    """Entanglement bookkeeping after round n."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int
    e_cd: float
    e_ab: float
    e_ca: float
    e_bd: float
    rho_ab: DensityOp


class ProtocolTrace(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: ProtocolConfig
    records: list[RoundRecord]

    def e_cd(self) -> list[float]:
        return [record.e_cd for record in self.records]

    def e_ab(self) -> list[float]:
        return [record.e_ab for record in self.records]


class PairCount(BaseModel):
    """Consecutive rounds meeting the threshold; ``margin`` is E_CD of the first failing round."""

    n: int
    saturated: bool = False
    margin: float = 0.0


class SweepRow(BaseModel):
    lambda_: float
    n: int
    e_cd: float
    e_ab: float


class EqualShareResult(BaseModel):
    n_pairs: int
    best_lambda: float
    min_e_cd: float
    per_pair: list[float]
    grid: list[tuple[float, float]] = Field(default_factory=list)


class FamilyParams(BaseModel):
    """p|phi+><phi+| + diag(b1, b2, b3, b4) with b_i = a_i * (1 - p)."""

    model_config = ConfigDict(frozen=True)

    p: float
    b1: float
    b2: float
    b3: float
    b4: float

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def x(self) -> float:
        """X = a4*q + p/2; its sign is preserved by the recurrence."""
        return self.b4 + self.p / 2

    @property
    def b(self) -> tuple[float, float, float, float]:
        return (self.b1, self.b2, self.b3, self.b4)

    @property
    def a(self) -> tuple[float, float, float, float] | None:
        if self.q <= TOLERANCES.family_floor:
            return None
        return (self.b1 / self.q, self.b2 / self.q, self.b3 / self.q, self.b4 / self.q)

    @classmethod
    def bell(cls) -> "FamilyParams":
        return cls(p=1.0, b1=0.0, b2=0.0, b3=0.0, b4=0.0)

    @classmethod
    def from_a(cls, p: float, a: tuple[float, float, float, float]) -> "FamilyParams":
        q = 1.0 - p
        return cls(p=p, b1=a[0] * q, b2=a[1] * q, b3=a[2] * q, b4=a[3] * q)


class RoundCheck(BaseModel):
    """One verified round: matrix-level and closed-path values for rho_CD^(n)."""

    n: int
    e_cd: float
    predicted_e_cd: float
    min_pt_eigenvalue: float
    margin: float | None = None


class TheoremCertificate(BaseModel):
    t: float
    rounds_checked: int
    rounds: list[RoundCheck]

    @property
    def margins(self) -> list[float]:
        return [check.margin for check in self.rounds if check.margin is not None]


class TheoremFailure(BaseModel):
    t: float
    failed_round: int
    reason: str
    e_cd: float = 0.0
    margin: float | None = None
    rounds: list[RoundCheck] = Field(default_factory=list)


class RemarkConditions(BaseModel):
    cond_a4: bool
    cond_sin: bool


class ObjectiveValue(BaseModel):
    """Lexicographic objective: more pairs first, then a larger first-failure E_CD."""

    model_config = ConfigDict(frozen=True)

    n: int
    margin: float

    def key(self) -> tuple[float, float]:
        """Minimization key for the simplex search."""
        return (-float(self.n), -self.margin)


class NelderMeadOptions(BaseModel):
    step: float = 0.5
    max_evals: int = Field(default=2000, ge=1)
    diameter_tol: float = TOLERANCES.simplex_diameter
    lower: float = -THETA_BOX
    upper: float = THETA_BOX
    alpha: float = 1.0
    gamma: float = 2.0
    beta: float = 0.5
    delta: float = 0.5


class NelderMeadResult(BaseModel):
    x: list[float]
    value: tuple[float, ...]
    evals: int
    converged: bool
    budget_exhausted: bool


class OptimizeRequest(BaseModel):
    x: float = Field(ge=0.0, le=MAX_THRESHOLD_EXPONENT)
    restarts: int = Field(default=4, ge=1)
    max_evals: int = Field(default=2000, ge=1)
    seed: int = 2024
    round_cap: int = Field(default=OPTIMIZER_ROUND_CAP, ge=1, le=MAX_ROUND_CAP)
    final_cap: int = Field(default=DEFAULT_ROUND_CAP, ge=1, le=MAX_ROUND_CAP)
    warm_start_xxyy: bool = True
    grid_points: int = Field(default=200, ge=2)


class RestartLog(BaseModel):
    index: int
    start: list[float]
    best_theta: list[float]
    n: int
    margin: float
    evals: int
    converged: bool
    budget_exhausted: bool


class OptimizeResult(BaseModel):
    x: float
    best_theta: list[float]
    best_n: int
    tie_margin: float
    saturated: bool
    eval_count: int
    restarts: list[RestartLog]


class OutputDigest(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    command: str
    config: dict[str, Any]
    seed: int
    version: str
    wall_time: float
    outputs: list[OutputDigest] = Field(default_factory=list)
