"""Labeled multi-qubit density operators.

Label order maps to tensor-factor order, most significant bit first: the
first label is the leftmost Kronecker factor.
"""

from __future__ import annotations

import string
from collections.abc import Iterable

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import QUBIT_DIM, TOLERANCES
from app.core.exceptions import ContractError, LabelError
from app.core.linalg import (
    ComplexMatrix,
    EigenMethod,
    as_matrix,
    hermiticity_residual,
    hermitian_eigvals,
    kron,
)


class Violation(BaseModel):
    constraint: str
    magnitude: float


class ValidationReport(BaseModel):
    """Outcome of a physical validity check; ``ok`` is true when no constraint is violated."""

    ok: bool
    violations: list[Violation] = Field(default_factory=list)

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{item.constraint} violated by {item.magnitude:.3e}" for item in self.violations)


class DensityOp(BaseModel):
    """A density matrix over named qubits.

    Construction only checks structure (labels and dimension). Physical
    validity is reported by :func:`validate` and enforced by operations that
    require it.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: tuple[str, ...]
    matrix: np.ndarray  # type: ignore[type-arg]

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data: dict[str, object]) -> dict[str, object]:
        labels = tuple(str(label) for label in data["labels"])  # type: ignore[attr-defined]
        matrix = as_matrix(data["matrix"]).copy()  # type: ignore[arg-type]
        matrix.setflags(write=False)
        return {"labels": labels, "matrix": matrix}

    @model_validator(mode="after")
    def _check_structure(self) -> "DensityOp":
        if not self.labels:
            raise LabelError("a state needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise LabelError(f"duplicate labels {self.labels}", labels=self.labels)
        expected = QUBIT_DIM ** len(self.labels)
        if self.matrix.shape[0] != expected:
            raise ContractError(
                f"matrix dimension {self.matrix.shape[0]} does not match {len(self.labels)} qubit labels"
            )
        return self

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def density(labels: Iterable[str], matrix: npt.ArrayLike) -> DensityOp:
    return DensityOp(labels=tuple(labels), matrix=matrix)


def ket_projector(labels: Iterable[str], amplitudes: npt.ArrayLike) -> DensityOp:
    """|psi><psi| from a (not necessarily normalized) amplitude vector."""
    vector = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    vector = vector / np.linalg.norm(vector)
    return density(labels, np.outer(vector, vector.conj()))


def zero_state(label: str) -> DensityOp:
    return ket_projector((label,), [1.0, 0.0])


def bell_state(labels: tuple[str, str] = ("A", "B")) -> DensityOp:
    """|phi+><phi+| with |phi+> = (|00> + |11>)/sqrt(2)."""
    return ket_projector(labels, [1.0, 0.0, 0.0, 1.0])


def maximally_mixed(labels: Iterable[str]) -> DensityOp:
    names = tuple(labels)
    dim = QUBIT_DIM ** len(names)
    return density(names, np.eye(dim) / dim)


def _positions(s: DensityOp, names: Iterable[str]) -> list[int]:
    wanted = set(names)
    unknown = wanted.difference(s.labels)
    if unknown:
        raise LabelError(f"unknown labels {sorted(unknown)} for state on {s.labels}", labels=s.labels)
    return [index for index, label in enumerate(s.labels) if label in wanted]


def tensor(a: DensityOp, b: DensityOp) -> DensityOp:
    """a (x) b with labels of a followed by labels of b."""
    collision = set(a.labels).intersection(b.labels)
    if collision:
        raise LabelError(f"labels {sorted(collision)} appear on both factors", labels=a.labels + b.labels)
    return density(a.labels + b.labels, kron(a.matrix, b.matrix))


def partial_trace(s: DensityOp, drop: Iterable[str]) -> DensityOp:
    """Reduced state on the remaining labels, in their original order."""
    dropped = set(_positions(s, drop))
    if not dropped:
        return s
    if len(dropped) == s.num_qubits:
        raise LabelError("cannot trace out every subsystem", labels=s.labels)

    k = s.num_qubits
    letters = string.ascii_letters
    rows = [letters[i] for i in range(k)]
    cols = [letters[i] if i in dropped else letters[k + i] for i in range(k)]
    keep = [i for i in range(k) if i not in dropped]
    spec = "".join(rows + cols) + "->" + "".join([rows[i] for i in keep] + [cols[i] for i in keep])

    reduced = np.einsum(spec, s.matrix.reshape((QUBIT_DIM,) * (2 * k)))
    dim = QUBIT_DIM ** len(keep)
    return density([s.labels[i] for i in keep], reduced.reshape(dim, dim))


def partial_transpose(s: DensityOp, part: Iterable[str]) -> ComplexMatrix:
    """Transpose on the listed factors. Returns a raw matrix since it need not be PSD."""
    names = tuple(part)
    if not names:
        raise LabelError("partial transpose needs at least one label", labels=s.labels)
    positions = _positions(s, names)
    k = s.num_qubits
    axes = list(range(2 * k))
    for index in positions:
        axes[index], axes[k + index] = axes[k + index], axes[index]
    transposed = np.transpose(s.matrix.reshape((QUBIT_DIM,) * (2 * k)), axes)
    return np.ascontiguousarray(transposed.reshape(s.dim, s.dim))


def validate(s: DensityOp, tol: float = TOLERANCES.trace, method: EigenMethod = "lapack") -> ValidationReport:
    """Check Hermiticity, unit trace and positive semidefiniteness within ``tol``."""
    violations: list[Violation] = []

    herm = hermiticity_residual(s.matrix)
    if herm >= tol:
        violations.append(Violation(constraint="hermiticity", magnitude=herm))

    trace_gap = abs(s.trace() - 1.0)
    if trace_gap >= tol:
        violations.append(Violation(constraint="unit_trace", magnitude=trace_gap))

    if herm < tol:
        min_eig = float(hermitian_eigvals(s.matrix, tol=tol, method=method)[0])
        if min_eig <= -tol:
            violations.append(Violation(constraint="positive_semidefinite", magnitude=-min_eig))

    return ValidationReport(ok=not violations, violations=violations)


def require_valid(
    s: DensityOp,
    tol: float = TOLERANCES.trace,
    what: str = "state",
    method: EigenMethod = "lapack",
) -> DensityOp:
    report = validate(s, tol, method)
    if not report.ok:
        raise ContractError(f"{what} is not a valid density operator: {report.describe()}", report=report)
    return s
