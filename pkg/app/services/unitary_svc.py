from __future__ import annotations

import logging
from typing import Any

import numpy as np

from app.core.config import TOLERANCES, get_settings
from app.core.linalg import ComplexMatrix, expm_i_hermitian, identity, kron, unitarity_residual
from app.domain.models import PauliParamSpec, UnitaryCheck, UnitarySpec, XXYYSpec

logger = logging.getLogger(__name__)

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

_SINGLE = (("I", PAULI_I), ("X", PAULI_X), ("Y", PAULI_Y), ("Z", PAULI_Z))

# (I, X, Y, Z) (x) (I, X, Y, Z), row-major, I(x)I dropped. Pinned by tests.
PAULI_GENERATOR_NAMES: tuple[str, ...] = tuple(
    left + right for left, _ in _SINGLE for right, _ in _SINGLE if left + right != "II"
)
PAULI_GENERATORS: tuple[ComplexMatrix, ...] = tuple(
    np.kron(left_m, right_m) for left, left_m in _SINGLE for right, right_m in _SINGLE if left + right != "II"
)
XX_INDEX = PAULI_GENERATOR_NAMES.index("XX")
YY_INDEX = PAULI_GENERATOR_NAMES.index("YY")

XXYY_HAMILTONIAN: ComplexMatrix = kron(PAULI_X, PAULI_X) + kron(PAULI_Y, PAULI_Y)


class UnitaryService:
    """Builds the interaction unitaries used by both local couplings."""

    def __init__(self, settings: Any = None) -> None:
        self.settings = settings or get_settings()
        self.method = self.settings.eigensolver

    def build_xxyy(self, spec: XXYYSpec) -> ComplexMatrix:
        """exp(-i*lambda*(XX + YY)); identity on span{|00>, |11>}."""
        return expm_i_hermitian(XXYY_HAMILTONIAN, spec.lambda_, method=self.method)

    def build_pauli_param(self, spec: PauliParamSpec) -> ComplexMatrix:
        """exp(-i * sum_k theta_k P_k) over the pinned generator ordering."""
        generator = np.zeros((4, 4), dtype=np.complex128)
        for coefficient, pauli in zip(spec.theta, PAULI_GENERATORS):
            generator += coefficient * pauli
        return expm_i_hermitian(generator, 1.0, method=self.method)

    def build(self, spec: UnitarySpec) -> ComplexMatrix:
        if isinstance(spec, XXYYSpec):
            return self.build_xxyy(spec)
        return self.build_pauli_param(spec)

    def check_unitary(self, u: ComplexMatrix, tol: float = TOLERANCES.unitary) -> UnitaryCheck:
        residual = unitarity_residual(u)
        return UnitaryCheck(ok=residual < tol, residual=residual)

    @staticmethod
    def xxyy_theta(lambda_: float) -> tuple[float, ...]:
        """Embed the XX+YY gate in the 15-parameter space."""
        theta = [0.0] * len(PAULI_GENERATORS)
        theta[XX_INDEX] = lambda_
        theta[YY_INDEX] = lambda_
        return tuple(theta)

    @staticmethod
    def identity_gate() -> ComplexMatrix:
        return identity(4)
