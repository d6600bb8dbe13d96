"""Compare simulated transfer against the analytic closed forms for the first two rounds."""

from __future__ import annotations

import math
import sys

import numpy as np

from app.core.config import TOLERANCES, Settings
from app.domain.models import ProtocolConfig, XXYYSpec
from app.domain.qstate import bell_state
from app.services.entanglement_svc import EntanglementService
from app.services.protocol_svc import ProtocolService
from app.services.unitary_svc import UnitaryService
from app.utils import get_logger

LOGGER = get_logger(__name__)

ORACLE_TOL = TOLERANCES.oracle
STATE_TOL = TOLERANCES.closed_form_state


def first_round_e_cd(lambda_: float) -> float:
    return math.log2((11 - 4 * math.cos(4 * lambda_) + math.cos(8 * lambda_)) / 8)


def second_round_e_cd(lambda_: float) -> float:
    return math.log2((131 - 4 * math.cos(8 * lambda_) + math.cos(16 * lambda_)) / 128)


def first_round_ab(lambda_: float) -> np.ndarray:  # type: ignore[type-arg]
    s2, c2 = math.sin(2 * lambda_), math.cos(2 * lambda_)
    matrix = np.diag([(1 + s2**4) / 2, math.sin(4 * lambda_) ** 2 / 8, math.sin(4 * lambda_) ** 2 / 8, c2**4 / 2])
    matrix[0, 3] = matrix[3, 0] = c2**2 / 2
    return matrix.astype(np.complex128)


def run_checks(points: int = 1000, settings: Settings | None = None) -> list[str]:
    settings = settings or Settings()
    unitaries = UnitaryService(settings)
    protocol = ProtocolService(EntanglementService(settings), unitaries, settings)
    errors: list[str] = []

    worst_first = worst_second = worst_state = 0.0
    worst_sum = -math.inf
    for lambda_ in np.linspace(0.0, math.pi / 2, points):
        lambda_ = float(lambda_)
        trace = protocol.run(ProtocolConfig(unitary=XXYYSpec.of(lambda_)), rounds=2)
        first, second = trace.records
        worst_first = max(worst_first, abs(first.e_cd - first_round_e_cd(lambda_)))
        worst_second = max(worst_second, abs(second.e_cd - second_round_e_cd(lambda_)))
        worst_state = max(worst_state, float(np.max(np.abs(first.rho_ab.matrix - first_round_ab(lambda_)))))
        worst_sum = max(worst_sum, first.e_cd + first.e_ab)

    if worst_first >= ORACLE_TOL:
        errors.append(f"round-1 E_CD deviates from the closed form by {worst_first:.3e}")
    if worst_second >= ORACLE_TOL:
        errors.append(f"round-2 E_CD deviates from the closed form by {worst_second:.3e}")
    if worst_state >= STATE_TOL:
        errors.append(f"round-1 Alice-Bob state deviates from the closed form by {worst_state:.3e}")
    if worst_sum > 1 + ORACLE_TOL:
        errors.append(f"E_AB + E_CD after one round reaches {worst_sum:.12f} > 1")

    full_ab, full_cd = protocol.step(bell_state(), unitaries.build_xxyy(XXYYSpec.of(math.pi / 4)))
    measure = protocol.entanglement
    if abs(measure.log_negativity(full_cd).log_negativity - 1.0) >= ORACLE_TOL:
        errors.append("lambda = pi/4 does not transfer a full ebit")
    if measure.log_negativity(full_ab).log_negativity >= ORACLE_TOL:
        errors.append("lambda = pi/4 leaves entanglement with Alice and Bob")
    return errors


def main() -> int:
    errors = run_checks()
    if errors:
        LOGGER.error("Closed-form check failed:")
        for err in errors:
            LOGGER.error("- %s", err)
        return 1
    LOGGER.info("Closed-form check passed.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
