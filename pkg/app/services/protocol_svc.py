from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np

from app.core.config import MAX_ROUND_CAP, MAX_THRESHOLD_EXPONENT, TOLERANCES, get_settings
from app.core.exceptions import ContractError, LabelError, RoundCapError
from app.core.linalg import ComplexMatrix, EigenMethod, adjoint, as_matrix, hermitian_eigvals, kron
from app.domain.models import (
    EqualShareResult,
    PairCount,
    ProtocolConfig,
    ProtocolTrace,
    RoundRecord,
    SweepRow,
    XXYYSpec,
)
from app.domain.qstate import (
    DensityOp,
    bell_state,
    density,
    partial_trace,
    require_valid,
    tensor,
    zero_state,
)
from app.services.entanglement_svc import EntanglementService
from app.services.unitary_svc import UnitaryService

logger = logging.getLogger(__name__)

AB = ("A", "B")
CABD = ("C", "A", "B", "D")


def pair_threshold(x: float) -> float:
    """2^-x for a threshold exponent x in [0, MAX_THRESHOLD_EXPONENT]."""
    if not 0.0 <= x <= MAX_THRESHOLD_EXPONENT:
        raise ContractError(f"threshold exponent x={x} must lie in [0, {MAX_THRESHOLD_EXPONENT:.4g}]")
    return float(2.0 ** (-x))


def meets_threshold(e_cd: float, threshold: float) -> bool:
    """A pair counts when it is entangled and within a relative slack of the threshold."""
    return e_cd > 0.0 and e_cd >= threshold * (1.0 - TOLERANCES.threshold_slack)


class ProtocolService:
    """
    Sequential transfer engine.

    Each round couples a fresh |0><0| (x) |0><0| Charu-Debu pair to the shared
    Alice-Bob state through U on (C, A) and the same U on (B, D), then splits
    the four-qubit result into the next Alice-Bob state and the pair's state.
    """

    def __init__(
        self,
        entanglement_service: EntanglementService,
        unitary_service: UnitaryService,
        settings: Any = None,
    ) -> None:
        self.settings = settings or get_settings()
        self.method = self.settings.eigensolver
        self.entanglement = entanglement_service
        self.unitaries = unitary_service

    def _check_gate(self, u: ComplexMatrix) -> ComplexMatrix:
        gate = as_matrix(u)
        if gate.shape != (4, 4):
            raise ContractError(f"interaction unitary must be 4x4, got {gate.shape}")
        check = self.unitaries.check_unitary(gate)
        if not check.ok:
            raise ContractError(f"interaction is not unitary (residual {check.residual:.3e})", report=check)
        return gate

    @staticmethod
    def _as_ab(rho_ab: DensityOp) -> DensityOp:
        if rho_ab.num_qubits != 2:
            raise LabelError(f"the shared state must hold two qubits, got {rho_ab.labels}", labels=rho_ab.labels)
        if rho_ab.labels == AB:
            return rho_ab
        return density(AB, rho_ab.matrix)

    def evolve(self, rho_ab: DensityOp, u: ComplexMatrix) -> DensityOp:
        """rho'_CABD = (U_CA (x) U_BD)(|0><0| (x) rho_AB (x) |0><0|)(U_CA (x) U_BD)^dagger."""
        gate = self._check_gate(u)
        shared = require_valid(self._as_ab(rho_ab), what="rho_AB", method=self.method)
        joint = tensor(tensor(zero_state("C"), shared), zero_state("D"))
        local = kron(gate, gate)
        return density(CABD, local @ joint.matrix @ adjoint(local))

    def step(self, rho_ab: DensityOp, u: ComplexMatrix) -> tuple[DensityOp, DensityOp]:
        """One round: returns (rho_AB^(n+1), rho_CD^(n+1))."""
        evolved = self.evolve(rho_ab, u)
        rho_ab_next = partial_trace(evolved, {"C", "D"})
        rho_cd = partial_trace(evolved, {"A", "B"})
        require_valid(rho_ab_next, what="rho_AB after round", method=self.method)
        require_valid(rho_cd, what="rho_CD after round", method=self.method)
        return rho_ab_next, rho_cd

    def run(self, config: ProtocolConfig, rounds: int) -> ProtocolTrace:
        if rounds < 1:
            raise ContractError("rounds must be positive")
        cap = min(config.max_rounds, self.settings.cap)
        if rounds > cap:
            raise RoundCapError(rounds, cap)

        u = self._check_gate(self.unitaries.build(config.unitary))
        rho_ab = self._as_ab(config.initial_ab)
        records: list[RoundRecord] = []
        for n in range(1, rounds + 1):
            evolved = self.evolve(rho_ab, u)
            rho_ab = partial_trace(evolved, {"C", "D"})
            rho_cd = partial_trace(evolved, {"A", "B"})
            rho_ca = partial_trace(evolved, {"B", "D"})
            rho_bd = partial_trace(evolved, {"C", "A"})
            record = RoundRecord(
                n=n,
                e_cd=self.entanglement.log_negativity(rho_cd, ("D",)).log_negativity,
                e_ab=self.entanglement.log_negativity(rho_ab, ("B",)).log_negativity,
                e_ca=self.entanglement.log_negativity(rho_ca, ("A",)).log_negativity,
                e_bd=self.entanglement.log_negativity(rho_bd, ("D",)).log_negativity,
                rho_ab=rho_ab,
            )
            logger.debug("round %d: e_cd=%.6g e_ab=%.6g", n, record.e_cd, record.e_ab)
            records.append(record)

        logger.info("Protocol run finished: %d rounds, last e_cd=%.6g", rounds, records[-1].e_cd)
        return ProtocolTrace(config=config, records=records)

    def count_pairs(
        self,
        u: ComplexMatrix,
        x: float,
        cap: int | None = None,
        initial_ab: DensityOp | None = None,
    ) -> PairCount:
        """Consecutive rounds from the start with E_CD >= 2^-x; stops at the first failure or at ``cap``.

        Runs on raw matrices; the shared state is re-validated when the loop ends.
        """
        threshold = pair_threshold(x)
        limit = cap if cap is not None else self.settings.cap
        if not 1 <= limit <= MAX_ROUND_CAP:
            raise ContractError(f"round cap must lie in [1, {MAX_ROUND_CAP}], got {limit}")
        gate = self._check_gate(u)
        start = self._as_ab(initial_ab) if initial_ab is not None else bell_state(AB)
        shared = require_valid(start, what="rho_AB", method=self.method)

        local = kron(gate, gate)
        local_dag = adjoint(local)
        rho_ab = np.array(shared.matrix)
        result: PairCount | None = None
        for n in range(1, limit + 1):
            rho_ab, rho_cd = _round_kernel(rho_ab, local, local_dag)
            e_cd = _cd_log_negativity(rho_cd, self.method)
            if not meets_threshold(e_cd, threshold):
                result = PairCount(n=n - 1, saturated=False, margin=e_cd)
                break

        require_valid(density(AB, rho_ab), what="rho_AB after counting", method=self.method)
        if result is None:
            logger.warning("count_pairs saturated at the round cap %d (x=%s)", limit, x)
            result = PairCount(n=limit, saturated=True, margin=0.0)
        return result

    def sweep(self, config: ProtocolConfig, lambda_grid: Sequence[float], rounds: int) -> list[SweepRow]:
        """One XX+YY run per lambda, rows ordered by grid position then round."""
        rows: list[SweepRow] = []
        for lambda_ in lambda_grid:
            trace = self.run(config.model_copy(update={"unitary": XXYYSpec.of(lambda_)}), rounds)
            rows.extend(
                SweepRow(lambda_=lambda_, n=record.n, e_cd=record.e_cd, e_ab=record.e_ab)
                for record in trace.records
            )
        return rows

    def max_min_transfer(
        self,
        n_pairs: int,
        lambda_grid: Sequence[float],
        config: ProtocolConfig | None = None,
    ) -> EqualShareResult:
        """Grid lambda maximizing the smallest E_CD among the first ``n_pairs`` pairs."""
        if not lambda_grid:
            raise ContractError("lambda grid is empty")
        base = config or ProtocolConfig(unitary=XXYYSpec.of(0.0), max_rounds=max(n_pairs, 1))
        scored: list[tuple[float, float]] = []
        best: tuple[float, float, list[float]] | None = None
        for lambda_ in lambda_grid:
            trace = self.run(base.model_copy(update={"unitary": XXYYSpec.of(lambda_)}), n_pairs)
            per_pair = trace.e_cd()
            worst = min(per_pair)
            scored.append((lambda_, worst))
            if best is None or worst > best[1]:
                best = (lambda_, worst, per_pair)

        assert best is not None
        logger.info("Equal-share best lambda=%.6g gives every one of %d pairs %.6g ebits", best[0], n_pairs, best[1])
        return EqualShareResult(
            n_pairs=n_pairs, best_lambda=best[0], min_e_cd=best[1], per_pair=best[2], grid=scored
        )


# Rows of the (C, A, B, D) basis, index 8c + 4a + 2b + d, with c = d = 0.
_FRESH_PAIR_ROWS = np.array([0, 2, 4, 6])


def _round_kernel(
    rho_ab: ComplexMatrix, local: ComplexMatrix, local_dag: ComplexMatrix
) -> tuple[ComplexMatrix, ComplexMatrix]:
    """Matrix-only round: returns (rho_AB', rho_CD)."""
    joint = np.zeros((16, 16), dtype=np.complex128)
    joint[np.ix_(_FRESH_PAIR_ROWS, _FRESH_PAIR_ROWS)] = rho_ab
    evolved = (local @ joint @ local_dag).reshape((2,) * 8)
    rho_ab_next = np.einsum("iabjiABj->abAB", evolved).reshape(4, 4)
    rho_cd = np.einsum("cijdCijD->cdCD", evolved).reshape(4, 4)
    return rho_ab_next, rho_cd


def _cd_log_negativity(rho_cd: ComplexMatrix, method: EigenMethod) -> float:
    transposed = rho_cd.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    trace_norm = float(np.sum(np.abs(hermitian_eigvals(transposed, method=method))))
    if trace_norm <= 1.0 + TOLERANCES.log_negativity_clamp:
        return 0.0
    return math.log2(trace_norm)
