"""Parameterized two-qubit family and its recurrence under the XX+YY protocol.

States are p|phi+><phi+| + diag(b1, b2, b3, b4), stored in b-form
(b_i = a_i * (1 - p)) so that p = 1 needs no division. Under one round with
gate strength t, with c = cos^2(2t), s = sin^2(2t) and X = b4 + p/2:

    p'  = p * c
    X'  = X * c^2
    b2' = (b2 + X * s) * c
    b3' = (b3 + X * s) * c
    b1' = 1 - p' - b2' - b3' - b4'

The next Charu-Debu pair is an X-state with populations
(1 - rest, (b2 + X c) s, (b3 + X c) s, X s^2) and coherence -p s / 2.
"""

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np

from app.core.config import FIND_T_UPPER, TOLERANCES, get_settings
from app.core.exceptions import FamilyInvariantError, UndefinedQuantityError
from app.core.linalg import max_abs
from app.domain.models import (
    FamilyParams,
    PairCount,
    RemarkConditions,
    RoundCheck,
    TheoremCertificate,
    TheoremFailure,
    XXYYSpec,
)
from app.domain.qstate import DensityOp, bell_state, density, validate
from app.services.entanglement_svc import EntanglementService
from app.services.protocol_svc import ProtocolService, meets_threshold, pair_threshold
from app.services.unitary_svc import UnitaryService

logger = logging.getLogger(__name__)

_PHI_PLUS = np.array(
    [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]],
    dtype=np.complex128,
)

FIND_T_GRID_RATIO = 0.8
FIND_T_GRID_POINTS = 60
FIND_T_BISECTIONS = 50


def _cos_sin_sq(t: float) -> tuple[float, float]:
    return math.cos(2 * t) ** 2, math.sin(2 * t) ** 2


class FamilyService:
    def __init__(
        self,
        protocol_service: ProtocolService,
        entanglement_service: EntanglementService,
        unitary_service: UnitaryService,
        settings: Any = None,
    ) -> None:
        self.settings = settings or get_settings()
        self.protocol = protocol_service
        self.entanglement = entanglement_service
        self.unitaries = unitary_service

    # -- state family -----------------------------------------------------

    def check_params(self, f: FamilyParams) -> FamilyParams:
        floor = TOLERANCES.family_floor
        if not all(math.isfinite(value) for value in (f.p, *f.b)):
            raise FamilyInvariantError("family parameters must be finite")
        if f.p < -floor or f.p > 1 + floor:
            raise FamilyInvariantError(f"p={f.p} outside [0, 1]")
        gap = abs(sum(f.b) - f.q)
        if gap > TOLERANCES.family_normalization:
            raise FamilyInvariantError(f"b1+b2+b3+b4 differs from 1-p by {gap:.3e}")
        if f.b2 < -floor or f.b3 < -floor:
            raise FamilyInvariantError(f"b2={f.b2}, b3={f.b3} must be nonnegative")
        report = validate(density(("A", "B"), self._matrix(f)), method=self.settings.eigensolver)
        if not report.ok:
            raise FamilyInvariantError(f"family state is not physical: {report.describe()}", report=report)
        return f

    @staticmethod
    def _matrix(f: FamilyParams) -> np.ndarray:  # type: ignore[type-arg]
        return f.p * _PHI_PLUS + np.diag(np.array(f.b, dtype=np.complex128))

    def family_to_density(self, f: FamilyParams) -> DensityOp:
        self.check_params(f)
        return density(("A", "B"), self._matrix(f))

    def recurrence_step(self, f: FamilyParams, t: float) -> FamilyParams:
        c, s = _cos_sin_sq(t)
        x = f.x
        p_next = f.p * c
        x_next = x * c * c
        b2 = (f.b2 + x * s) * c
        b3 = (f.b3 + x * s) * c
        b4 = x_next - p_next / 2
        b1 = (1.0 - p_next) - b2 - b3 - b4
        return FamilyParams(p=p_next, b1=b1, b2=b2, b3=b3, b4=b4)

    def is_family_entangled(self, f: FamilyParams) -> bool:
        """PPT inequality b2*b3 < (p/2)^2; the Bell point p = 1 is entangled."""
        if f.p >= 1.0 - TOLERANCES.family_floor:
            return True
        return f.b2 * f.b3 < (f.p / 2) ** 2

    # -- derived quantities -----------------------------------------------

    @staticmethod
    def _require_defined(quantity: str, f: FamilyParams, t: float) -> tuple[float, float]:
        if f.q <= TOLERANCES.family_floor:
            raise UndefinedQuantityError(quantity, "p = 1 leaves a_i undefined")
        if abs(math.cos(2 * t)) <= TOLERANCES.family_floor:
            raise UndefinedQuantityError(quantity, "cos(2t) = 0")
        return _cos_sin_sq(t)

    def chi(self, f: FamilyParams, t: float) -> float:
        c, _ = self._require_defined("chi", f, t)
        return (2 * f.b4 + f.p) / f.q * c

    def xi(self, f: FamilyParams, t: float) -> float:
        c, s = self._require_defined("xi", f, t)
        return (2 * f.b4 + f.p) / f.q * (1.0 - c * s)

    def theorem_condition(self, f: FamilyParams, t: float) -> float:
        """[2a2 + xi][2a3 + xi] - (p/q)^2; negative iff the pair two rounds ahead is entangled."""
        xi = self.xi(f, t)
        q = f.q
        return (2 * f.b2 / q + xi) * (2 * f.b3 / q + xi) - (f.p / q) ** 2

    def remark_conditions(self, f: FamilyParams, t: float) -> RemarkConditions:
        """Conditions for the X < 0 branch: a4 < p/(2(p-1)) and sin^2(2t)|X| < b2 + b3."""
        _, s = self._require_defined("remark_conditions", f, t)
        a4 = f.b4 / f.q
        return RemarkConditions(
            cond_a4=a4 < f.p / (2 * (f.p - 1)),
            cond_sin=s * abs(f.x) < f.b2 + f.b3,
        )

    # -- closed path for the next pair --------------------------------------

    def _cd_entries(self, f: FamilyParams, t: float) -> tuple[float, float, float, float, float]:
        c, s = _cos_sin_sq(t)
        x = f.x
        p11 = x * s * s
        p01 = (f.b2 + x * c) * s
        p10 = (f.b3 + x * c) * s
        p00 = 1.0 - p01 - p10 - p11
        coherence = -f.p * s / 2
        return p00, p01, p10, p11, coherence

    def cd_density(self, f: FamilyParams, t: float) -> DensityOp:
        """rho_CD produced by one round on the family state ``f``."""
        p00, p01, p10, p11, coherence = self._cd_entries(f, t)
        matrix = np.diag(np.array([p00, p01, p10, p11], dtype=np.complex128))
        matrix[0, 3] = matrix[3, 0] = coherence
        return density(("C", "D"), matrix)

    def predict_cd_min_eigenvalue(self, f: FamilyParams, t: float) -> float:
        _, p01, p10, _, coherence = self._cd_entries(f, t)
        return (p01 + p10) / 2 - math.sqrt(((p01 - p10) / 2) ** 2 + coherence**2)

    def predict_e_cd(self, f: FamilyParams, t: float) -> float:
        trace_norm = 1.0 + 2.0 * max(0.0, -self.predict_cd_min_eigenvalue(f, t))
        if trace_norm <= 1.0 + TOLERANCES.log_negativity_clamp:
            return 0.0
        return math.log2(trace_norm)

    @staticmethod
    def closed_form_e_cd(n: int, t: float) -> float:
        """E_CD of pair n from the Bell state: log2(1 + sin^4(2t) cos^(4(n-1))(2t))."""
        if n < 1:
            raise ValueError("pair index starts at 1")
        c, s = _cos_sin_sq(t)
        return math.log2(1.0 + s * s * c ** (2 * (n - 1)))

    def predict_count(self, t: float, x: float, cap: int | None = None) -> PairCount:
        """Pairs above 2^-x for the fixed XX+YY gate, iterating the recurrence."""
        limit = cap if cap is not None else self.settings.cap
        threshold = pair_threshold(x)
        f = FamilyParams.bell()
        for n in range(1, limit + 1):
            e_cd = self.predict_e_cd(f, t)
            if not meets_threshold(e_cd, threshold):
                return PairCount(n=n - 1, saturated=False, margin=e_cd)
            f = self.recurrence_step(f, t)
        return PairCount(n=limit, saturated=True, margin=0.0)

    # -- feasibility verifier ---------------------------------------------

    def verify_theorem(self, n_target: int, t: float) -> TheoremCertificate | TheoremFailure:
        """Check that each of the first ``n_target`` pairs ends up entangled at strength ``t``.

        Every round is run through the full simulation; the recurrence, the
        closed-path E_CD and the two-rounds-ahead inequality are compared with it.
        """
        if n_target < 1:
            raise ValueError("n_target must be positive")
        if not 0.0 < t < math.pi / 4:
            return TheoremFailure(t=t, failed_round=1, reason="t must lie in (0, pi/4)")

        u = self.unitaries.build_xxyy(XXYYSpec.of(t))
        history = [FamilyParams.bell()]
        rho_ab = bell_state()
        checks: list[RoundCheck] = []

        for k in range(1, n_target + 1):
            f = history[-1]
            rho_ab, rho_cd = self.protocol.step(rho_ab, u)
            measured = self.entanglement.log_negativity(rho_cd, ("D",))
            predicted = self.predict_e_cd(f, t)

            f_next = self.recurrence_step(f, t)
            history.append(f_next)

            margin: float | None = None
            # the inequality on the state two rounds back decides this pair
            if k >= 2 and history[k - 2].q > TOLERANCES.family_floor:
                margin = self.theorem_condition(history[k - 2], t)

            check = RoundCheck(
                n=k,
                e_cd=measured.log_negativity,
                predicted_e_cd=predicted,
                min_pt_eigenvalue=measured.min_pt_eigenvalue,
                margin=margin,
            )
            checks.append(check)

            reason = None
            drift = max_abs(self._matrix(f_next) - rho_ab.matrix)
            if drift > TOLERANCES.oracle:
                reason = f"family recurrence drifted from the simulation by {drift:.3e}"
            elif abs(predicted - measured.log_negativity) > TOLERANCES.oracle:
                reason = "closed-path E_CD disagrees with the simulation"
            elif not self.entanglement.is_ppt_entangled(rho_cd, ("D",)):
                reason = f"pair {k} is not entangled"
            elif margin is not None and margin >= 0.0:
                reason = f"two-rounds-ahead inequality fails with margin {margin:.3e}"

            if reason is not None:
                logger.info("verify_theorem(n=%d, t=%.6g) failed at round %d: %s", n_target, t, k, reason)
                return TheoremFailure(
                    t=t,
                    failed_round=k,
                    reason=reason,
                    e_cd=measured.log_negativity,
                    margin=margin,
                    rounds=checks,
                )

        return TheoremCertificate(t=t, rounds_checked=n_target, rounds=checks)

    def _admissible(self, n_target: int, t: float) -> bool:
        return isinstance(self.verify_theorem(n_target, t), TheoremCertificate)

    def find_t(self, n_target: int) -> float | None:
        """Largest admissible t found on a geometric grid below pi/8, refined by bisection."""
        if n_target < 1:
            raise ValueError("n_target must be positive")

        failing: float | None = None
        passing: float | None = None
        for k in range(FIND_T_GRID_POINTS):
            candidate = FIND_T_UPPER * FIND_T_GRID_RATIO**k
            if self._admissible(n_target, candidate):
                passing = candidate
                break
            failing = candidate

        if passing is None:
            logger.warning("find_t: no admissible t for n_target=%d on the search grid", n_target)
            return None
        if failing is None:
            logger.info("find_t(n=%d) -> %.9g (grid top)", n_target, passing)
            return passing

        low, high = passing, failing
        for _ in range(FIND_T_BISECTIONS):
            mid = (low + high) / 2
            if self._admissible(n_target, mid):
                low = mid
            else:
                high = mid
        logger.info("find_t(n=%d) -> %.9g", n_target, low)
        return low
