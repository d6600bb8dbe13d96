from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from typing import Any

import numpy as np

from app.core.config import TOLERANCES, get_settings
from app.core.exceptions import UnsupportedCaseError
from app.core.linalg import hermitian_eigvals
from app.domain.models import EntanglementValue
from app.domain.qstate import DensityOp, partial_transpose, require_valid

logger = logging.getLogger(__name__)


class EntanglementService:
    """Logarithmic negativity and the two-qubit PPT predicate.

    Values are always computed from the full matrix; closed forms live in the
    family service and are cross-checked against this one.
    """

    def __init__(self, settings: Any = None) -> None:
        self.settings = settings or get_settings()
        self.method = self.settings.eigensolver

    def _pt_spectrum(self, s: DensityOp, part: Iterable[str]) -> np.ndarray:  # type: ignore[type-arg]
        names = tuple(part)
        if set(names) == set(s.labels):
            raise UnsupportedCaseError("partial transpose must act on a proper subset of labels")
        return hermitian_eigvals(partial_transpose(s, names), method=self.method)

    def log_negativity(self, s: DensityOp, part: Iterable[str] | None = None) -> EntanglementValue:
        """log2 of the trace norm of the partial transpose, in ebits.

        ``part`` defaults to the last label. Trace norms within the clamp
        tolerance of 1 report exactly 0.
        """
        require_valid(s, what="log_negativity input", method=self.method)
        names = tuple(part) if part is not None else (s.labels[-1],)
        spectrum = self._pt_spectrum(s, names)
        trace_norm = float(np.sum(np.abs(spectrum)))
        if trace_norm <= 1.0 + TOLERANCES.log_negativity_clamp:
            value = 0.0
        else:
            value = math.log2(trace_norm)
        return EntanglementValue(log_negativity=value, min_pt_eigenvalue=float(spectrum[0]))

    def is_ppt_entangled(
        self,
        s: DensityOp,
        part: Iterable[str] | None = None,
        tol: float = TOLERANCES.ppt,
    ) -> bool:
        """True iff the partial transpose has an eigenvalue below -tol (two qubits only)."""
        if s.num_qubits != 2:
            raise UnsupportedCaseError(
                f"PPT is necessary and sufficient only for two qubits, got {s.num_qubits}"
            )
        require_valid(s, what="is_ppt_entangled input", method=self.method)
        names = tuple(part) if part is not None else (s.labels[-1],)
        return bool(self._pt_spectrum(s, names)[0] < -tol)
