from __future__ import annotations

import asyncio
import logging
import math
import threading
from collections import OrderedDict
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import numpy.typing as npt

from app.core.config import OBJECTIVE_CACHE_SIZE, PAULI_PARAM_COUNT, THETA_BOX, get_settings
from app.domain.models import (
    NelderMeadOptions,
    NelderMeadResult,
    ObjectiveValue,
    OptimizeRequest,
    OptimizeResult,
    PauliParamSpec,
    RestartLog,
    XXYYSpec,
)
from app.services.protocol_svc import ProtocolService
from app.services.unitary_svc import UnitaryService

logger = logging.getLogger(__name__)

Key = tuple[float, ...]
Point = npt.NDArray[np.float64]


class _BudgetExhausted(Exception):
    pass


def nelder_mead(
    func: Callable[[Point], Key],
    start: Sequence[float],
    opts: NelderMeadOptions | None = None,
) -> NelderMeadResult:
    """Minimize ``func`` over the box [lower, upper]^d with reflect/expand/contract/shrink.

    Values are tuples compared lexicographically. Vertices with equal values
    keep their insertion order, and the reported best only changes on a
    strict improvement, so a constant objective returns ``start``.
    """
    opts = opts or NelderMeadOptions()
    dim = len(start)
    evals = 0

    def clip(point: Point) -> Point:
        return np.clip(point, opts.lower, opts.upper)

    def evaluate(point: Point) -> Key:
        nonlocal evals
        if evals >= opts.max_evals:
            raise _BudgetExhausted
        evals += 1
        return func(point)

    x0 = clip(np.asarray(start, dtype=np.float64))
    best_x, best_value = x0, evaluate(x0)
    simplex: list[tuple[Point, Key, int]] = [(x0, best_value, 0)]
    serial = 1
    converged = False

    def record(point: Point, value: Key) -> None:
        nonlocal best_x, best_value
        if value < best_value:
            best_x, best_value = point, value

    try:
        for axis in range(dim):
            vertex = x0.copy()
            vertex[axis] += opts.step if vertex[axis] + opts.step <= opts.upper else -opts.step
            value = evaluate(vertex)
            record(vertex, value)
            simplex.append((vertex, value, serial))
            serial += 1

        while True:
            simplex.sort(key=lambda item: (item[1], item[2]))
            anchor = simplex[0][0]
            diameter = max(float(np.linalg.norm(vertex - anchor)) for vertex, _, _ in simplex[1:])
            if diameter < opts.diameter_tol:
                converged = True
                break

            worst_x, worst_value, _ = simplex[-1]
            centroid = np.mean([vertex for vertex, _, _ in simplex[:-1]], axis=0)

            reflected = clip(centroid + opts.alpha * (centroid - worst_x))
            r_value = evaluate(reflected)
            record(reflected, r_value)

            if simplex[0][1] <= r_value < simplex[-2][1]:
                simplex[-1] = (reflected, r_value, serial)
                serial += 1
                continue

            if r_value < simplex[0][1]:
                expanded = clip(centroid + opts.gamma * (centroid - worst_x))
                e_value = evaluate(expanded)
                record(expanded, e_value)
                if e_value < r_value:
                    simplex[-1] = (expanded, e_value, serial)
                else:
                    simplex[-1] = (reflected, r_value, serial)
                serial += 1
                continue

            contracted = clip(centroid + opts.beta * (worst_x - centroid))
            c_value = evaluate(contracted)
            record(contracted, c_value)
            if c_value < worst_value:
                simplex[-1] = (contracted, c_value, serial)
                serial += 1
                continue

            shrunk = [simplex[0]]
            for vertex, _, _ in simplex[1:]:
                moved = clip(anchor + opts.delta * (vertex - anchor))
                value = evaluate(moved)
                record(moved, value)
                shrunk.append((moved, value, serial))
                serial += 1
            simplex = shrunk
    except _BudgetExhausted:
        logger.debug("Nelder-Mead stopped after %d evaluations (budget)", evals)

    return NelderMeadResult(
        x=[float(value) for value in best_x],
        value=best_value,
        evals=evals,
        converged=converged,
        budget_exhausted=not converged,
    )


class OptimizerService:
    """Multistart simplex search for the unitary that serves the most pairs above 2^-x."""

    def __init__(
        self,
        protocol_service: ProtocolService,
        unitary_service: UnitaryService,
        settings: Any = None,
        cache_size: int = OBJECTIVE_CACHE_SIZE,
    ) -> None:
        self.settings = settings or get_settings()
        self.protocol = protocol_service
        self.unitaries = unitary_service
        if cache_size < 1:
            raise ValueError("cache_size must be positive")
        self.cache_size = cache_size
        self._cache: OrderedDict[tuple[bytes, float, int], ObjectiveValue] = OrderedDict()
        self._cache_lock = threading.Lock()

    def objective(self, theta: Sequence[float], x: float, cap: int) -> ObjectiveValue:
        """(pairs above threshold, E_CD of the first failing round) for the Pauli-parameterized gate."""
        point = np.asarray(theta, dtype=np.float64)
        if point.shape != (PAULI_PARAM_COUNT,) or not np.all(np.isfinite(point)):
            raise ValueError(f"theta must hold {PAULI_PARAM_COUNT} finite values")
        key = (point.tobytes(), float(x), int(cap))
        with self._cache_lock:
            cached = self._cache.get(key)
            if cached is not None:
                self._cache.move_to_end(key)
                return cached

        gate = self.unitaries.build_pauli_param(PauliParamSpec(theta=tuple(float(v) for v in point)))
        count = self.protocol.count_pairs(gate, x, cap)
        value = ObjectiveValue(n=count.n, margin=count.margin)
        with self._cache_lock:
            self._cache[key] = value
            # least recently used first
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return value

    def xxyy_grid_scan(self, x: float, grid_points: int, cap: int) -> tuple[float, ObjectiveValue]:
        """Best lambda on k*pi/(4*grid_points), k = 1..grid_points, for the fixed XX+YY gate."""
        best: tuple[float, ObjectiveValue] | None = None
        for k in range(1, grid_points + 1):
            lambda_ = math.pi / 4 * k / grid_points
            count = self.protocol.count_pairs(self.unitaries.build_xxyy(XXYYSpec.of(lambda_)), x, cap)
            value = ObjectiveValue(n=count.n, margin=count.margin)
            if best is None or value.key() < best[1].key():
                best = (lambda_, value)
        assert best is not None
        return best

    def _starts(self, req: OptimizeRequest) -> list[list[float]]:
        rng = np.random.default_rng(req.seed)
        starts = rng.uniform(-THETA_BOX, THETA_BOX, size=(req.restarts, PAULI_PARAM_COUNT)).tolist()
        if req.warm_start_xxyy:
            lambda_, value = self.xxyy_grid_scan(req.x, req.grid_points, req.round_cap)
            logger.info("XX+YY warm start: lambda=%.6g gives n=%d", lambda_, value.n)
            starts[0] = list(UnitaryService.xxyy_theta(lambda_))
        return starts

    def _run_restart(self, index: int, start: list[float], req: OptimizeRequest) -> RestartLog:
        opts = NelderMeadOptions(max_evals=req.max_evals)
        result = nelder_mead(lambda theta: self.objective(theta, req.x, req.round_cap).key(), start, opts)
        n, margin = -result.value[0], -result.value[1]
        if result.budget_exhausted:
            logger.warning("restart %d exhausted its %d-evaluation budget", index, req.max_evals)
        logger.info("restart %d: n=%d margin=%.6g evals=%d", index, int(n), margin, result.evals)
        return RestartLog(
            index=index,
            start=start,
            best_theta=result.x,
            n=int(n),
            margin=margin,
            evals=result.evals,
            converged=result.converged,
            budget_exhausted=result.budget_exhausted,
        )

    def _reduce(self, req: OptimizeRequest, logs: list[RestartLog]) -> OptimizeResult:
        ordered = sorted(logs, key=lambda log: (-log.n, -log.margin, log.index))
        winner = ordered[0]
        final = self.protocol.count_pairs(
            self.unitaries.build_pauli_param(PauliParamSpec(theta=tuple(winner.best_theta))),
            req.x,
            req.final_cap,
        )
        logger.info("maximize_pairs(x=%s): best n=%d from restart %d", req.x, final.n, winner.index)
        return OptimizeResult(
            x=req.x,
            best_theta=winner.best_theta,
            best_n=final.n,
            tie_margin=final.margin,
            saturated=final.saturated,
            eval_count=sum(log.evals for log in logs),
            restarts=sorted(logs, key=lambda log: log.index),
        )

    def maximize_pairs(self, req: OptimizeRequest) -> OptimizeResult:
        starts = self._starts(req)
        logs = [self._run_restart(index, start, req) for index, start in enumerate(starts)]
        return self._reduce(req, logs)

    async def maximize_pairs_concurrent(self, req: OptimizeRequest) -> OptimizeResult:
        """Same result as :meth:`maximize_pairs`, with restarts run in worker threads."""
        starts = self._starts(req)
        logs = await asyncio.gather(
            *(asyncio.to_thread(self._run_restart, index, start, req) for index, start in enumerate(starts))
        )
        return self._reduce(req, list(logs))
