"""
Tests for the simplex search and the pair-count optimizer
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.config import Settings
from app.domain.models import NelderMeadOptions, ObjectiveValue, OptimizeRequest, PauliParamSpec, XXYYSpec
from app.services.entanglement_svc import EntanglementService
from app.services.optimizer_svc import OptimizerService, nelder_mead
from app.services.protocol_svc import ProtocolService
from app.services.unitary_svc import UnitaryService


def build_optimizer() -> OptimizerService:
    settings = Settings()
    unitaries = UnitaryService(settings)
    protocol = ProtocolService(EntanglementService(settings), unitaries, settings)
    return OptimizerService(protocol, unitaries, settings)


@pytest.fixture
def optimizer():
    return build_optimizer()


def small_request(x: float) -> OptimizeRequest:
    return OptimizeRequest(x=x, restarts=2, max_evals=60, seed=11, round_cap=50, final_cap=200, grid_points=20)


def quadratic(point):
    return (float(np.sum((point - np.array([0.3, -0.2])) ** 2)),)


class TestNelderMead:
    def test_finds_quadratic_minimum(self):
        result = nelder_mead(quadratic, [0.0, 0.0])
        assert result.converged
        assert not result.budget_exhausted
        np.testing.assert_allclose(result.x, [0.3, -0.2], atol=1e-4)

    def test_constant_objective_returns_start(self):
        result = nelder_mead(lambda point: (1.0, 2.0), [0.4, -1.0, 2.0])
        assert result.x == [0.4, -1.0, 2.0]
        assert result.value == (1.0, 2.0)
        assert result.converged

    def test_budget_is_respected(self):
        result = nelder_mead(quadratic, [0.0, 0.0], NelderMeadOptions(max_evals=5))
        assert result.evals == 5
        assert result.budget_exhausted
        assert not result.converged

    def test_stays_inside_box(self):
        seen = []

        def far_away(point):
            seen.append(point.copy())
            return (float(np.sum((point - 5.0) ** 2)),)

        result = nelder_mead(far_away, [0.0, 0.0])
        assert all(np.all(np.abs(point) <= math.pi) for point in seen)
        assert result.value < far_away(np.zeros(2))

    def test_deterministic(self):
        first = nelder_mead(quadratic, [1.0, 1.0], NelderMeadOptions(max_evals=40))
        second = nelder_mead(quadratic, [1.0, 1.0], NelderMeadOptions(max_evals=40))
        assert first == second


class TestObjective:
    def test_zero_parameters_serve_nobody(self, optimizer):
        assert optimizer.objective([0.0] * 15, x=2.0, cap=50) == ObjectiveValue(n=0, margin=0.0)

    def test_full_swap_embedding(self, optimizer):
        value = optimizer.objective(UnitaryService.xxyy_theta(math.pi / 4), x=0.0, cap=50)
        assert value.n == 1
        assert value.margin == pytest.approx(0.0, abs=1e-9)

    def test_matches_fixed_gate_count(self, optimizer):
        value = optimizer.objective(UnitaryService.xxyy_theta(0.3), x=4.0, cap=100)
        count = optimizer.protocol.count_pairs(optimizer.unitaries.build_xxyy(XXYYSpec.of(0.3)), 4.0, 100)
        assert value.n == count.n == 2
        assert value.margin == pytest.approx(count.margin, abs=1e-9)

    def test_results_are_cached(self, optimizer):
        theta = list(np.linspace(-0.5, 0.5, 15))
        assert optimizer.objective(theta, 1.0, 20) is optimizer.objective(theta, 1.0, 20)

    def test_cache_is_bounded(self):
        settings = Settings()
        unitaries = UnitaryService(settings)
        protocol = ProtocolService(EntanglementService(settings), unitaries, settings)
        small = OptimizerService(protocol, unitaries, settings, cache_size=2)
        thetas = [[0.1 * k] * 15 for k in range(1, 4)]
        first = small.objective(thetas[0], 1.0, 5)
        small.objective(thetas[1], 1.0, 5)
        small.objective(thetas[2], 1.0, 5)
        assert len(small._cache) == 2
        assert small.objective(thetas[2], 1.0, 5) is small.objective(thetas[2], 1.0, 5)
        assert small.objective(thetas[0], 1.0, 5) is not first
        with pytest.raises(ValueError):
            OptimizerService(protocol, unitaries, settings, cache_size=0)

    @pytest.mark.parametrize("theta", [[0.0] * 14, [math.nan] + [0.0] * 14])
    def test_rejects_bad_parameters(self, optimizer, theta):
        with pytest.raises(ValueError):
            optimizer.objective(theta, 1.0, 10)

    def test_key_orders_more_pairs_first(self):
        assert ObjectiveValue(n=3, margin=0.01).key() < ObjectiveValue(n=2, margin=0.5).key()
        assert ObjectiveValue(n=2, margin=0.5).key() < ObjectiveValue(n=2, margin=0.1).key()


def test_xxyy_axis_search_matches_dense_grid(optimizer):
    x = 3.0

    def along_axis(point):
        gate = optimizer.unitaries.build_xxyy(XXYYSpec.of(float(point[0])))
        count = optimizer.protocol.count_pairs(gate, x, 50)
        return ObjectiveValue(n=count.n, margin=count.margin).key()

    grid_best = min(along_axis(np.array([value])) for value in np.linspace(0.0, math.pi / 4, 10_000))
    result = nelder_mead(along_axis, [math.pi / 8], NelderMeadOptions(lower=0.0, upper=math.pi / 4))
    assert result.value[0] == grid_best[0] == -1.0


class TestMaximizePairs:
    def test_never_worse_than_xxyy_scan(self, optimizer):
        req = small_request(3.0)
        _, scanned = optimizer.xxyy_grid_scan(req.x, req.grid_points, req.round_cap)
        result = optimizer.maximize_pairs(req)
        assert result.best_n >= scanned.n
        assert result.best_n >= 1

    def test_reported_theta_reproduces_count(self, optimizer):
        req = small_request(3.0)
        result = optimizer.maximize_pairs(req)
        gate = optimizer.unitaries.build_pauli_param(PauliParamSpec(theta=tuple(result.best_theta)))
        replayed = optimizer.protocol.count_pairs(gate, req.x, req.final_cap)
        assert replayed.n == result.best_n
        assert replayed.margin == pytest.approx(result.tie_margin)

    def test_bookkeeping(self, optimizer):
        req = small_request(3.0)
        result = optimizer.maximize_pairs(req)
        assert [log.index for log in result.restarts] == [0, 1]
        assert result.eval_count == sum(log.evals for log in result.restarts)
        assert all(log.evals <= req.max_evals for log in result.restarts)
        assert result.restarts[0].start == list(UnitaryService.xxyy_theta(result.restarts[0].start[4]))

    @pytest.mark.parametrize("x", [1.0, 5.0])
    def test_dominates_xxyy_scan_across_thresholds(self, optimizer, x):
        req = small_request(x)
        _, scanned = optimizer.xxyy_grid_scan(req.x, req.grid_points, req.final_cap)
        assert optimizer.maximize_pairs(req).best_n >= scanned.n

    def test_best_gate_serves_at_least_as_many_at_lower_thresholds(self, optimizer):
        for x in (1.0, 3.0):
            result = optimizer.maximize_pairs(small_request(x))
            gate = optimizer.unitaries.build_pauli_param(PauliParamSpec(theta=tuple(result.best_theta)))
            assert optimizer.protocol.count_pairs(gate, x + 1.0, 200).n >= result.best_n

    @pytest.mark.parametrize("overrides", [{"x": 45.0}, {"final_cap": 10**9}, {"round_cap": 10**9}])
    def test_request_bounds(self, overrides):
        with pytest.raises(ValidationError):
            OptimizeRequest.model_validate({**small_request(2.0).model_dump(), **overrides})

    def test_threshold_zero_serves_one_pair(self, optimizer):
        assert optimizer.maximize_pairs(small_request(0.0)).best_n >= 1

    def test_deterministic_for_a_seed(self):
        req = small_request(2.0)
        assert build_optimizer().maximize_pairs(req) == build_optimizer().maximize_pairs(req)

    def test_without_warm_start(self, optimizer):
        req = small_request(2.0).model_copy(update={"warm_start_xxyy": False, "restarts": 1})
        result = optimizer.maximize_pairs(req)
        assert len(result.restarts) == 1
        expected = np.random.default_rng(req.seed).uniform(-math.pi, math.pi, size=(1, 15)).tolist()[0]
        assert result.restarts[0].start == expected


@pytest.mark.asyncio
async def test_concurrent_restarts_match_sequential():
    req = small_request(3.0)
    sequential = build_optimizer().maximize_pairs(req)
    concurrent = await build_optimizer().maximize_pairs_concurrent(req)
    assert concurrent == sequential
