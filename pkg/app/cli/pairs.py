"""Pair-counting commands: fixed-gate counts, the unitary optimizer and the equal-share scan."""
from __future__ import annotations

from app.cli.dependencies import get_optimizer_service, get_protocol_service, get_unitary_service
from app.cli.sweep import linear_grid
from app.core.config import Settings
from app.domain.models import OptimizeRequest, ProtocolConfig, XXYYSpec
from app.storage.run_storage import RunStorage

COUNT_COLUMNS = ("lambda", "x", "n", "saturated", "margin")
OPTIMIZE_COLUMNS = ("x", "best_n", "margin", "saturated", "eval_count")
EQUAL_SHARE_COLUMNS = ("lambda", "min_e_cd")
PER_PAIR_COLUMNS = ("n", "e_cd")


def count(settings: Settings, storage: RunStorage) -> int:
    protocol = get_protocol_service(settings)
    unitaries = get_unitary_service(settings)
    rows = []
    for lambda_ in settings.lambda_grid():
        gate = unitaries.build_xxyy(XXYYSpec.of(lambda_))
        for x in settings.x_grid():
            result = protocol.count_pairs(gate, x, settings.cap)
            rows.append(
                {"lambda": lambda_, "x": x, "n": result.n, "saturated": result.saturated, "margin": result.margin}
            )
            print(f"lambda={lambda_:g} x={x:g}: n={result.n}{' (cap)' if result.saturated else ''}")
    storage.write_table(rows, COUNT_COLUMNS)
    return 0


def optimize(settings: Settings, storage: RunStorage) -> int:
    optimizer = get_optimizer_service(settings)
    rows = []
    results = []
    for x in settings.x_grid():
        request = OptimizeRequest(
            x=x,
            restarts=settings.restarts,
            max_evals=settings.max_evals,
            seed=settings.seed,
            round_cap=settings.optimizer_cap,
            final_cap=settings.cap,
            warm_start_xxyy=settings.warm_start_xxyy,
            grid_points=settings.grid_points,
        )
        result = optimizer.maximize_pairs(request)
        results.append(result.model_dump())
        rows.append(
            {
                "x": x,
                "best_n": result.best_n,
                "margin": result.tie_margin,
                "saturated": result.saturated,
                "eval_count": result.eval_count,
            }
        )
        print(f"x={x:g}: best n={result.best_n} after {result.eval_count} evaluations")
    storage.write_table(rows, OPTIMIZE_COLUMNS)
    storage.write_json(results, ".results.json")
    return 0


def equal_share(settings: Settings, storage: RunStorage) -> int:
    protocol = get_protocol_service(settings)
    config = ProtocolConfig(unitary=XXYYSpec.of(0.0), max_rounds=settings.cap)
    result = protocol.max_min_transfer(settings.rounds, linear_grid(settings), config)
    storage.write_table(
        [{"lambda": lambda_, "min_e_cd": worst} for lambda_, worst in result.grid], EQUAL_SHARE_COLUMNS
    )
    storage.write_table(
        [{"n": n, "e_cd": value} for n, value in enumerate(result.per_pair, start=1)],
        PER_PAIR_COLUMNS,
        suffix=".pairs.csv",
    )
    print(
        f"lambda={result.best_lambda:.6f} gives each of {result.n_pairs} pairs "
        f"at least {result.min_e_cd:.6g} ebits"
    )
    return 0
