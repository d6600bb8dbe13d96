"""Interaction-strength sweeps: one round over a dense grid, several rounds over a short list."""
from __future__ import annotations

import numpy as np

from app.cli.dependencies import get_protocol_service
from app.core.config import Settings
from app.domain.models import ProtocolConfig, XXYYSpec
from app.storage.run_storage import RunStorage

SINGLE_COLUMNS = ("lambda", "e_cd_1", "e_ab_1", "sum")
MULTI_COLUMNS = ("lambda", "n", "e_cd_n", "e_ab_n")


def linear_grid(settings: Settings) -> list[float]:
    return [float(value) for value in np.linspace(settings.lambda_min, settings.lambda_max, settings.points)]


def sweep_single(settings: Settings, storage: RunStorage) -> int:
    protocol = get_protocol_service(settings)
    config = ProtocolConfig(unitary=XXYYSpec.of(0.0), max_rounds=settings.cap)
    rows = [
        {"lambda": row.lambda_, "e_cd_1": row.e_cd, "e_ab_1": row.e_ab, "sum": row.e_cd + row.e_ab}
        for row in protocol.sweep(config, linear_grid(settings), rounds=1)
    ]
    storage.write_table(rows, SINGLE_COLUMNS)
    peak = max(rows, key=lambda row: row["e_cd_1"])
    print(f"{len(rows)} points; peak E_CD^(1)={peak['e_cd_1']:.6f} at lambda={peak['lambda']:.6f}")
    return 0


def sweep_multi(settings: Settings, storage: RunStorage) -> int:
    protocol = get_protocol_service(settings)
    config = ProtocolConfig(unitary=XXYYSpec.of(0.0), max_rounds=settings.cap)
    rows = [
        {"lambda": row.lambda_, "n": row.n, "e_cd_n": row.e_cd, "e_ab_n": row.e_ab}
        for row in protocol.sweep(config, settings.lambda_grid(), rounds=settings.rounds)
    ]
    storage.write_table(rows, MULTI_COLUMNS)
    print(f"{len(settings.lambda_grid())} lambda values x {settings.rounds} rounds")
    return 0
