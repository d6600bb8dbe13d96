from __future__ import annotations

import logging
import tempfile
from collections.abc import Callable
from pathlib import Path

from pydantic import ValidationError

from app.core.config import Settings
from app.core.exceptions import ConfigurationError
from app.domain.models import RunManifest
from app.storage.run_storage import load_manifest

logger = logging.getLogger(__name__)

Executor = Callable[[str, Settings], tuple[int, RunManifest]]


def replay(manifest_path: str | Path, execute: Executor) -> int:
    """Re-run a recorded command with its echoed config and compare output digests in order."""
    recorded = load_manifest(manifest_path)
    original_prefix = Path(str(recorded.config.get("out", "run")))

    with tempfile.TemporaryDirectory(prefix="transfer-replay-") as scratch:
        try:
            settings = Settings(**{**recorded.config, "out": str(Path(scratch) / original_prefix.name)})
        except ValidationError as exc:
            raise ConfigurationError(f"manifest {manifest_path} holds an invalid config: {exc}") from exc
        _, fresh = execute(recorded.command, settings)

    if len(fresh.outputs) != len(recorded.outputs):
        print(f"MISMATCH: {len(recorded.outputs)} recorded outputs, {len(fresh.outputs)} reproduced")
        return 1

    mismatches = 0
    for old, new in zip(recorded.outputs, fresh.outputs):
        same = old.sha256 == new.sha256
        mismatches += not same
        print(f"{'match' if same else 'MISMATCH'}  {old.path}")
    if mismatches:
        logger.warning("replay of %s: %d of %d outputs differ", recorded.command, mismatches, len(recorded.outputs))
        return 1
    logger.info("replay of %s reproduced %d outputs", recorded.command, len(recorded.outputs))
    return 0
