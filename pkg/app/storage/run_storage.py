"""CSV tables and run manifests written next to each other under one output prefix."""
from __future__ import annotations

import fcntl
import hashlib
import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import pandas as pd

from app.domain.models import OutputDigest, RunManifest

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunStorage:
    """Writes ``<prefix><suffix>`` data files and the ``<prefix>.manifest.json`` that digests them."""

    def __init__(self, prefix: str | Path):
        self.prefix = Path(prefix)
        self.prefix.parent.mkdir(exist_ok=True, parents=True)
        self.outputs: list[OutputDigest] = []

    def path_for(self, suffix: str) -> Path:
        return self.prefix.with_name(self.prefix.name + suffix)

    @property
    def manifest_path(self) -> Path:
        return self.path_for(".manifest.json")

    def _record(self, path: Path) -> Path:
        self.outputs.append(OutputDigest(path=str(path), sha256=sha256_of(path)))
        return path

    def write_table(
        self,
        rows: Sequence[dict[str, Any]],
        columns: Sequence[str],
        suffix: str = ".csv",
    ) -> Path:
        """Header row plus one line per row; 17 significant digits and '\\n' line endings."""
        path = self.path_for(suffix)
        frame = pd.DataFrame(list(rows), columns=list(columns))
        with open(path, "w", newline="") as f:
            fcntl.flock(f.fileno(), fcntl.LOCK_EX)
            frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
            fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        logger.info("Wrote %d rows to %s", len(frame), path)
        return self._record(path)

    def write_json(self, payload: Any, suffix: str) -> Path:
        path = self.path_for(suffix)
        with open(path, "w") as f:
            fcntl.flock(f.fileno(), fcntl.LOCK_EX)
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")
            fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        return self._record(path)

    def write_manifest(
        self,
        command: str,
        config: dict[str, Any],
        seed: int,
        version: str,
        wall_time: float,
    ) -> RunManifest:
        manifest = RunManifest(
            command=command,
            config=config,
            seed=seed,
            version=version,
            wall_time=wall_time,
            outputs=list(self.outputs),
        )
        with open(self.manifest_path, "w") as f:
            fcntl.flock(f.fileno(), fcntl.LOCK_EX)
            f.write(manifest.model_dump_json(indent=2))
            f.write("\n")
            fcntl.flock(f.fileno(), fcntl.LOCK_UN)
        logger.info("Manifest for %s written to %s", command, self.manifest_path)
        return manifest


def load_manifest(path: str | Path) -> RunManifest:
    with open(path) as f:
        fcntl.flock(f.fileno(), fcntl.LOCK_SH)
        raw = f.read()
        fcntl.flock(f.fileno(), fcntl.LOCK_UN)
    return RunManifest.model_validate_json(raw)
