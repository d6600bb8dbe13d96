"""Command-line entry point: ``python -m app <command> [flags]``.

Exit codes: 0 success, 1 verification or runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app import __version__
from app.cli import pairs, sweep, verify
from app.cli.replay import replay
from app.core.config import Settings
from app.core.exceptions import ConfigurationError, TransferError
from app.domain.models import RunManifest
from app.storage.run_storage import RunStorage
from app.utils import configure_logging

logger = logging.getLogger(__name__)

Handler = Callable[[Settings, RunStorage], int]

COMMANDS: dict[str, Handler] = {
    "sweep-single": sweep.sweep_single,
    "sweep-multi": sweep.sweep_multi,
    "count": pairs.count,
    "optimize": pairs.optimize,
    "verify": verify.verify,
    "equal-share": pairs.equal_share,
}

# argparse dest -> Settings field
FLAG_FIELDS = (
    "lambda_min",
    "lambda_max",
    "points",
    "lambdas",
    "rounds",
    "xs",
    "x_min",
    "x_max",
    "restarts",
    "max_evals",
    "seed",
    "cap",
    "optimizer_cap",
    "n_target",
    "t",
    "out",
    "eigensolver",
    "log_level",
)


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="KEY=VALUE file with TRANSFER_* settings")
    parent.add_argument("--lambda-min", type=float)
    parent.add_argument("--lambda-max", type=float)
    parent.add_argument("--points", type=int)
    parent.add_argument("--lambda", dest="lambdas", help="comma-separated lambda grid")
    parent.add_argument("--rounds", type=int)
    parent.add_argument("--x", dest="xs", help="comma-separated threshold exponents")
    parent.add_argument("--x-min", type=float)
    parent.add_argument("--x-max", type=float)
    parent.add_argument("--restarts", type=int)
    parent.add_argument("--max-evals", type=int)
    parent.add_argument("--seed", type=int)
    parent.add_argument("--cap", type=int)
    parent.add_argument("--optimizer-cap", type=int)
    parent.add_argument("--n-target", type=int)
    parent.add_argument("--t", type=float)
    parent.add_argument("--out", help="output prefix; writes <out>.csv and <out>.manifest.json")
    parent.add_argument("--eigensolver", choices=("jacobi", "lapack"))
    parent.add_argument("--log-level")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app", description="Sequential entanglement transfer simulator")
    parser.add_argument("--version", action="version", version=__version__)
    subcommands = parser.add_subparsers(dest="command", required=True)
    parent = _common_flags()
    for name in COMMANDS:
        subcommands.add_parser(name, parents=[parent])
    replay_parser = subcommands.add_parser("replay", help="re-run a manifest and compare output digests")
    replay_parser.add_argument("--manifest", type=Path, required=True)
    replay_parser.add_argument("--log-level", default="INFO")
    return parser


def load_settings(args: argparse.Namespace) -> Settings:
    """CLI flags over TRANSFER_* environment over the config file over defaults."""
    overrides: dict[str, Any] = {
        field: getattr(args, field) for field in FLAG_FIELDS if getattr(args, field, None) is not None
    }
    config_path = getattr(args, "config", None)
    if config_path is not None and not config_path.is_file():
        raise ConfigurationError(f"config file {config_path} does not exist")
    try:
        return Settings(_env_file=config_path, **overrides)  # type: ignore[call-arg]
    except ValidationError as exc:
        raise ConfigurationError(str(exc)) from exc


def execute(command: str, settings: Settings) -> tuple[int, RunManifest]:
    storage = RunStorage(settings.out)
    started = time.perf_counter()
    code = COMMANDS[command](settings, storage)
    manifest = storage.write_manifest(
        command=command,
        config=settings.model_dump(mode="json"),
        seed=settings.seed,
        version=__version__,
        wall_time=time.perf_counter() - started,
    )
    return code, manifest


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "replay":
            configure_logging(args.log_level)
            if not args.manifest.is_file():
                raise ConfigurationError(f"manifest {args.manifest} does not exist")
            return replay(args.manifest, execute)
        settings = load_settings(args)
        configure_logging(settings.log_level)
        code, _ = execute(args.command, settings)
        return code
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TransferError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 1
    except Exception:
        logger.error("%s crashed", args.command, exc_info=True)
        return 1
