"""Custom exceptions for the entanglement transfer simulator."""

from __future__ import annotations

from typing import Any


class TransferError(Exception):
    """Base exception for all simulator errors."""
    pass


class ContractError(TransferError):
    """Raised when an operation's precondition is violated."""

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class MatrixSizeError(ContractError):
    """Raised for non-square inputs or dimensions beyond the supported size."""

    def __init__(self, message: str, dim: int | None = None):
        self.dim = dim
        super().__init__(message)


class LabelError(ContractError):
    """Raised for unknown or colliding subsystem labels."""

    def __init__(self, message: str, labels: tuple[str, ...] = ()):
        self.labels = labels
        super().__init__(message)


class FamilyInvariantError(ContractError):
    """Raised when family parameters do not describe a valid state."""
    pass


class UnsupportedCaseError(TransferError):
    """Raised when a predicate is asked about a case outside its contract."""
    pass


class RoundCapError(TransferError):
    """Raised when a run requests more rounds than the configured cap."""

    def __init__(self, rounds: int, cap: int):
        self.rounds = rounds
        self.cap = cap
        super().__init__(f"{rounds} rounds requested but the cap is {cap}")


class UndefinedQuantityError(TransferError):
    """Raised when a derived quantity is evaluated where it has no value (p = 1 or cos 2t = 0)."""

    def __init__(self, quantity: str, reason: str):
        self.quantity = quantity
        super().__init__(f"{quantity} is undefined: {reason}")


class ConfigurationError(TransferError):
    """Raised when CLI flags or the config file hold unusable values."""
    pass
