"""Exception types shared across the package."""

from __future__ import annotations


class ContractViolation(ValueError):
    """An operation was called with arguments that violate its contract."""


class GridMismatch(ContractViolation):
    """Operands live on incompatible (theta, x) grids."""


class CapViolation(ContractViolation):
    """A kernel profile exceeds its sup cap; the message names the inequality."""


class CertificationError(RuntimeError):
    """Nonlinearity constants are missing, inconsistent, or failed to refine."""


class IntegrationFailure(RuntimeError):
    """Time stepping produced a non-finite state.

    ``step_index`` is the 1-based index of the step whose output first
    failed the finiteness check.
    """

    def __init__(self, step_index: int, message: str | None = None):
        self.step_index = int(step_index)
        if message is None:
            message = f"non-finite state after step {self.step_index}"
        super().__init__(message)


class ConfigError(ValueError):
    """A run configuration failed validation.

    ``key_path`` is the dotted path of the offending entry, e.g.
    ``"kernel.M_xi"``.
    """

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")
