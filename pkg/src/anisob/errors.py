"""Shared exception types for the spectral lab."""


class ShapeMismatchError(ValueError):
    """Physical array shape does not match the box."""


class CorruptFieldError(ValueError):
    """Spectral field violates Hermitian symmetry beyond tolerance."""


class NumericalBlowupError(FloatingPointError):
    """Non-finite values encountered; carries the simulation time if known."""

    def __init__(self, msg, time=None):
        super().__init__(msg)
        self.time = time


class IncompleteLedgerError(ValueError):
    """Duhamel flux ledger does not cover the requested time interval."""


class IncompleteHistoryError(ValueError):
    """Time-indexed state history is empty or unusable for a composite norm."""


class ConfigurationError(ValueError):
    """Invalid run configuration (box, data support, parameter ranges)."""


class ResolutionError(RuntimeError):
    """Oscillatory quadrature unresolved at the requested resolution."""


class WindowError(ValueError):
    """Decay-fit time window is empty or has too few samples."""
