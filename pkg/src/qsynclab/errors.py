"""Shared exception types."""


class SimulationError(RuntimeError):
    """Propagation produced an invalid state (e.g. trace drift)."""


class DatasetFormatError(ValueError):
    """Dataset file or manifest does not match the expected format."""
