"""Hidden-variable models with measurement disturbance and time-ordered
noncontextuality inequalities."""

__version__ = "0.1.0"

MAX_OBSERVABLES = 13
MAX_SEQUENCE_LENGTH = 3


class CapacityError(ValueError):
    """Request exceeds the supported observable count or sequence length."""
