"""Exception hierarchy shared across the package."""


class QuotaSimError(Exception):
    """Base class for all errors raised by quotasim."""


class ConfigurationError(QuotaSimError, ValueError):
    """Invalid generative or run parameters."""


class SelectionError(QuotaSimError, ValueError):
    """Invalid selection arguments (bad fraction, mismatched slot counts)."""


class QuotaInfeasibleError(SelectionError):
    """A quota group has fewer members than the slots allocated to it."""

    def __init__(self, group, allocated: int, available: int):
        self.group = group
        self.allocated = allocated
        self.available = available
        super().__init__(
            f"quota group {group!r} was allocated {allocated} slots "
            f"but has only {available} members"
        )


class IntegrityError(QuotaSimError, ValueError):
    """A selection does not belong to the population it is evaluated on."""


class DomainError(QuotaSimError, ValueError):
    """Arguments outside the domain where an analytical formula holds."""


class DegenerateInputError(QuotaSimError, ValueError):
    """Statistic undefined for the input (e.g. zero variance)."""


class DatasetError(QuotaSimError, ValueError):
    """Base class for dataset ingestion and fitting failures."""


class SchemaError(DatasetError):
    """A required column is absent from the CSV header."""


class EmptyDataError(DatasetError):
    """No rows survive filtering."""


class TransformError(DatasetError):
    """Quality values are incompatible with the requested transform."""


class FitError(DatasetError):
    """Model approximation cannot be fitted (e.g. an empty cell)."""
