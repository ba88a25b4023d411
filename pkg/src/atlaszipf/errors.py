"""Exception hierarchy shared across the package."""


class AtlasZipfError(Exception):
    """Base class for all package errors."""


class ParameterError(AtlasZipfError, ValueError):
    """A model parameter or option is outside its admissible range."""


class DomainError(AtlasZipfError, ValueError):
    """Input data fall outside the domain of an estimator (e.g. non-positive values)."""


class FormatError(AtlasZipfError, ValueError):
    """A file could not be parsed. ``location`` carries path and line when known."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message}, {location}"
        super().__init__(message)


class EstimationError(AtlasZipfError, RuntimeError):
    """An estimate could not be formed from the available data."""


class TuningError(AtlasZipfError, RuntimeError):
    """A root search failed; ``evidence`` holds the bracket evaluations."""

    def __init__(self, message, evidence=None):
        self.evidence = evidence
        super().__init__(message)


class SimulationError(AtlasZipfError, RuntimeError):
    """A simulated path became non-finite."""
