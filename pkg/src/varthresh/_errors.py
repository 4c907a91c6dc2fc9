"""Exception hierarchy shared across the package."""


class VTError(Exception):
    """Base class for all package errors."""


class DataError(VTError, ValueError):
    """Malformed, missing, or degenerate input data."""


class FitError(VTError, RuntimeError):
    """A model could not be fitted."""


class SingleClassError(FitError):
    """Binary labels contain only one class."""

    def __init__(self, msg="single-class response: both 0 and 1 labels are required", threshold=None):
        self.threshold = threshold
        if threshold is not None:
            msg = f"{msg} (threshold {threshold:g}; coarsen the grid)"
        super().__init__(msg)
