"""Exception types shared across the package."""


class QuantdagError(Exception):
    """Base class for package-specific failures."""


class DegenerateInputError(QuantdagError, ValueError):
    """Raised for inputs with no usable variation (constant covariate, ...)."""


class DimensionError(QuantdagError, ValueError):
    """Raised when array shapes or sizes are inconsistent with the contract."""


class CycleError(QuantdagError, ValueError):
    """Raised when a graph required to be acyclic contains a directed cycle.

    ``cycle`` holds one offending cycle as a list of node indices, with the
    first node repeated at the end.
    """

    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = list(cycle) if cycle is not None else None


class SearchFailureError(QuantdagError, RuntimeError):
    """Raised when a randomized search cannot reach its target tolerance."""
