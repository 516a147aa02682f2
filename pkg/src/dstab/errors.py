"""Exception hierarchy shared by the solver modules."""


class DStabError(Exception):
    """Base class for all solver errors."""


class InputError(DStabError, ValueError):
    """Malformed or dimensionally inconsistent input."""


class CapacityError(DStabError):
    """A size cap (parameter count, matrix order, ...) was exceeded."""


class DomainError(DStabError, ValueError):
    """Argument outside the domain of a sweeping function."""


class DegreeDropError(DStabError):
    """Leading coefficient vanishes at the nominal point."""


class MultilinearityError(DStabError):
    """A family declared multilinear failed the probe test."""


class ZeroAtNominal(DStabError):
    """p(z, q0) = 0: the per-frequency margin is zero."""

    def __init__(self, z):
        super().__init__(f"nominal polynomial vanishes at z={z!r}")
        self.z = z


class ConsistencyError(DStabError, RuntimeError):
    """Internal bookkeeping disagreed with geometry (usually a tolerance issue)."""


class DegenerateCutError(DStabError):
    """Attempted to cut a zero-width coordinate."""


class DepthLimitError(DStabError, RuntimeError):
    """Splitting depth exceeded its safety cap."""
