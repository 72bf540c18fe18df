"""Exception taxonomy shared across the package."""


class HenonlabError(Exception):
    pass


class ContractError(HenonlabError, ValueError):
    """Caller violated a documented precondition."""


class CapError(ContractError):
    """A configured size cap would be exceeded; use a sampled mode instead."""


class CodingError(HenonlabError):
    """Symbolic coding unavailable or contradicted by the computed orbits."""


class ConvergenceError(HenonlabError):
    """An iterative solver exhausted its budget without meeting tolerance."""


class MapOverflowError(HenonlabError):
    """A map application produced non-finite components."""

    def __init__(self, last_finite, message="map application overflowed"):
        super().__init__(message)
        self.last_finite = last_finite
