"""Exception types shared by the numerical modules."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class NotPSDError(ValueError):
    """A matrix expected to be positive semidefinite has a clearly negative eigenvalue."""


class IllConditioned(ValueError):
    """A resolvent point lies too close to a spectrum."""


class PreconditionFailure(ValueError):
    """A numerical precondition (e.g. band limit) is not met.

    ``measured`` carries the offending quantity.
    """

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured
