"""Exception types shared by the package."""


class AlgebraError(Exception):
    pass


class ScaleError(AlgebraError):
    """A configured size cap was exceeded.

    `partial` holds how many elements had been produced when the cap hit.
    """

    def __init__(self, message, cap=None, partial=None):
        super().__init__(message)
        self.cap = cap
        self.partial = partial


class SignatureError(AlgebraError):
    pass


class InvalidCongruenceError(AlgebraError):
    pass


class PreconditionError(AlgebraError):
    pass


class InconsistencyError(AlgebraError):
    """A computed object violates a property that theory guarantees."""


class MalformedInput(AlgebraError):
    pass
