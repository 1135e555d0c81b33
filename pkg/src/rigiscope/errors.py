"""Exception types shared across the package."""


class RigiscopeError(Exception):
    """Base class for all package errors."""


class DimensionError(RigiscopeError, ValueError):
    pass


class SingularMatrix(RigiscopeError, ArithmeticError):
    pass


class RankDeficient(RigiscopeError, ArithmeticError):
    pass


class RankTolAmbiguous(RigiscopeError):
    """A singular value sits too close to the rank cutoff to trust the verdict."""


class DegenerateSpan(RigiscopeError, ValueError):
    pass


class DegenerateDirection(RigiscopeError, ValueError):
    pass


class RandomizationFailure(RigiscopeError):
    pass


class ValidationError(RigiscopeError, ValueError):
    pass


class ParseError(RigiscopeError, ValueError):
    pass
