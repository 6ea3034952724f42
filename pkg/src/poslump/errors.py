"""Exception types raised across the package.

Every error that callers are expected to catch has a named class; generic
misuse (bad argument types, malformed shapes outside the documented
contracts) raises plain ValueError/TypeError.
"""


class PoslumpError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatch(PoslumpError):
    pass


class NotSquare(PoslumpError):
    pass


class RankDeficient(PoslumpError):
    pass


class NotMetzler(PoslumpError):
    def __init__(self, i, j, value):
        super().__init__(f"negative off-diagonal entry {value!r} at ({i}, {j})")
        self.position = (i, j)
        self.value = value


class BoundsInverted(PoslumpError):
    def __init__(self, i, j, lower, upper):
        super().__init__(f"lower bound {lower!r} exceeds upper bound {upper!r} at ({i}, {j})")
        self.position = (i, j)


class NegativeInput(PoslumpError):
    def __init__(self, i, j, value):
        super().__init__(f"negative input-matrix entry {value!r} at ({i}, {j})")
        self.position = (i, j)


class NegativeInitial(PoslumpError):
    def __init__(self, i, value):
        super().__init__(f"negative initial-state entry {value!r} at index {i}")
        self.index = i


class NotProper(PoslumpError):
    pass


class NotALumping(PoslumpError):
    def __init__(self, which, residual):
        super().__init__(f"matrix is not a lumping of {which} (row-space residual {residual:.3e})")
        self.which = which
        self.residual = residual


class TimeoutExceeded(PoslumpError):
    def __init__(self, msg, partial_trace=None):
        super().__init__(msg)
        self.partial_trace = partial_trace or []


class DimensionTooLarge(PoslumpError):
    pass


class ControlOutOfBounds(PoslumpError):
    pass


class NonAdmissibleControl(PoslumpError):
    pass


class NegativeState(PoslumpError):
    pass


class GridMismatch(PoslumpError):
    pass


class BudgetExceeded(PoslumpError):
    pass


class ParseError(PoslumpError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


class NonPositiveWeight(PoslumpError):
    def __init__(self, path, lineno, weight):
        super().__init__(f"{path}:{lineno}: edge weight must be positive, got {weight!r}")
        self.lineno = lineno


class EmptyNetwork(PoslumpError):
    pass
