"""Exception types shared across the package."""


class SystolabError(Exception):
    """Base class for all library errors."""


class ParseError(SystolabError):
    """Malformed group/norm/complex/phi specification text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GroupMismatch(SystolabError):
    """Operands belong to different groups."""


class ValidationError(SystolabError):
    """Structurally invalid object: bad multiplication table, triangle
    inequality violation, relator with nontrivial image, and the like."""


class NotEssential(SystolabError):
    """No noncontractible loop exists under phi at this metric, so the
    systolic ratio is undefined."""


class BudgetExceeded(SystolabError):
    """A search budget ran out before the computation could conclude.

    ``lower_bound`` is the largest radius proven complete (or the best bound
    on the requested quantity) at the moment the budget ran out; ``math.inf``
    means the search space was exhausted without reaching the target, i.e.
    the target is provably unreachable.
    """

    def __init__(self, message, lower_bound=0.0, visited=0):
        super().__init__(message)
        self.lower_bound = lower_bound
        self.visited = visited
