# core/errors.py

"""
Defines the exception hierarchy shared by the probes, engines, scenarios and runner.

The runner translates these exceptions into process exit codes, so every
failure that can leave the library is one of the classes below.
"""


class NSContractError(Exception):
    """
    Base class for every error raised by the package.
    """


class StructuralError(NSContractError):
    """
    Raised when an input is malformed: wrong coordinate count, empty sample
    set, violated plan invariant.
    """


class DimensionMismatchError(StructuralError):
    """
    Raised when a point does not match the coordinate layout of its space.
    """

    def __init__(self, kind, point, expected):
        self.kind = kind
        self.point = point
        self.expected = expected
        super().__init__(
            f"point {point!r} has {len(point)} coordinate(s); "
            f"space kind '{kind}' expects {expected}"
        )


class ConfigError(StructuralError):
    """
    Raised for unreadable configuration, unknown scenarios and invalid parameters.
    """


class DomainError(NSContractError):
    """
    Raised when a contraction hypothesis fails numerically (mu >= 1, lambda >= 1)
    or a scenario family is rejected.
    """


class DegenerateSamplingError(NSContractError):
    """
    Raised when every sampled pair is too close to give a Lipschitz ratio.
    """


class MapEvaluationError(NSContractError):
    """
    Raised when a user-supplied map fails.

    Attributes:
        n (int): Index of the map in its family.
        coordinate (str): 'base' or 'fiber'.
    """

    def __init__(self, n, coordinate, cause):
        self.n = n
        self.coordinate = coordinate
        self.cause = cause
        super().__init__(f"{coordinate} map at n={n} failed: {cause}")


class NonConvergenceError(NSContractError):
    """
    Raised when an engine exhausts its iteration budget.

    Attributes:
        trace: The partial trace up to the budget.
    """

    def __init__(self, message, trace=None):
        self.trace = trace
        super().__init__(message)


class RefusalError(NSContractError):
    """
    Raised when a hypothesis probe does not pass and the engine refuses to certify.

    Attributes:
        conditions (list): Names of the violated conditions.
        reports (list): Every ProbeReport produced before refusing.
    """

    def __init__(self, conditions, reports, message=None):
        self.conditions = list(conditions)
        self.reports = list(reports)
        if message is None:
            message = "refused: hypothesis not satisfied: " + ", ".join(self.conditions)
        super().__init__(message)
