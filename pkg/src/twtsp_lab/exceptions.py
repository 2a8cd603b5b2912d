"""Error types shared across the package."""


class LabError(Exception):
    """Base class for all domain errors."""


class VertexOutOfRange(LabError):
    pass


class NonPositiveEdge(LabError):
    pass


class DisconnectedGraph(LabError):
    pass


class InfeasibleWalk(LabError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class IndexOutOfRange(LabError):
    pass


class KindMismatch(LabError):
    pass


class SizeMismatch(LabError):
    pass


class StateBudgetExceeded(LabError):
    def __init__(self, required, budget):
        super().__init__(f"state budget exceeded: required {required} > budget {budget}")
        self.required = required
        self.budget = budget


class TooManyTargets(LabError):
    pass


class TooManyJobs(LabError):
    pass


class ServiceExceedsWindow(LabError):
    pass


class WindowTooSmall(LabError):
    pass


class ServiceExceedsDiameter(LabError):
    pass


class InvalidParams(LabError):
    pass


class TargetsViolateAssumptions(LabError):
    pass


class InfeasiblePrecomputedWalk(LabError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class BadSuiteFile(LabError):
    pass
