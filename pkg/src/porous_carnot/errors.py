"""Exception hierarchy."""


class CarnotError(Exception):
    pass


class InvalidArgument(CarnotError, ValueError):
    pass


class InvalidSpec(InvalidArgument):
    """A group-law table failed validation."""


class UnsupportedMetric(CarnotError, ValueError):
    pass


class InternalError(CarnotError, RuntimeError):
    """An invariant guaranteed by construction was violated."""


class ConstructionFailed(CarnotError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ExperimentInvalid(CarnotError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
