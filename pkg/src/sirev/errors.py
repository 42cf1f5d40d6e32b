"""Exception types raised across the workbench."""


class SirevError(Exception):
    """Base class for all workbench errors."""


class DuplicateRoot(SirevError, ValueError):
    pass


class SameIndex(SirevError, ValueError):
    pass


class OutOfDomain(SirevError, ValueError):
    pass


class DegenerateSpec(SirevError, ValueError):
    """All amplitude parameters vanish (constant-curvature / zero profile)."""


class NotSimple(SirevError, ValueError):
    """Closed-form integrals exist only when every zero of F is simple."""


class StepFailure(SirevError, RuntimeError):
    pass


class FitFailure(SirevError, RuntimeError):
    pass


class ConstraintViolated(SirevError, ValueError):
    def __init__(self, example_id, inequality, detail=""):
        self.example_id = example_id
        self.inequality = inequality
        msg = f"{example_id}: constraint violated: {inequality}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InversionFailure(SirevError, RuntimeError):
    pass


class ConfigError(SirevError, ValueError):
    """Invalid run configuration; ``location`` names the line or field."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
