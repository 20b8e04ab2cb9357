"""Exception hierarchy shared by the library modules and management commands."""


class IsingError(Exception):
    """Base class for every error raised by the ising app."""

    exit_code = 2


class GraphSpecError(IsingError):
    """Malformed generator spec or unreadable graph file."""


class GraphValidationError(IsingError):
    """Graph or automorphism violates a structural requirement."""


class ParameterError(IsingError):
    """Invalid model or run parameters."""


class PolymerError(IsingError):
    """Polymer operation applied to incompatible inputs."""


class BudgetExceededError(IsingError):
    """An exhaustive computation would exceed its configured budget."""

    exit_code = 3

    def __init__(self, budget, limit, requested):
        self.budget = budget
        self.limit = limit
        self.requested = requested
        super().__init__(
            f'{budget} budget exceeded: requested {requested}, limit {limit}'
        )


class ReportError(IsingError):
    """Artifact could not be written or parsed."""
