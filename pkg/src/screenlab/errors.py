"""Exception hierarchy for screenlab."""


class ScreenlabError(Exception):
    """Base class for all screenlab errors."""


class DomainError(ScreenlabError, ValueError):
    """An input lies outside the region where an operation is defined."""


class IndeterminateForm(DomainError):
    """A quantity reduces to 0/0 (e.g. PPV at zero prevalence with a perfect specificity)."""


class UnreachableTarget(DomainError):
    """No finite number of positive serial tests reaches the requested PPV."""


class EmptyTrajectory(ScreenlabError, ValueError):
    pass


class InsufficientPositives(ScreenlabError, RuntimeError):
    """A Monte Carlo draw produced too few positive tests to estimate PPV."""
