"""Exception types shared across the toolkit."""


class AdaptlabError(Exception):
    """Base class for toolkit errors."""


class ConfigError(AdaptlabError):
    """Invalid experiment configuration.

    Carries the full list of field-path annotated problems so a config
    file can be fixed in one round trip.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class InsufficientDataError(AdaptlabError):
    """Not enough samples to evaluate a windowed statistic."""


class NotStableError(AdaptlabError):
    """A required system matrix is not Hurwitz."""


class NotSPRError(AdaptlabError):
    """Transfer function failed the strict positive-realness test."""


class DegenerateCurvatureError(AdaptlabError):
    """Adaptive stepsize denominator hit an exact zero."""


class DivergedError(AdaptlabError):
    """Simulation state left the finite floats."""


class BaselineFailure(AdaptlabError):
    """Static-comparator minimization did not converge."""
