"""Exception types shared across the package."""


class CrbLabError(Exception):
    """Base class for all package errors."""


class GeometryError(CrbLabError):
    """Invalid array geometry (overlap, ordering, partition problems)."""


class ScenarioError(CrbLabError):
    """Invalid source scenario or scenario/geometry mismatch."""


class SingularModelError(CrbLabError):
    """A matrix required by the model is singular or too ill-conditioned.

    Carries the offending condition number so callers can distinguish a
    genuinely huge bound from numerical garbage.
    """

    def __init__(self, message: str, condition: float = float("inf")):
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition


class EstimationError(CrbLabError):
    """A spectral estimator could not produce the requested estimates."""


class AnalysisError(CrbLabError):
    """A trace is unusable for fitting (too few points, no sign change...)."""


class ConfigError(CrbLabError):
    """Malformed experiment configuration file."""
