"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class NumericalFailureError(RuntimeError):
    """A computation produced NaN/Inf or hit a non-recoverable singularity."""


class SingularEvaluationError(NumericalFailureError):
    """Evaluation of a singular kernel (or jet) at a forbidden point."""
