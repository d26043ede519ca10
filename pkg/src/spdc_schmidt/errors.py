class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


class NumericalError(RuntimeError):
    """An iterative routine failed to converge or produced a degenerate result."""


class GridCoverageError(ValueError):
    """A mode or kernel is not adequately supported by the quadrature grid."""
