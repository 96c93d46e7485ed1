"""Exception hierarchy shared by all modules.

Each class maps onto one CLI exit code (see ``cli.EXIT_CODES``).
"""


class ConewaveError(Exception):
    """Base class for library errors."""


class StructuralError(ConewaveError, ValueError):
    """Mismatched grids, representations or repeated axes."""


class ParameterError(ConewaveError, ValueError):
    """A numerical parameter is outside its admissible range."""


class DomainError(ConewaveError, ValueError):
    """A point lies outside the domain where an evaluator is defined."""


class SingularNodeError(ConewaveError, ArithmeticError):
    """An evaluator is non-finite (or numerically zero) at grid nodes.

    Attributes
    ----------
    nodes : numpy.ndarray
        Integer index tuples of the offending nodes, one row per node.
    """

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes


class DegeneracyError(ConewaveError, ArithmeticError):
    """An ellipticity bound collapses to zero on the unmasked set."""

    def __init__(self, message, witnesses=None):
        super().__init__(message)
        self.witnesses = witnesses


class DivergenceError(ConewaveError, ArithmeticError):
    """An integral fails its decay precondition."""


class IllConditionedError(ConewaveError, ArithmeticError):
    """A dense system exceeds the admissible condition number."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ResourceError(ConewaveError, RuntimeError):
    """The requested problem size exceeds the configured budget."""


class ConfigError(ConewaveError, ValueError):
    """Invalid run configuration."""
