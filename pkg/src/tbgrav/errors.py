"""Exception taxonomy shared by all engine modules."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(EngineError):
    """Invalid configuration: bad seed slot, unknown catalog name, bad parameters."""


class UsageError(EngineError):
    """API misuse: mismatched jet spaces, derivative-degree overflow, bad field handle."""


class SingularEvaluationError(EngineError):
    """Evaluation hit a singular point (division by zero value, sqrt/ln domain,
    null or spacelike fiber vector where a norm is required)."""

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value


class ParseError(EngineError):
    """Expression syntax error. Carries the source span and expected tokens."""

    def __init__(self, message: str, span: "tuple[int, int]", expected: set[str] | None = None):
        super().__init__(message)
        self.span = span
        self.expected = expected or set()


class EvaluationError(EngineError):
    """Expression evaluation failure (unbound symbol)."""


class ModelError(EngineError):
    """Spacetime model document violates the schema or its invariants."""


class ChartError(EngineError):
    """Evaluation point left the model's valid chart region."""


class IntegrationError(EngineError):
    """Worldline integration failure: chart exit, null-cone approach, step underflow."""
