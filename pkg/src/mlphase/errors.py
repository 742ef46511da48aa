"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid user input: parameters, matrices, or file contents."""


class EvaluationError(ArithmeticError):
    """A numerical routine could not reach its accuracy target."""
