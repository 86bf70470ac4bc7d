"""Custom warnings and exceptions"""


class ParseError(ValueError):
    """Malformed expression source.

    Parameters
    ----------
    message : str
        What went wrong.
    position : int
        Character offset into the source, within ``[0, len(source)]``.
    """

    def __init__(self, message, position):
        self.message = message
        self.position = position
        super().__init__(f"{message} at position {position}")


class UnboundVariableError(NameError):
    def __init__(self, name):
        super().__init__(f"variable {name!r} has no binding")
        self.name = name


class ExprDomainError(ArithmeticError):
    """An expression was evaluated outside its domain.

    ``node`` is the offending subtree, ``index`` the first offending element
    when the evaluation was vectorized and ``field`` the problem field the
    expression came from, when known.
    """

    def __init__(self, message, node=None, index=None, field=None):
        self.message = message
        self.node = node
        self.index = index
        self.field = field
        super().__init__(self._render())

    def _render(self):
        msg = self.message
        if self.node is not None:
            msg += f" in {self.node}"
        if self.index is not None:
            msg += f" (element {self.index})"
        if self.field is not None:
            msg = f"{self.field}: {msg}"
        return msg

    def with_context(self, index=None, field=None):
        """Copy of the error with grid index and/or field name attached"""
        return ExprDomainError(
            self.message,
            node=self.node,
            index=self.index if index is None else index,
            field=self.field if field is None else field,
        )


class GridMismatchError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class CertificationError(RuntimeError):
    """Raised when a run requires a passing certificate and did not get one"""

    def __init__(self, certificate):
        self.certificate = certificate
        failed = "; ".join(certificate.notes) or "certificate failed"
        super().__init__(f"problem is not certified: {failed}")


class ConvergenceError(RuntimeError):
    """Picard iteration stopped without converging; ``solution`` keeps the trace"""

    def __init__(self, message, solution=None):
        self.solution = solution
        super().__init__(message)


class DivergenceError(ConvergenceError):
    pass


class TruncationWarning(UserWarning):
    pass


class ContractionWarning(UserWarning):
    pass


class StochasticEstimateWarning(UserWarning):
    pass
