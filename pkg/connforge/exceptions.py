"""Errors raised by connforge.

Every error subclasses the builtin exception a caller would naturally catch for the same
failure, so ``except ValueError`` keeps working around connforge calls.
"""


class ConnforgeError(Exception):
    """Base class of all connforge errors."""


class ExpressionSyntaxError(ConnforgeError, ValueError):
    """
    Malformed expression text.

    Parameters
    ----------
    message : str
        Description of the problem.
    text : str
        The expression being parsed.
    position : int
        Zero-based character offset of the offending token.
    """

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position} in {text!r}")
        self.text = text
        self.position = position


class UnknownSymbolError(ExpressionSyntaxError):
    """Identifier that is neither a coordinate nor a supported function."""


class CoordinateRangeError(ExpressionSyntaxError):
    """Coordinate symbol whose index lies outside 1..n."""


class EvaluationError(ConnforgeError, ArithmeticError):
    """
    Numeric evaluation failed.

    Parameters
    ----------
    message : str
        Description of the problem.
    kind : str
        One of ``"division-by-zero"``, ``"domain"`` or ``"non-finite"``.
    """

    def __init__(self, message: str, kind: str):
        super().__init__(message)
        self.kind = kind


class SingularMetricError(ConnforgeError, ValueError):
    """Metric whose determinant is too small to invert."""

    def __init__(self, det: float):
        super().__init__(f"Metric is singular: det = {det!r}")
        self.det = det


class StructureFileError(ConnforgeError, ValueError):
    """Structure file that does not conform to the schema."""


class DomainError(ConnforgeError, ValueError):
    """Point outside the coordinate box of a chart."""


class AffineWeightsError(ConnforgeError, ValueError):
    """Affine combination whose weights do not sum to one, or whose terms live at different points."""


class UnavailableConnectionError(ConnforgeError, RuntimeError):
    """
    A connection that cannot be constructed for the given structure.

    Parameters
    ----------
    message : str
        Description of the problem.
    report : SolveReport, optional
        The solve that failed to certify the connection.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class CatalogError(ConnforgeError, KeyError):
    """Unknown catalog entry."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class CertificationError(ConnforgeError, RuntimeError):
    """A catalog entry whose declared flags disagree with computation."""
