import math
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import sympy
from sympy.printing.str import StrPrinter

from ..exceptions import CoordinateRangeError, EvaluationError, ExpressionSyntaxError, UnknownSymbolError

_FUNCTIONS = {"exp": sympy.exp, "sin": sympy.sin, "cos": sympy.cos}

_TOKEN = re.compile(r"(?P<number>\d+(?:\.\d+)?|\.\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()])")
_COORDINATE = re.compile(r"^x(0|[1-9]\d*)$")


@lru_cache(maxsize=None)
def coordinate_symbols(n: int) -> tuple[sympy.Symbol, ...]:
    """Returns the sympy symbols ``x1 .. xn`` of an n-dimensional chart."""
    return tuple(sympy.Symbol(f"x{i}", real=True) for i in range(1, n + 1))


def _negate(expr: sympy.Expr) -> sympy.Expr:
    return sympy.Mul(sympy.S.NegativeOne, expr, evaluate=False)


class _GrammarPrinter(StrPrinter):
    # prints back in the input grammar so that parse(str(e)) evaluates like e

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Pow(self, expr, rational=False):
        return super()._print_Pow(expr, rational).replace("**", "^")


@dataclass(frozen=True)
class ScalarExpr:
    """
    Symbolic scalar expression in the coordinates of a chart.

    Instances are immutable and closed under partial differentiation, so every derivative that enters
    a connection formula is exact. Use `parse` to build one from text.

    Parameters
    ----------
    expr : sympy.Expr
        The expression tree, built from rationals, the symbols ``x1 .. xn``, ``+ - * /``,
        integer powers, ``exp``, ``sin`` and ``cos``.
    dimension : int
        The chart dimension n.

    Examples
    --------
    !!! Example "Evaluating a derivative"
        ```python
        from connforge import parse

        e = parse("exp(2*x1)*x2", 2)
        e.diff(1).eval((0, 5))   # 10.0
        ```
    """
    expr: sympy.Expr
    dimension: int

    @classmethod
    def constant(cls, value: int | float | str, dimension: int) -> "ScalarExpr":
        """Returns the constant expression ``value`` as an exact rational."""
        return cls(sympy.Rational(str(value)), dimension)

    @cached_property
    def _function(self) -> Callable[..., float]:
        return sympy.lambdify(coordinate_symbols(self.dimension), self.expr, modules="math")

    @property
    def is_constant(self) -> bool:
        return not self.expr.free_symbols

    def free_coordinates(self) -> frozenset[int]:
        """Returns the 1-based indices of the coordinates the expression depends on."""
        return frozenset(int(symbol.name[1:]) for symbol in self.expr.free_symbols)

    def eval(self, point: Sequence[float]) -> float:
        """
        Evaluates the expression in IEEE double precision.

        Parameters
        ----------
        point : Sequence[float]
            The coordinates (x1, ..., xn).

        Returns
        -------
        float
            The value of the expression at the point.

        Raises
        ------
        ValueError
            If the point does not have n coordinates.
        EvaluationError
            On division by zero, on a math domain or overflow error, or if the value is not finite.
        """
        if len(point) != self.dimension:
            raise ValueError(f"Expected a point with {self.dimension} coordinates, got {len(point)}")

        values = [float(v) for v in point]
        try:
            value = float(self._function(*values))
        except ZeroDivisionError as e:
            raise EvaluationError(f"Division by zero evaluating {self} at {tuple(values)}",
                                  kind="division-by-zero") from e
        except (OverflowError, ValueError) as e:
            raise EvaluationError(f"Domain error evaluating {self} at {tuple(values)}: {e}",
                                  kind="domain") from e

        if not math.isfinite(value):
            raise EvaluationError(f"Non-finite value {value} evaluating {self} at {tuple(point)}", kind="non-finite")

        return value

    def diff(self, i: int) -> "ScalarExpr":
        """
        Exact partial derivative with respect to the coordinate ``x_i``.

        Parameters
        ----------
        i : int
            1-based coordinate index.

        Returns
        -------
        ScalarExpr
            The derivative, itself a `ScalarExpr` of the same dimension.

        Raises
        ------
        ValueError
            If ``i`` is not in 1..n.
        """
        if not 1 <= i <= self.dimension:
            raise ValueError(f"Coordinate index must be between 1 and {self.dimension}, got {i}")

        if i not in self.free_coordinates():
            return ScalarExpr(sympy.Integer(0), self.dimension)

        return ScalarExpr(sympy.diff(self.expr, coordinate_symbols(self.dimension)[i - 1]), self.dimension)

    def __str__(self):
        return _GrammarPrinter().doprint(self.expr)


class _Parser:

    def __init__(self, text: str, dimension: int):
        self.text = text
        self.dimension = dimension
        self.tokens = self._tokenize()
        self.index = 0

    def _tokenize(self) -> list[tuple[str, str, int]]:
        tokens = []
        position = 0

        while position < len(self.text):
            if self.text[position].isspace():
                position += 1
                continue

            match = _TOKEN.match(self.text, position)
            if match is None:
                raise ExpressionSyntaxError(f"Unexpected character {self.text[position]!r}", self.text, position)

            tokens.append((match.lastgroup, match.group(), position))
            position = match.end()

        tokens.append(("end", "", len(self.text)))
        return tokens

    def _peek(self) -> tuple[str, str, int]:
        return self.tokens[self.index]

    def _next(self) -> tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, op: str) -> bool:
        kind, text, _ = self._peek()
        if kind == "op" and text == op:
            self.index += 1
            return True
        return False

    def _expect(self, op: str):
        kind, text, position = self._peek()
        if not self._accept(op):
            found = repr(text) if kind != "end" else "end of input"
            raise ExpressionSyntaxError(f"Expected {op!r} but found {found}", self.text, position)

    # nodes are built unevaluated so that poles such as x1/x1 survive until evaluation

    def parse(self) -> sympy.Expr:
        expr = self.expr()
        kind, text, position = self._peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"Unexpected token {text!r}", self.text, position)
        return expr

    def expr(self) -> sympy.Expr:
        negate = False
        if self._accept("-"):
            negate = True
        else:
            self._accept("+")

        result = self.term()
        if negate:
            result = -result if result.is_Number else _negate(result)

        while True:
            if self._accept("+"):
                result = sympy.Add(result, self.term(), evaluate=False)
            elif self._accept("-"):
                result = sympy.Add(result, _negate(self.term()), evaluate=False)
            else:
                return result

    def term(self) -> sympy.Expr:
        result = self.factor()

        while True:
            if self._accept("*"):
                result = sympy.Mul(result, self.factor(), evaluate=False)
            elif self._accept("/"):
                result = sympy.Mul(result, sympy.Pow(self.factor(), -1, evaluate=False), evaluate=False)
            else:
                return result

    def factor(self) -> sympy.Expr:
        base = self.base()

        if self._accept("^"):
            return sympy.Pow(base, self._exponent(), evaluate=False)

        return base

    def _exponent(self) -> sympy.Integer:
        parenthesized = self._accept("(")
        sign = -1 if self._accept("-") else 1
        if sign == 1:
            self._accept("+")

        kind, text, position = self._next()
        if kind != "number" or not text.isdigit():
            raise ExpressionSyntaxError(f"Expected an integer exponent but found {text!r}", self.text, position)

        if parenthesized:
            self._expect(")")

        return sympy.Integer(sign * int(text))

    def base(self) -> sympy.Expr:
        kind, text, position = self._next()

        if kind == "number":
            return sympy.Rational(text)

        if kind == "name":
            if text in _FUNCTIONS:
                self._expect("(")
                argument = self.expr()
                self._expect(")")
                return _FUNCTIONS[text](argument, evaluate=False)

            match = _COORDINATE.match(text)
            if match is None:
                raise UnknownSymbolError(f"Unknown symbol {text!r}", self.text, position)

            index = int(match.group(1))
            if not 1 <= index <= self.dimension:
                raise CoordinateRangeError(f"Coordinate {text!r} outside x1..x{self.dimension}", self.text, position)

            return coordinate_symbols(self.dimension)[index - 1]

        if kind == "op" and text == "(":
            expr = self.expr()
            self._expect(")")
            return expr

        found = repr(text) if kind != "end" else "end of input"
        raise ExpressionSyntaxError(f"Unexpected {found}", self.text, position)


def parse(text: str, dimension: int) -> ScalarExpr:
    """
    Parses an expression in the chart coordinates ``x1 .. xn``.

    The accepted grammar is

        expr   := ['-'|'+'] term (('+'|'-') term)*
        term   := factor (('*'|'/') factor)*
        factor := base ('^' exponent)?
        base   := number | 'x'index | '(' expr ')' | func '(' expr ')'
        func   := exp | sin | cos

    where ``exponent`` is an integer, optionally signed and optionally parenthesized, and ``index`` has no
    leading zero. Whitespace is insignificant and numbers are read as exact rationals.

    The tree keeps the arithmetic as written: a division by something that vanishes at a point, even
    removably as in ``x1/x1``, raises when evaluated there.

    Parameters
    ----------
    text : str
        The expression text.
    dimension : int
        The chart dimension n.

    Returns
    -------
    ScalarExpr
        The parsed expression.

    Raises
    ------
    ExpressionSyntaxError
        If the text is malformed; the error carries the offending position.
    UnknownSymbolError
        If an identifier is neither a coordinate nor a supported function.
    CoordinateRangeError
        If a coordinate index lies outside 1..n.

    Examples
    --------
    ???+ Example "Parsing and evaluating"
        ```python
        import math
        from connforge import parse

        parse("x1^2 * sin(x2)", 2).eval((2, math.pi / 2))  # 4.0
        parse("y + 1", 2)                                   # UnknownSymbolError
        ```
    """
    if dimension < 1:
        raise ValueError(f"Chart dimension must be positive, got {dimension}")

    return ScalarExpr(_Parser(text, dimension).parse(), dimension)
