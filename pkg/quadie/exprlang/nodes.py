"""
Expression tree node types and the pretty-printer.

All nodes are immutable and compare structurally, so two parses of the same
text are ``==`` and hash alike.
"""

from dataclasses import dataclass
import math
import re

FUNCTIONS = ("exp", "sin", "cos", "tanh", "sqrt", "abs", "log", "sign")
BINARY_OPS = ("+", "-", "*", "/", "^")

_VARIABLE = re.compile(r"x|u[1-9][0-9]*")

# binding strength used by the printer; atoms bind tightest
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def is_variable_name(name):
    """True for ``"x"`` and ``"u<k>"`` with k >= 1"""
    return isinstance(name, str) and _VARIABLE.fullmatch(name) is not None


def is_exponent(node):
    """True when ``node`` is a legal exponent: a non-negative integer literal"""
    return (
        isinstance(node, Number) and node.value >= 0 and float(node.value).is_integer()
    )


class Expr:
    """Base class of every expression node"""

    __slots__ = ()

    @property
    def precedence(self):
        return _ATOM

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Number(Expr):
    value: float

    def __post_init__(self):
        value = float(self.value)
        if not math.isfinite(value):
            raise ValueError(f"Number must be finite, not {self.value!r}")
        object.__setattr__(self, "value", value)

    @property
    def precedence(self):
        return _PRECEDENCE["neg"] if self.value < 0 else _ATOM


@dataclass(frozen=True)
class Variable(Expr):
    name: str

    def __post_init__(self):
        if not is_variable_name(self.name):
            raise ValueError(f"illegal variable name {self.name!r}")


@dataclass(frozen=True)
class Unary(Expr):
    """Negation (``op == "neg"``) or a named function call"""

    op: str
    operand: Expr

    def __post_init__(self):
        if self.op != "neg" and self.op not in FUNCTIONS:
            raise ValueError(f"unknown unary operator {self.op!r}")

    @property
    def precedence(self):
        return _PRECEDENCE["neg"] if self.op == "neg" else _ATOM


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")
        if self.op == "^" and not is_exponent(self.right):
            raise ValueError("exponent must be a non-negative integer literal")

    @property
    def precedence(self):
        return _PRECEDENCE[self.op]


def _format_number(value):
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_string(e):
    """
    Render ``e`` as parseable source text

    Parentheses are emitted wherever the tree shape differs from the shape the
    grammar would produce, so ``parse(to_string(t))`` rebuilds ``t`` for every
    tree the parser can produce.
    """
    if isinstance(e, Number):
        return _format_number(e.value)
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Unary):
        inner = to_string(e.operand)
        if e.op != "neg":
            return f"{e.op}({inner})"
        if e.operand.precedence <= _PRECEDENCE["neg"]:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Binary):
        prec = e.precedence
        left = to_string(e.left)
        right = to_string(e.right)
        if e.op == "^":
            if e.left.precedence <= prec:
                left = f"({left})"
            return f"{left}^{right}"
        if e.left.precedence < prec:
            left = f"({left})"
        if e.right.precedence <= prec:
            right = f"({right})"
        if e.op in "+-":
            return f"{left} {e.op} {right}"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression: {e!r}")


def variables(e):
    """Set of variable names occurring in ``e``"""
    if isinstance(e, Variable):
        return {e.name}
    if isinstance(e, Unary):
        return variables(e.operand)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    return set()


def depth(e):
    if isinstance(e, Unary):
        return 1 + depth(e.operand)
    if isinstance(e, Binary):
        return 1 + max(depth(e.left), depth(e.right))
    return 0
