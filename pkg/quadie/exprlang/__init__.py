from quadie.exprlang.algebra import scale, subtract
from quadie.exprlang.differentiate import differentiate, gradient
from quadie.exprlang.evaluate import evaluate
from quadie.exprlang.generate import random_expr
from quadie.exprlang.nodes import (
    FUNCTIONS,
    Binary,
    Expr,
    Number,
    Unary,
    Variable,
    depth,
    to_string,
    variables,
)
from quadie.exprlang.parser import parse, tokenize

__all__ = [
    "Binary",
    "Expr",
    "FUNCTIONS",
    "Number",
    "Unary",
    "Variable",
    "depth",
    "differentiate",
    "evaluate",
    "gradient",
    "parse",
    "random_expr",
    "scale",
    "subtract",
    "to_string",
    "tokenize",
    "variables",
]
