import numpy as np

from quadie.exceptions import ExprDomainError, UnboundVariableError
from quadie.exprlang.nodes import Binary, Number, Unary, Variable

_FUNCTIONS = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "log": np.log,
    "sign": np.sign,
}


def _first(mask):
    """Index of the first True element, or None for scalars"""
    if np.ndim(mask) == 0:
        return None
    return int(np.flatnonzero(mask)[0])


def _reject(mask, message, node):
    if np.any(mask):
        raise ExprDomainError(message, node=node, index=_first(mask))


def _finite(value, node):
    _reject(~np.isfinite(value), "non-finite result", node)
    return value


def _eval(e, bindings):
    if isinstance(e, Number):
        return e.value
    if isinstance(e, Variable):
        try:
            value = bindings[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
        value = np.asarray(value, dtype=float) if np.ndim(value) else float(value)
        _reject(~np.isfinite(value), "non-finite binding", e)
        return value
    if isinstance(e, Unary):
        arg = _eval(e.operand, bindings)
        if e.op == "neg":
            return -arg
        if e.op == "log":
            _reject(arg <= 0, "log of non-positive argument", e)
        elif e.op == "sqrt":
            _reject(arg < 0, "sqrt of negative argument", e)
        return _finite(_FUNCTIONS[e.op](arg), e)
    if isinstance(e, Binary):
        left = _eval(e.left, bindings)
        if e.op == "^":
            return _finite(np.power(left, int(e.right.value)), e)
        right = _eval(e.right, bindings)
        if e.op == "+":
            out = left + right
        elif e.op == "-":
            out = left - right
        elif e.op == "*":
            out = left * right
        else:
            _reject(np.equal(right, 0), "division by zero", e)
            out = left / right
        return _finite(out, e)
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e, bindings=None):
    """
    Evaluate an expression

    Parameters
    ----------
    e : Expr
    bindings : dict, optional
        Maps variable names to real numbers or to numpy arrays of equal
        shape; arrays evaluate elementwise.

    Returns
    -------
    float or numpy.ndarray
        A Python float when every binding is scalar.

    Raises
    ------
    UnboundVariableError
        A variable of ``e`` is missing from ``bindings``.
    ExprDomainError
        log of a non-positive value, sqrt of a negative value, division by
        zero or a non-finite intermediate; carries the offending subtree and
        the first offending array element.
    """
    bindings = {} if bindings is None else bindings
    with np.errstate(all="ignore"):
        out = _eval(e, bindings)
    if np.ndim(out) == 0:
        return float(out)
    return out
