from functools import singledispatch

from quadie.exprlang.algebra import add, call, div, mul, neg, power, sub
from quadie.exprlang.nodes import Binary, Number, Unary, Variable, is_variable_name


def _chain(fn, a, da):
    """d fn(a) = fn'(a) * da"""
    if fn == "neg":
        return neg(da)
    if fn == "exp":
        return mul(da, call("exp", a))
    if fn == "sin":
        return mul(da, call("cos", a))
    if fn == "cos":
        return neg(mul(da, call("sin", a)))
    if fn == "tanh":
        return mul(da, sub(Number(1), power(call("tanh", a), 2)))
    if fn == "sqrt":
        return div(da, mul(Number(2), call("sqrt", a)))
    if fn == "abs":
        # sign(0) = 0 matches the weak derivative of |y| almost everywhere
        return mul(da, call("sign", a))
    if fn == "log":
        return div(da, a)
    if fn == "sign":
        return Number(0)
    raise NotImplementedError(f"no derivative rule for {fn!r}")


@singledispatch
def _d(e, var):
    raise TypeError(f"Cannot differentiate a {type(e).__name__}")


@_d.register(Number)
def _(e, var):
    return Number(0)


@_d.register(Variable)
def _(e, var):
    return Number(1) if e.name == var else Number(0)


@_d.register(Unary)
def _(e, var):
    da = _d(e.operand, var)
    if da == Number(0):
        return Number(0)
    return _chain(e.op, e.operand, da)


@_d.register(Binary)
def _(e, var):
    a, b = e.left, e.right
    da = _d(a, var)
    if e.op == "^":
        k = int(b.value)
        if k == 0:
            return Number(0)
        return mul(mul(Number(k), power(a, k - 1)), da)
    db = _d(b, var)
    if e.op == "+":
        return add(da, db)
    if e.op == "-":
        return sub(da, db)
    if e.op == "*":
        return add(mul(da, b), mul(a, db))
    return div(sub(mul(da, b), mul(a, db)), power(b, 2))


def differentiate(e, var):
    """
    Symbolic partial derivative of ``e`` with respect to ``var``

    Parameters
    ----------
    e : Expr
    var : str
        ``"x"`` or ``"u<k>"``.

    Returns
    -------
    Expr
        Folded at least for 0*t, t+0, 1*t, t^0 and t^1. The derivative of
        ``abs`` is ``sign`` with sign(0) = 0.
    """
    if not is_variable_name(var):
        raise ValueError(f"illegal variable name {var!r}")
    return _d(e, var)


def gradient(e, names):
    """Tuple of partial derivatives of ``e``, one per name in ``names``"""
    return tuple(differentiate(e, name) for name in names)
