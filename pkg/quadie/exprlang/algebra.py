"""
Node constructors that fold trivial sub-expressions.

Used by the differentiator so results come back as ``2*x`` rather than
``2*x^1*1 + 0``. Folding follows the identities 0*t = 0, 1*t = t, t + 0 = t,
t^0 = 1 and t^1 = t, and evaluates operators on two number literals.
"""

from quadie.exprlang.nodes import Binary, Number, Unary


def _num(e):
    return isinstance(e, Number)


def _is(e, value):
    return isinstance(e, Number) and e.value == value


def _scaled(e):
    # c*t with a literal c
    return isinstance(e, Binary) and e.op == "*" and _num(e.left)


def add(a, b):
    if _num(a) and _num(b):
        return Number(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Binary("+", a, b)


def sub(a, b):
    if _num(a) and _num(b):
        return Number(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    return Binary("-", a, b)


def mul(a, b):
    if _num(a) and _num(b):
        return Number(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return Number(0)
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _num(b):
        a, b = b, a
    if _num(a) and _scaled(b):
        return mul(Number(a.value * b.left.value), b.right)
    if not _num(a) and _scaled(b):
        return Binary("*", mul(b.left, a), b.right)
    return Binary("*", a, b)


def div(a, b):
    if _num(a) and _num(b) and b.value != 0:
        return Number(a.value / b.value)
    if _is(a, 0):
        return Number(0)
    if _is(b, 1):
        return a
    return Binary("/", a, b)


def neg(a):
    if _num(a):
        return Number(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.operand
    if _scaled(a):
        return mul(Number(-a.left.value), a.right)
    return Unary("neg", a)


def power(a, k):
    k = int(k)
    if k < 0:
        raise ValueError(f"exponent must be >= 0, not {k}")
    if k == 0:
        return Number(1)
    if k == 1:
        return a
    if _num(a):
        return Number(a.value**k)
    return Binary("^", a, Number(k))


def call(fn, a):
    return Unary(fn, a)


def scale(e, c):
    """``c * e`` as a new expression"""
    return mul(Number(c), e)


def subtract(a, b):
    """``a - b`` without folding, so the difference keeps both operands"""
    return Binary("-", a, b)
