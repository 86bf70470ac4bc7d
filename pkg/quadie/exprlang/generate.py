from quadie._utils import _init_rng
from quadie.exprlang.nodes import FUNCTIONS, Binary, Number, Unary, Variable

# sign has a zero derivative everywhere it is smooth; leave it out of
# generated trees so derivative checks stay informative
_GENERATED_FUNCTIONS = tuple(fn for fn in FUNCTIONS if fn != "sign")
_ARITHMETIC = ("+", "-", "*", "/")


def _leaf(rng, names):
    if rng.random() < 0.3:
        return Number(round(float(rng.uniform(-2.0, 2.0)), 3))
    return Variable(str(rng.choice(names)))


def _tree(rng, depth, names):
    if depth == 0:
        return _leaf(rng, names)
    kind = rng.random()
    if kind < 0.3:
        fn = str(rng.choice(_GENERATED_FUNCTIONS))
        return Unary(fn, _tree(rng, depth - 1, names))
    if kind < 0.4:
        return Unary("neg", _tree(rng, depth - 1, names))
    if kind < 0.5:
        return Binary("^", _tree(rng, depth - 1, names), Number(rng.integers(0, 4)))
    op = str(rng.choice(_ARITHMETIC))
    # one side reaches full depth so the tree has exactly the requested depth
    full = _tree(rng, depth - 1, names)
    other = _tree(rng, int(rng.integers(0, depth)), names)
    if rng.random() < 0.5:
        return Binary(op, full, other)
    return Binary(op, other, full)


def random_expr(rng=None, depth=3, variables=("x", "u1")):
    """
    Draw a random expression tree

    Parameters
    ----------
    rng : None, int or numpy.random.Generator
    depth : int
        Exact nesting depth of the returned tree.
    variables : sequence of str
        Variable names the leaves are drawn from.

    Returns
    -------
    Expr
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    names = list(variables)
    if not names:
        raise ValueError("at least one variable name is required")
    return _tree(_init_rng(rng), int(depth), names)
