import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from quadie.exceptions import ExprDomainError, ParseError, UnboundVariableError
from quadie.exprlang import (
    FUNCTIONS,
    Binary,
    Number,
    Unary,
    Variable,
    depth,
    differentiate,
    evaluate,
    gradient,
    parse,
    random_expr,
    scale,
    subtract,
    to_string,
    tokenize,
    variables,
)

x = Variable("x")


class TestParse:
    @pytest.mark.parametrize(
        "source, expected",
        [
            ("x", x),
            ("2+3*x", Binary("+", Number(2), Binary("*", Number(3), x))),
            (
                "exp(-x^2)",
                Unary("exp", Unary("neg", Binary("^", x, Number(2)))),
            ),
            ("1-2-3", Binary("-", Binary("-", Number(1), Number(2)), Number(3))),
            ("x/2/u1", Binary("/", Binary("/", x, Number(2)), Variable("u1"))),
            ("(2+3)*x", Binary("*", Binary("+", Number(2), Number(3)), x)),
            ("-u1*u2", Binary("*", Unary("neg", Variable("u1")), Variable("u2"))),
            ("x^(2)", Binary("^", x, Number(2))),
            ("2.5e-1", Number(0.25)),
            (".5", Number(0.5)),
            ("sign(u12)", Unary("sign", Variable("u12"))),
        ],
    )
    def test_shapes(self, source, expected):
        assert parse(source) == expected

    @pytest.mark.parametrize(
        "source, position",
        [
            ("x^(-1)", 2),
            ("x^1.5", 2),
            ("", 0),
            ("   ", 0),
            ("(x+1", 4),
            ("x+1)", 3),
            ("y+1", 0),
            ("u0", 0),
            ("2*foo(x)", 2),
            ("x^2^3", 2),
            ("x $ 2", 2),
            ("exp x", 4),
        ],
    )
    def test_errors(self, source, position):
        with pytest.raises(ParseError) as exc:
            parse(source)
        assert exc.value.position == position
        assert 0 <= exc.value.position <= len(source)

    def test_error_is_value_error(self):
        with pytest.raises(ValueError, match="position 2"):
            parse("x^(-1)")

    def test_bytes(self):
        assert parse(b"u1^2") == Binary("^", Variable("u1"), Number(2))

    def test_not_text(self):
        with pytest.raises(TypeError):
            parse(3)

    def test_tokenize(self):
        kinds = [tok.kind for tok in tokenize("exp(2*x)")]
        assert kinds == ["name", "op", "number", "op", "name", "op", "end"]


def _trees():
    leaves = st.one_of(
        st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(
            lambda v: Number(abs(v))
        ),
        st.sampled_from(["x", "u1", "u2", "u10"]).map(Variable),
    )

    def extend(children):
        return st.one_of(
            st.builds(Unary, st.sampled_from(("neg",) + FUNCTIONS), children),
            st.builds(
                Binary, st.sampled_from(["+", "-", "*", "/"]), children, children
            ),
            st.builds(
                Binary,
                st.just("^"),
                children,
                st.integers(0, 5).map(Number),
            ),
        )

    return st.recursive(leaves, extend, max_leaves=12)


class TestPrint:
    @settings(max_examples=300, deadline=None)
    @given(_trees())
    def test_round_trip(self, tree):
        assert parse(to_string(tree)) == tree

    @pytest.mark.parametrize(
        "source",
        ["-(x + 1)", "(-x)^2", "-x^2", "x - (u1 - u2)", "x/(u1*u2)", "2*-x"],
    )
    def test_canonical_text(self, source):
        assert to_string(parse(source)) == source

    def test_str(self):
        assert str(parse("u1 *  u2")) == "u1*u2"


class TestNodes:
    def test_illegal_variable(self):
        with pytest.raises(ValueError):
            Variable("u0")

    def test_illegal_exponent(self):
        with pytest.raises(ValueError):
            Binary("^", x, Number(0.5))

    def test_non_finite_number(self):
        with pytest.raises(ValueError):
            Number(math.inf)

    def test_variables_and_depth(self):
        e = parse("u1*exp(x) + u3")
        assert variables(e) == {"x", "u1", "u3"}
        assert depth(e) == 3
        assert depth(Number(1)) == 0

    def test_hashable(self):
        assert len({parse("x+1"), parse("x + 1")}) == 1


class TestEvaluate:
    @pytest.mark.parametrize(
        "source, bindings, expected",
        [
            ("2+3*x", {"x": 2}, 8.0),
            ("u1*u2 - x", {"x": 1, "u1": 2, "u2": 3}, 5.0),
            ("abs(x)", {"x": -3}, 3.0),
            ("sign(x)", {"x": 0}, 0.0),
            ("x^0", {"x": 0}, 1.0),
            ("exp(-x^2)", {"x": 0}, 1.0),
            ("sqrt(x)", {"x": 0}, 0.0),
            ("tanh(x)", {"x": 0}, 0.0),
        ],
    )
    def test_scalar(self, source, bindings, expected):
        out = evaluate(parse(source), bindings)
        assert isinstance(out, float)
        assert out == expected

    def test_vectorized(self):
        grid = np.linspace(-1, 1, 5)
        out = evaluate(parse("x^2 + 1"), {"x": grid})
        np.testing.assert_allclose(out, grid**2 + 1)

    def test_constant(self):
        assert evaluate(parse("2*3")) == 6.0

    def test_unbound(self):
        with pytest.raises(UnboundVariableError) as exc:
            evaluate(parse("u1 + u2"), {"u1": 1.0})
        assert exc.value.name == "u2"

    @pytest.mark.parametrize(
        "source, value, subtree",
        [
            ("log(x)", 0.0, "log(x)"),
            ("1 + sqrt(x)", -1.0, "sqrt(x)"),
            ("1/(x - 1)", 1.0, "1/(x - 1)"),
            ("exp(exp(x))", 10.0, "exp(exp(x))"),
        ],
    )
    def test_domain(self, source, value, subtree):
        with pytest.raises(ExprDomainError) as exc:
            evaluate(parse(source), {"x": value})
        assert to_string(exc.value.node) == subtree
        assert exc.value.index is None

    def test_domain_index(self):
        with pytest.raises(ExprDomainError) as exc:
            evaluate(parse("log(x)"), {"x": np.array([1.0, 2.0, -1.0, 0.0])})
        assert exc.value.index == 2

    def test_non_finite_binding(self):
        with pytest.raises(ExprDomainError):
            evaluate(x, {"x": math.nan})


class TestDifferentiate:
    @pytest.mark.parametrize(
        "source, var, expected",
        [
            ("x^2", "x", "2*x"),
            ("u1*u2", "u1", "u2"),
            ("exp(-x^2)", "x", "-2*x*exp(-x^2)"),
            ("x^0", "x", "0"),
            ("u1 + 3", "u2", "0"),
            ("abs(u1)", "u1", "sign(u1)"),
            ("sign(x)", "x", "0"),
        ],
    )
    def test_text(self, source, var, expected):
        assert to_string(differentiate(parse(source), var)) == expected

    @pytest.mark.parametrize(
        "source",
        [
            "sin(x)*cos(x)",
            "tanh(x^3)",
            "sqrt(1 + x^2)",
            "log(2 + x^2)",
            "x/(1 + x^2)",
            "exp(sin(x)) - 3*x^4",
        ],
    )
    def test_against_finite_difference(self, source):
        e = parse(source)
        slope = differentiate(e, "x")
        step = 1e-6
        for point in (-1.3, 0.2, 0.9):
            fd = evaluate(e, {"x": point + step}) - evaluate(e, {"x": point - step})
            fd /= 2 * step
            exact = evaluate(slope, {"x": point})
            assert exact == pytest.approx(fd, rel=1e-6, abs=1e-8)

    def test_gradient(self):
        grads = gradient(parse("u1^2 + 0.5*u2^2"), ["u1", "u2"])
        assert [to_string(g) for g in grads] == ["2*u1", "u2"]

    def test_illegal_name(self):
        with pytest.raises(ValueError):
            differentiate(x, "y")


class TestHelpers:
    def test_scale(self):
        assert evaluate(scale(parse("u1^2"), 1.5), {"u1": 2.0}) == 6.0

    def test_subtract(self):
        e = subtract(parse("u1^2"), parse("u1"))
        assert evaluate(e, {"u1": 3.0}) == 6.0

    @pytest.mark.parametrize("d", [0, 1, 3, 6])
    def test_random_depth(self, d):
        tree = random_expr(np.random.default_rng(d), d, ("x", "u1", "u2"))
        assert depth(tree) == d
        assert variables(tree) <= {"x", "u1", "u2"}

    def test_random_seeded(self):
        assert random_expr(5, 4) == random_expr(5, 4)

    def test_random_bad_depth(self):
        with pytest.raises(ValueError):
            random_expr(0, -1)
