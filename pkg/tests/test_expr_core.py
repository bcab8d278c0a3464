"""
Unit tests for the cost expression module
"""

import math

import numpy as np
import pytest

from speeduplab.errors import (
    EvaluationDomainError,
    ExprSyntaxError,
    NonFiniteResultError,
    UnboundIdentifierError,
    UnknownFunctionError,
)
from speeduplab.expr_core import (
    MAX_DEPTH,
    BinaryOp,
    Bindings,
    Call,
    Constant,
    Number,
    UnaryMinus,
    Variable,
    constant_names,
    evaluate,
    fold_constants,
    free_identifiers,
    parse,
    unparse,
)


def value_of(source, p=2.0, n=None, **constants):
    return evaluate(parse(source), Bindings(p=p, n=n, constants=constants))


class TestParse:
    """Test cases for parsing"""

    def test_trapezoid_model_tree(self):
        """Test the trapezoid model parses into the expected tree"""
        tree = parse("a*n/p + b*log(p)")

        assert tree == BinaryOp(
            "+",
            BinaryOp("/", BinaryOp("*", Constant("a"), Variable("n")), Variable("p")),
            BinaryOp("*", Constant("b"), Call("log", Variable("p"))),
        )

    def test_precedence_and_associativity(self):
        """Test * binds tighter than +, and ^ is right-associative"""
        assert value_of("2+3*4") == 14
        assert value_of("(2+3)*4") == 20
        assert value_of("2^3^2") == 512
        assert value_of("8/4/2") == 1

    def test_unary_minus_binds_looser_than_power(self):
        """Test -2^2 is -(2^2) and a negative exponent is allowed"""
        assert value_of("-2^2") == -4
        assert value_of("2^-1") == 0.5
        assert parse("-p") == UnaryMinus(Variable("p"))

    def test_scientific_literals(self):
        """Test numeric literals with exponents"""
        assert value_of("1.5e3") == 1500
        assert value_of(".5") == 0.5

    def test_unexpected_end_reports_offset(self):
        """Test a dangling operator reports the end offset"""
        with pytest.raises(ExprSyntaxError) as exc_info:
            parse("2 +")
        assert exc_info.value.offset == 4

    def test_unexpected_character_reports_offset(self):
        """Test an illegal character reports its 1-based offset"""
        with pytest.raises(ExprSyntaxError) as exc_info:
            parse("2 $ 3")
        assert exc_info.value.offset == 3

    def test_missing_close_paren(self):
        """Test an unclosed parenthesis is a syntax error"""
        with pytest.raises(ExprSyntaxError, match="Expected '\\)'"):
            parse("(p")

    def test_unknown_function(self):
        """Test calling an unknown function"""
        with pytest.raises(UnknownFunctionError) as exc_info:
            parse("foo(p)")
        assert exc_info.value.offset == 1

    def test_out_of_range_literal(self):
        """Test a literal that overflows a double is rejected at parse time"""
        with pytest.raises(ExprSyntaxError, match="out of range"):
            parse("1e999")

    def test_trailing_tokens(self):
        """Test input that continues after a complete expression"""
        with pytest.raises(ExprSyntaxError):
            parse("p n")

    def test_deep_parentheses_are_a_syntax_error(self):
        """Test thousands of nested parentheses fail at the first level past the limit"""
        source = "(" * 5000 + "p" + ")" * 5000

        with pytest.raises(ExprSyntaxError, match="nested") as exc_info:
            parse(source)
        assert exc_info.value.offset == MAX_DEPTH + 1

    @pytest.mark.parametrize("source", [
        "-" * 5000 + "p",
        "p" + "+p" * 5000,
        "p" + "*p" * 5000,
        "2^" * 5000 + "p",
        "log(" * 5000 + "p" + ")" * 5000,
    ])
    def test_deep_trees_are_syntax_errors(self, source):
        """Test every construct that deepens the tree is bounded"""
        with pytest.raises(ExprSyntaxError, match="nested"):
            parse(source)

    def test_nesting_within_limit(self):
        """Test nesting below the limit parses and evaluates"""
        tree = parse("(" * (MAX_DEPTH // 2) + "p" + ")" * (MAX_DEPTH // 2))

        assert tree == Variable("p")
        assert evaluate(parse("p" + "+p" * (MAX_DEPTH - 1)), Bindings(p=2.0)) == 2.0 * MAX_DEPTH

    def test_negative_literal(self):
        """Test a minus directly before a literal gives a negative number"""
        assert parse("-2") == Number(-2.0)
        assert parse("2^-1") == BinaryOp("^", Number(2.0), Number(-1.0))
        assert parse("-2*p") == BinaryOp("*", Number(-2.0), Variable("p"))
        assert parse("-(2)") == UnaryMinus(Number(2.0))
        assert parse("-2^2") == UnaryMinus(BinaryOp("^", Number(2.0), Number(2.0)))


class TestEvaluate:
    """Test cases for evaluation"""

    def test_trapezoid_value(self):
        """Test a*n/p + b*log(p) at p=4, n=100"""
        result = value_of("a*n/p + b*log(p)", p=4.0, n=100.0, a=1.0, b=1.0)

        assert result == pytest.approx(25 + math.log(4), rel=1e-15)

    def test_functions(self):
        """Test log, log2, exp and sqrt"""
        assert value_of("log2(p)", p=1024.0) == 10
        assert value_of("exp(log(p))", p=3.0) == pytest.approx(3.0)
        assert value_of("sqrt(p)", p=16.0) == 4

    def test_unbound_constant(self):
        """Test a constant without a value"""
        with pytest.raises(UnboundIdentifierError) as exc_info:
            value_of("c*p")
        assert exc_info.value.name == "c"

    def test_unbound_dimension(self):
        """Test n used without a binding"""
        with pytest.raises(UnboundIdentifierError, match="n"):
            value_of("n + p")

    @pytest.mark.parametrize("source", ["log(p-1)", "log2(p-1)", "sqrt(p-1)", "1/(p-1)", "(p-1)^-1"])
    def test_domain_errors(self, source):
        """Test operations outside their domain at p=1"""
        with pytest.raises(EvaluationDomainError):
            value_of(source, p=1.0)

    def test_non_integer_power_of_negative_base(self):
        """Test (-8)^(1/3) is a domain error"""
        with pytest.raises(EvaluationDomainError):
            value_of("(1-9*p)^(1/3)", p=1.0)

    @pytest.mark.parametrize("source", ["exp(p)", "p^400", "10^300*10^300"])
    def test_overflow_is_non_finite(self, source):
        """Test overflowing intermediates raise instead of returning inf"""
        with pytest.raises(NonFiniteResultError):
            value_of(source, p=1000.0)

    def test_bindings_reject_small_values(self):
        """Test p and n must be at least 1"""
        with pytest.raises(EvaluationDomainError):
            Bindings(p=0.5)
        with pytest.raises(EvaluationDomainError):
            Bindings(p=2.0, n=0.0)
        with pytest.raises(EvaluationDomainError):
            Bindings(p=float("inf"))


class TestTreeUtilities:
    """Test cases for unparse, identifiers and constant folding"""

    @pytest.mark.parametrize("source", [
        "a*n/p + b*log(p)",
        "a*(2*n^2 - n)/p + b*(n^2 + n)",
        "-2^2",
        "2^-1",
        "B*n*log2(n)",
        "-(p - 1e-07)",
    ])
    def test_unparse_parses_back(self, source):
        """Test unparse output parses to the same tree"""
        tree = parse(source)

        assert parse(unparse(tree)) == tree

    def test_free_identifiers(self):
        """Test variables and constants are collected, functions are not"""
        tree = parse("a*n/p + b*log(p)")

        assert free_identifiers(tree) == {"a", "b", "n", "p"}
        assert constant_names(tree) == {"a", "b"}

    def test_fold_constants(self):
        """Test constant subtrees collapse to numbers without changing results"""
        tree = parse("(a+b)*n/p + sqrt(a)")
        constants = {"a": 4.0, "b": 2.0}

        folded = fold_constants(tree, constants)

        assert folded.left.left.left == Number(6.0)
        assert folded.right == Number(2.0)
        assert free_identifiers(folded) == {"n", "p"}
        bindings = Bindings(p=3.0, n=7.0, constants=constants)
        assert evaluate(folded, bindings) == evaluate(tree, bindings)

    @pytest.mark.parametrize("tree", [
        Number(-2.0),
        UnaryMinus(Number(2.0)),
        UnaryMinus(Number(-2.0)),
        BinaryOp("^", Number(-2.0), Variable("p")),
        BinaryOp("-", Variable("p"), Number(-1e-07)),
        BinaryOp("*", UnaryMinus(Number(0.5)), Call("log", Number(-3.0))),
    ])
    def test_negative_numbers_parse_back(self, tree):
        """Test negative literals and negated literals keep their shape through unparse"""
        assert parse(unparse(tree)) == tree

    def test_folded_negative_constant_parses_back(self):
        """Test a subtree folded to a negative value renders as source for the same tree"""
        tree = parse("p + (0 - a)*n")
        constants = {"a": 2.0}

        folded = fold_constants(tree, constants)

        assert folded.right.left == Number(-2.0)
        assert parse(unparse(folded)) == folded
        bindings = Bindings(p=3.0, n=5.0, constants=constants)
        assert evaluate(parse(unparse(folded)), bindings) == evaluate(tree, bindings)


def random_tree(rng, depth):
    """Random expression tree at most depth levels deep"""
    if depth == 0 or rng.random() < 0.25:
        leaf = rng.integers(3)
        if leaf == 0:
            magnitude = float(rng.choice([0.5, 1.0, 2.0, 3.25, 1e-07, 1e16]))
            return Number(magnitude if rng.random() < 0.5 else -magnitude)
        if leaf == 1:
            return Variable(str(rng.choice(["p", "n"])))
        return Constant(str(rng.choice(["a", "b", "c_2"])))
    kind = rng.integers(3)
    if kind == 0:
        return UnaryMinus(random_tree(rng, depth - 1))
    if kind == 1:
        return Call(str(rng.choice(["log", "log2", "exp", "sqrt"])), random_tree(rng, depth - 1))
    return BinaryOp(
        str(rng.choice(["+", "-", "*", "/", "^"])),
        random_tree(rng, depth - 1),
        random_tree(rng, depth - 1),
    )


class TestRoundTrip:
    """Test cases for unparse over generated trees"""

    @pytest.mark.parametrize("seed", range(20))
    def test_random_trees_parse_back(self, seed):
        """Test parse(unparse(tree)) == tree and unparse is stable, for trees up to depth 8"""
        rng = np.random.default_rng(seed)

        for _ in range(25):
            tree = random_tree(rng, 8)
            text = unparse(tree)

            assert parse(text) == tree, text
            assert unparse(parse(text)) == text

    @pytest.mark.parametrize("seed", range(10))
    def test_token_soup_parses_or_reports_offset(self, seed):
        """Test arbitrary token sequences either parse or fail with an offset inside the input"""
        rng = np.random.default_rng(seed)
        pieces = ["p", "n", "a", "2", "0.5", "1e3", "+", "-", "*", "/", "^", "(", ")", "log(", "sqrt(", " "]

        for _ in range(200):
            source = "".join(str(piece) for piece in rng.choice(pieces, size=int(rng.integers(1, 16))))
            try:
                tree = parse(source)
            except ExprSyntaxError as e:
                assert 1 <= e.offset <= len(source) + 1, source
            else:
                assert parse(unparse(tree)) == tree, source
