"""
Cost Expression Module

Parses and evaluates the arithmetic language cost models are written in:
numeric literals, the variables p and n, named constants, + - * / ^,
unary minus and the functions log (natural), log2, exp and sqrt.

Grammar (precedence from loosest to tightest):

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' NUMBER | '-' unary | power    # '-' NUMBER unless a '^' follows
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterator, List, Mapping, Optional, Union

from speeduplab.errors import (
    EvaluationDomainError,
    ExprSyntaxError,
    NonFiniteResultError,
    UnboundIdentifierError,
    UnknownFunctionError,
)

logger = logging.getLogger(__name__)

VARIABLES = frozenset({"p", "n"})

# Deepest tree the parser builds; evaluation and unparsing recurse once per level
MAX_DEPTH = 100


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class UnaryMinus:
    operand: "Expr"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    function: str
    argument: "Expr"


Expr = Union[Number, Variable, Constant, UnaryMinus, BinaryOp, Call]


@dataclass(frozen=True)
class Bindings:
    """
    Values for the free identifiers of an expression

    p and n must be >= 1 when bound; n may be left unbound for expressions
    in p only (growth functions).
    """

    p: float
    n: Optional[float] = None
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1):
            raise EvaluationDomainError(f"p must be a finite value >= 1, got {self.p!r}")
        if self.n is not None and not (math.isfinite(self.n) and self.n >= 1):
            raise EvaluationDomainError(f"n must be a finite value >= 1, got {self.n!r}")


# Functions

def _log(x: float) -> float:
    if x <= 0:
        raise EvaluationDomainError(f"log of non-positive value {x!r}")
    return math.log(x)


def _log2(x: float) -> float:
    if x <= 0:
        raise EvaluationDomainError(f"log2 of non-positive value {x!r}")
    return math.log2(x)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise NonFiniteResultError(f"exp({x!r}) overflows")


def _sqrt(x: float) -> float:
    if x <= 0:
        raise EvaluationDomainError(f"sqrt of non-positive value {x!r}")
    return math.sqrt(x)


FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "log": _log,
    "log2": _log2,
    "exp": _exp,
    "sqrt": _sqrt,
}


# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number, ident, op, end
    text: str
    offset: int  # 1-based


def _tokenize(source: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ExprSyntaxError(pos + 1, f"Unexpected character {source[pos]!r}")
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, match.group(), pos + 1))
        pos = match.end()
    tokens.append(_Token("end", "", len(source) + 1))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.index = 0
        self.depth = 0

    def _peek(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _at_op(self, chars: str) -> bool:
        token = self._peek()
        return token.kind == "op" and token.text in chars

    def _unexpected(self, token: _Token) -> ExprSyntaxError:
        if token.kind == "end":
            return ExprSyntaxError(token.offset, "Unexpected end of input")
        return ExprSyntaxError(token.offset, f"Unexpected {token.text!r}")

    def _expect_close(self) -> None:
        token = self._advance()
        if not (token.kind == "op" and token.text == ")"):
            raise ExprSyntaxError(token.offset, "Expected ')'")

    def _enter(self, token: _Token) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprSyntaxError(
                token.offset, f"Expression nested more than {MAX_DEPTH} levels deep"
            )

    def _at_signed_literal(self) -> bool:
        # -<literal> is a negative number; -<literal>^x stays -(<literal>^x)
        if self._peek().kind != "number":
            return False
        after = self.tokens[self.index + 1]
        return not (after.kind == "op" and after.text == "^")

    def parse(self) -> Expr:
        node = self._expr()
        token = self._peek()
        if token.kind != "end":
            raise self._unexpected(token)
        return node

    def _expr(self) -> Expr:
        node = self._term()
        chain = 0
        while self._at_op("+-"):
            token = self._advance()
            self._enter(token)
            chain += 1
            node = BinaryOp(token.text, node, self._term())
        self.depth -= chain
        return node

    def _term(self) -> Expr:
        node = self._unary()
        chain = 0
        while self._at_op("*/"):
            token = self._advance()
            self._enter(token)
            chain += 1
            node = BinaryOp(token.text, node, self._unary())
        self.depth -= chain
        return node

    def _unary(self) -> Expr:
        if self._at_op("-"):
            self._enter(self._advance())
            node: Expr
            if self._at_signed_literal():
                literal = self._atom()
                assert isinstance(literal, Number)
                node = Number(-literal.value)
            else:
                node = UnaryMinus(self._unary())
            self.depth -= 1
            return node
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self._at_op("^"):
            self._enter(self._advance())
            node = BinaryOp("^", base, self._unary())
            self.depth -= 1
            return node
        return base

    def _atom(self) -> Expr:
        token = self._advance()
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(token.offset, f"Numeric literal out of range: {token.text}")
            return Number(value)
        if token.kind == "ident":
            if self._at_op("("):
                if token.text not in FUNCTIONS:
                    raise UnknownFunctionError(token.offset, f"Unknown function {token.text!r}")
                self._enter(self._advance())
                argument = self._expr()
                self._expect_close()
                self.depth -= 1
                return Call(token.text, argument)
            if token.text in VARIABLES:
                return Variable(token.text)
            return Constant(token.text)
        if token.kind == "op" and token.text == "(":
            self._enter(token)
            node = self._expr()
            self._expect_close()
            self.depth -= 1
            return node
        raise self._unexpected(token)


def parse(source: str) -> Expr:
    """
    Parse a cost expression

    Args:
        source: Expression text, e.g. "a*n/p + b*log(p)"

    Returns:
        Expr: Abstract syntax tree

    Raises:
        ExprSyntaxError: With the 1-based offset of the offending character, or
            when the expression nests more than MAX_DEPTH levels
        UnknownFunctionError: If a call names a function other than log, log2, exp, sqrt
    """
    try:
        parser = _Parser(source)
        return parser.parse()
    except ExprSyntaxError as e:
        logger.debug(f"[EXPR] ✗ {source!r}: {e}")
        raise
    except RecursionError:
        logger.debug(f"[EXPR] ✗ {source!r}: recursion limit reached")
        token = parser.tokens[min(parser.index, len(parser.tokens) - 1)]
        raise ExprSyntaxError(token.offset, "Expression nested too deeply")


# Unparsing

def _is_negative(expr: Expr) -> bool:
    return isinstance(expr, Number) and math.copysign(1.0, expr.value) < 0


def _is_atomic(expr: Expr) -> bool:
    if isinstance(expr, Number):
        return not _is_negative(expr)
    return isinstance(expr, (Variable, Constant, Call))


def _wrap(expr: Expr) -> str:
    text = unparse(expr)
    return text if _is_atomic(expr) else f"({text})"


def unparse(expr: Expr) -> str:
    """Render an expression as source text that parses back to the same tree"""
    if isinstance(expr, Number):
        return repr(expr.value)
    if isinstance(expr, (Variable, Constant)):
        return expr.name
    if isinstance(expr, UnaryMinus):
        if isinstance(expr.operand, Number):
            # -(2.0) keeps the UnaryMinus node; -2.0 would parse as Number(-2.0)
            return f"-({unparse(expr.operand)})"
        return f"-{_wrap(expr.operand)}"
    if isinstance(expr, BinaryOp):
        return f"{_wrap(expr.left)} {expr.op} {_wrap(expr.right)}"
    if isinstance(expr, Call):
        return f"{expr.function}({unparse(expr.argument)})"
    raise TypeError(f"Not an expression node: {expr!r}")


def walk(expr: Expr) -> Iterator[Expr]:
    """Yield every node of the tree, parents before children"""
    yield expr
    if isinstance(expr, UnaryMinus):
        yield from walk(expr.operand)
    elif isinstance(expr, BinaryOp):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Call):
        yield from walk(expr.argument)


def free_identifiers(expr: Expr) -> FrozenSet[str]:
    """Names of all variables and constants referenced by the tree"""
    return frozenset(
        node.name for node in walk(expr) if isinstance(node, (Variable, Constant))
    )


def constant_names(expr: Expr) -> FrozenSet[str]:
    return frozenset(node.name for node in walk(expr) if isinstance(node, Constant))


# Evaluation

def _checked(value: float) -> float:
    if not math.isfinite(value):
        raise NonFiniteResultError(f"Non-finite intermediate result {value!r}")
    return value


def _power(base: float, exponent: float) -> float:
    if float(exponent).is_integer():
        if base == 0 and exponent < 0:
            raise EvaluationDomainError("Division by zero (0 raised to a negative power)")
    elif base <= 0:
        raise EvaluationDomainError(
            f"Non-integer power {exponent!r} of non-positive base {base!r}"
        )
    try:
        return math.pow(base, exponent)
    except OverflowError:
        raise NonFiniteResultError(f"{base!r}^{exponent!r} overflows")


def _eval(expr: Expr, bindings: Bindings) -> float:
    if isinstance(expr, Number):
        return expr.value
    if isinstance(expr, Variable):
        value = bindings.p if expr.name == "p" else bindings.n
        if value is None:
            raise UnboundIdentifierError(expr.name)
        return float(value)
    if isinstance(expr, Constant):
        try:
            return float(bindings.constants[expr.name])
        except KeyError:
            raise UnboundIdentifierError(expr.name)
    if isinstance(expr, UnaryMinus):
        return -_eval(expr.operand, bindings)
    if isinstance(expr, BinaryOp):
        left = _eval(expr.left, bindings)
        right = _eval(expr.right, bindings)
        if expr.op == "+":
            return _checked(left + right)
        if expr.op == "-":
            return _checked(left - right)
        if expr.op == "*":
            return _checked(left * right)
        if expr.op == "/":
            if right == 0:
                raise EvaluationDomainError("Division by zero")
            return _checked(left / right)
        if expr.op == "^":
            return _checked(_power(left, right))
        raise ValueError(f"Unknown operator {expr.op!r}")
    if isinstance(expr, Call):
        return _checked(FUNCTIONS[expr.function](_eval(expr.argument, bindings)))
    raise TypeError(f"Not an expression node: {expr!r}")


def evaluate(expr: Expr, bindings: Bindings) -> float:
    """
    Evaluate an expression in IEEE double precision

    Args:
        expr: Parsed expression
        bindings: Values for p, n and the named constants

    Returns:
        float: The finite result

    Raises:
        UnboundIdentifierError: If an identifier has no binding
        EvaluationDomainError: log/log2/sqrt of a non-positive value, division by zero
        NonFiniteResultError: If any intermediate result overflows
    """
    return _eval(expr, bindings)


def fold_constants(expr: Expr, constants: Mapping[str, float]) -> Expr:
    """
    Replace every subtree that does not depend on p or n by its value

    Folded subtrees are evaluated with the same operations in the same
    order, so evaluating the folded tree gives a bit-identical result.
    """
    if not any(isinstance(node, Variable) for node in walk(expr)):
        return Number(_eval(expr, Bindings(p=1.0, constants=constants)))
    if isinstance(expr, UnaryMinus):
        return UnaryMinus(fold_constants(expr.operand, constants))
    if isinstance(expr, BinaryOp):
        return BinaryOp(
            expr.op,
            fold_constants(expr.left, constants),
            fold_constants(expr.right, constants),
        )
    if isinstance(expr, Call):
        return Call(expr.function, fold_constants(expr.argument, constants))
    return expr
