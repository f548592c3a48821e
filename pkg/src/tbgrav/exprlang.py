"""Scalar expression language for metric and potential components.

Grammar (EBNF, also documented in the README):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := primary ('^' factor)?
    primary := number | ident | ident '(' expr ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so ``-r^2``
means ``-(r^2)``.  Known functions: sqrt, sin, cos, exp, ln, abs.  Angles
are radians.  Expressions evaluate over jets, so every parse tree doubles
as a derivative program.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EvaluationError, ParseError
from .jets import Jet

FUNCTIONS = ("sqrt", "sin", "cos", "exp", "ln", "abs")

# -- syntax tree -------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Unary:
    fn: str  # 'neg' or one of FUNCTIONS
    child: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


Expr = Const | Sym | Unary | Binary

# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # 'num' | 'ident' | one of "+-*/^()" | 'end'
    text: str
    span: tuple[int, int]


def _byte_span(source: str, begin: int, end: int) -> tuple[int, int]:
    """Convert character offsets to byte offsets into the UTF-8 source."""
    return len(source[:begin].encode()), len(source[:end].encode())


def _tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            bad = pos + (len(source[pos:]) - len(stripped))
            raise ParseError(
                f"unexpected character {source[bad]!r}",
                span=_byte_span(source, bad, bad + 1),
            )
        if m.lastgroup == "op":
            kind = m.group("op")
        else:
            kind = m.lastgroup
        tokens.append(
            Token(
                kind,
                m.group(m.lastgroup),
                _byte_span(source, m.start(m.lastgroup), m.end(m.lastgroup)),
            )
        )
        pos = m.end()
    span_end = len(source.encode())
    tokens.append(Token("end", "", (span_end, span_end)))
    return tokens


# -- parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def _expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {self.cur.text or 'end of input'!r}",
                span=self.cur.span,
                expected={kind},
            )
        return self._advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.cur.kind != "end":
            raise ParseError(
                f"unexpected trailing input {self.cur.text!r}",
                span=self.cur.span,
                expected={"end"},
            )
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.cur.kind in ("+", "-"):
            op = self._advance().kind
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.cur.kind in ("*", "/"):
            op = self._advance().kind
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.cur.kind == "-":
            self._advance()
            return Unary("neg", self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.cur.kind == "^":
            self._advance()
            return Binary("^", base, self.factor())
        return base

    def primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self._advance()
            return Const(float(tok.text))
        if tok.kind == "ident":
            self._advance()
            if self.cur.kind == "(":
                if tok.text not in FUNCTIONS:
                    raise ParseError(
                        f"unknown function {tok.text!r}",
                        span=tok.span,
                        expected=set(FUNCTIONS),
                    )
                self._advance()
                arg = self.expr()
                self._expect(")")
                return Unary(tok.text, arg)
            return Sym(tok.text)
        if tok.kind == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        raise ParseError(
            f"expected a value, found {tok.text or 'end of input'!r}",
            span=tok.span,
            expected={"num", "ident", "("},
        )


def parse(source: str) -> Expr:
    """Parse UTF-8 source text into an expression tree."""
    if not isinstance(source, str):
        raise ParseError("expression source must be text", span=(0, 0))
    return _Parser(source).parse()


# -- evaluation --------------------------------------------------------------


def evaluate(expr: Expr, env: dict[str, Jet]) -> Jet:
    """Evaluate the tree over jets; every symbol must be bound in env."""
    if isinstance(expr, Const):
        probe = next(iter(env.values()), None)
        if probe is None:
            raise EvaluationError("evaluation environment must bind at least one jet")
        return Jet.constant(expr.value, probe.order, probe.nvars)
    if isinstance(expr, Sym):
        try:
            return env[expr.name]
        except KeyError:
            raise EvaluationError(f"unbound symbol {expr.name!r}") from None
    if isinstance(expr, Unary):
        child = evaluate(expr.child, env)
        if expr.fn == "neg":
            return -child
        return getattr(child, expr.fn)()
    op, left, right = expr.op, expr.left, expr.right
    if op == "^":
        base = evaluate(left, env)
        exponent = evaluate(right, env)
        if not exponent.c[1:].any():  # constant exponent: exact power rule
            return base.pow_const(exponent.value)
        return (exponent * base.ln()).exp()
    a = evaluate(left, env)
    b = evaluate(right, env)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a / b


def free_symbols(expr: Expr) -> set[str]:
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Sym):
        return {expr.name}
    if isinstance(expr, Unary):
        return free_symbols(expr.child)
    return free_symbols(expr.left) | free_symbols(expr.right)


# -- canonical printer --------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 2, "^": 4}


def _print(expr: Expr, parent_prec: int, right_side: bool) -> str:
    if isinstance(expr, Const):
        text = repr(expr.value)
        return text[:-2] if text.endswith(".0") else text
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, Unary):
        if expr.fn == "neg":
            inner = _print(expr.child, _PREC["neg"], True)
            text = f"-{inner}"
            return f"({text})" if parent_prec > _PREC["neg"] or right_side else text
        return f"{expr.fn}({_print(expr.child, 0, False)})"
    prec = _PREC[expr.op]
    if expr.op == "^":
        left = _print(expr.left, prec + 1, False)
        right = _print(expr.right, prec, False)
    else:
        left = _print(expr.left, prec, False)
        right = _print(expr.right, prec + 1, False)
    text = f"{left} {expr.op} {right}" if expr.op in "+-" else f"{left}{expr.op}{right}"
    return f"({text})" if parent_prec > prec else text


def print_expr(expr: Expr) -> str:
    """Canonical text form; parse(print_expr(e)) rebuilds an equal tree."""
    return _print(expr, 0, False)
