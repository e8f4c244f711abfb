"""Problem-file and expression parsing.

Line-oriented file grammar:

    even <name> <name> ...
    odd <name> ...
    lagrangian: <expr>
    constraint: <expr>        (repeatable)
    # comment

Expressions use rationals ``a/b``, identifiers, ``+ - * ^`` with
nonnegative integer exponents, and parentheses.  Juxtaposition is not
multiplication; ``*`` is mandatory.  The written order of odd factors
is significant and is preserved into normal-form conversion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .algebra import Chart, SupermechError, Superfunction

NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")
DERIVED_PREFIXES = ("v_", "p_", "zeta_", "eta_")


class ProblemSyntaxError(SupermechError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.bare_message = message


# -- expression AST -----------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction
    line: int
    col: int


@dataclass(frozen=True)
class Var:
    name: str
    line: int
    col: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    line: int
    col: int


@dataclass(frozen=True)
class Bin:
    op: str  # '+', '-', '*'
    left: "Expr"
    right: "Expr"
    line: int
    col: int


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    line: int
    col: int


Expr = Union[Num, Var, Neg, Bin, Pow]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[a-zA-Z][a-zA-Z0-9_]*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Token:
    kind: str  # 'int' | 'name' | one of the operator characters | 'end'
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col_offset: int = 0) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = col_offset + pos + (len(text[pos:]) - len(stripped)) + 1
            raise ProblemSyntaxError(f"unexpected character {stripped[0]!r}", line, col)
        pos = m.end()
        if m.lastgroup == "int":
            tokens.append(_Token("int", m.group("int"), line, col_offset + m.start("int") + 1))
        elif m.lastgroup == "name":
            tokens.append(_Token("name", m.group("name"), line, col_offset + m.start("name") + 1))
        else:
            op = m.group("op")
            tokens.append(_Token(op, op, line, col_offset + m.start("op") + 1))
    tokens.append(_Token("end", "", line, col_offset + len(text) + 1))
    return tokens


class _ExprParser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ProblemSyntaxError(
                f"expected {kind!r}, found {tok.text or 'end of expression'!r}",
                tok.line,
                tok.col,
            )
        return tok

    def parse(self) -> Expr:
        expr = self.sum()
        tok = self.peek()
        if tok.kind != "end":
            hint = ""
            if tok.kind in ("name", "int", "("):
                hint = " (implicit multiplication is not allowed; write '*')"
            raise ProblemSyntaxError(f"unexpected {tok.text!r}{hint}", tok.line, tok.col)
        return expr

    def sum(self) -> Expr:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            tok = self.next()
            rhs = self.term()
            node = Bin(tok.kind, node, rhs, tok.line, tok.col)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "*":
            tok = self.next()
            rhs = self.unary()
            node = Bin("*", node, rhs, tok.line, tok.col)
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "-":
            self.next()
            return Neg(self.unary(), tok.line, tok.col)
        if tok.kind == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().kind == "^":
            tok = self.next()
            exp = self.expect("int")
            return Pow(base, int(exp.text), tok.line, tok.col)
        return base

    def atom(self) -> Expr:
        tok = self.next()
        if tok.kind == "int":
            value = Fraction(int(tok.text))
            if self.peek().kind == "/":
                self.next()
                denom = self.expect("int")
                if int(denom.text) == 0:
                    raise ProblemSyntaxError("zero denominator", denom.line, denom.col)
                value = Fraction(int(tok.text), int(denom.text))
            return Num(value, tok.line, tok.col)
        if tok.kind == "name":
            return Var(tok.text, tok.line, tok.col)
        if tok.kind == "(":
            inner = self.sum()
            closing = self.next()
            if closing.kind != ")":
                raise ProblemSyntaxError("unbalanced parenthesis", closing.line, closing.col)
            return inner
        if tok.kind == "/":
            raise ProblemSyntaxError(
                "'/' is only allowed inside a rational literal a/b", tok.line, tok.col
            )
        raise ProblemSyntaxError(
            f"unexpected {tok.text or 'end of expression'!r}", tok.line, tok.col
        )


def parse_expression(text: str, line: int = 1, col_offset: int = 0) -> Expr:
    return _ExprParser(_tokenize(text, line, col_offset)).parse()


def to_superfunction(expr: Expr, chart: Chart) -> Superfunction:
    """Resolve an AST against a chart; unknown identifiers carry positions."""
    if isinstance(expr, Num):
        return Superfunction.constant(chart, expr.value)
    if isinstance(expr, Var):
        if not chart.has_generator(expr.name):
            raise ProblemSyntaxError(
                f"unknown identifier {expr.name!r}", expr.line, expr.col
            )
        return Superfunction.generator(chart, expr.name)
    if isinstance(expr, Neg):
        return -to_superfunction(expr.operand, chart)
    if isinstance(expr, Bin):
        left = to_superfunction(expr.left, chart)
        right = to_superfunction(expr.right, chart)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        return left * right
    if isinstance(expr, Pow):
        return to_superfunction(expr.base, chart) ** expr.exponent
    raise SupermechError(f"unhandled expression node {expr!r}")


def parse_and_resolve(text: str, chart: Chart, line: int = 1) -> Superfunction:
    return to_superfunction(parse_expression(text, line), chart)


# -- problem files -------------------------------------------------------


@dataclass
class ProblemFile:
    even_names: list[str] = field(default_factory=list)
    odd_names: list[str] = field(default_factory=list)
    lagrangian_text: str = ""
    lagrangian_line: int = 0
    constraint_texts: list[tuple[str, int]] = field(default_factory=list)
    options: dict = field(default_factory=dict)
    source: str = "<input>"


_DIRECTIVE_RE = re.compile(r"^\s*(even|odd|lagrangian|constraint)\b\s*(:?)\s*(.*)$")


def parse_problem(text: str, source: str = "<input>") -> ProblemFile:
    pf = ProblemFile(source=source)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _DIRECTIVE_RE.match(line)
        if m is None:
            first = line.strip().split()[0]
            col = line.index(first) + 1
            raise ProblemSyntaxError(f"unknown directive {first!r}", line_no, col)
        keyword, colon, rest = m.groups()
        if keyword in ("even", "odd"):
            if colon:
                raise ProblemSyntaxError(f"{keyword!r} takes no ':'", line_no, line.index(":") + 1)
            names = rest.split()
            if not names:
                raise ProblemSyntaxError(f"{keyword!r} needs at least one name", line_no, 1)
            for name in names:
                col = line.index(name) + 1
                if not NAME_RE.match(name):
                    raise ProblemSyntaxError(f"invalid name {name!r}", line_no, col)
                if name.startswith(DERIVED_PREFIXES):
                    raise ProblemSyntaxError(
                        f"name {name!r} collides with derived prefixes {DERIVED_PREFIXES}",
                        line_no,
                        col,
                    )
                if name in pf.even_names or name in pf.odd_names:
                    raise ProblemSyntaxError(f"duplicate name {name!r}", line_no, col)
                (pf.even_names if keyword == "even" else pf.odd_names).append(name)
        elif keyword == "lagrangian":
            if not colon:
                raise ProblemSyntaxError("expected ':' after 'lagrangian'", line_no, 1)
            if pf.lagrangian_text:
                raise ProblemSyntaxError("duplicate 'lagrangian' directive", line_no, 1)
            if not rest.strip():
                raise ProblemSyntaxError("empty Lagrangian expression", line_no, len(line))
            parse_expression(rest, line_no)  # syntax check now, resolution later
            pf.lagrangian_text = rest.strip()
            pf.lagrangian_line = line_no
        else:
            if not colon:
                raise ProblemSyntaxError("expected ':' after 'constraint'", line_no, 1)
            if not rest.strip():
                raise ProblemSyntaxError("empty constraint expression", line_no, len(line))
            parse_expression(rest, line_no)
            pf.constraint_texts.append((rest.strip(), line_no))
    if not pf.lagrangian_text:
        raise ProblemSyntaxError("missing 'lagrangian:' directive", 1, 1)
    return pf
