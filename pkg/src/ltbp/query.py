"""Declarative graph-pattern query language: syntax tree and parser.

A strict SPARQL subset, whitespace-insensitive with case-insensitive keywords:

    query   := "SELECT" proj+ from? "WHERE" "{" pattern ("." pattern)* "."?
               filter* "}" groupby? orderby? limit?
    proj    := var | "(" AGG "(" var ")" "AS" var ")"
    AGG     := "SUM" | "AVG" | "MIN" | "MAX" | "COUNT"
    from    := "FROM" iriref                # parsed and ignored
    pattern := term term term
    term    := var | iri | literal
    filter  := "FILTER" "(" boolexpr ")"
    groupby := "GROUP" "BY" var+
    orderby := "ORDER" "BY" ("ASC" | "DESC")? var
    limit   := "LIMIT" integer

IRIs are written either in angle brackets or as prefixed names using the
built-in prefixes (``:name`` for predicates, plus ``cust:``, ``ord:``,
``prod:`` and ``class:`` for entities). Filters support comparisons,
arithmetic, and ``&&`` / ``||`` / ``!``. ``#`` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Union

from .terms import Iri, Literal, PREFIXES, Term, Variable


class QueryError(Exception):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownAggregateError(QuerySyntaxError):
    pass


class QueryValidationError(QueryError):
    pass


class UnboundProjectionError(QueryValidationError):
    pass


# --- filter expression AST -------------------------------------------------


@dataclass(frozen=True, slots=True)
class VarRef:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    value: Union[str, int, Decimal]


@dataclass(frozen=True, slots=True)
class Compare:
    op: str  # = != < <= > >=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Arith:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True, slots=True)
class BoolOp:
    op: str  # && ||
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True, slots=True)
class Not:
    operand: "Expr"


Expr = Union[VarRef, Const, Compare, Arith, Neg, BoolOp, Not]


def render_expr(expr: Expr) -> str:
    """Source-like rendering of a filter expression, for error messages."""
    if isinstance(expr, VarRef):
        return f"?{expr.name}"
    if isinstance(expr, Const):
        return f'"{expr.value}"' if isinstance(expr.value, str) else str(expr.value)
    if isinstance(expr, Compare):
        return f"{render_expr(expr.left)} {expr.op} {render_expr(expr.right)}"
    if isinstance(expr, Arith):
        return f"({render_expr(expr.left)} {expr.op} {render_expr(expr.right)})"
    if isinstance(expr, Neg):
        return f"-{render_expr(expr.operand)}"
    if isinstance(expr, BoolOp):
        return f"({render_expr(expr.left)} {expr.op} {render_expr(expr.right)})"
    if isinstance(expr, Not):
        return f"!{render_expr(expr.operand)}"
    raise TypeError(f"not an expression: {expr!r}")


def expr_variables(expr: Expr) -> set[str]:
    if isinstance(expr, VarRef):
        return {expr.name}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, (Compare, Arith, BoolOp)):
        return expr_variables(expr.left) | expr_variables(expr.right)
    if isinstance(expr, (Neg, Not)):
        return expr_variables(expr.operand)
    raise TypeError(f"not an expression: {expr!r}")


# --- query spec ------------------------------------------------------------

AGGREGATE_FUNCS = ("SUM", "AVG", "MIN", "MAX", "COUNT")


@dataclass(frozen=True, slots=True)
class Aggregate:
    func: str  # one of AGGREGATE_FUNCS
    var: str
    alias: str


Projection = Union[str, Aggregate]  # bare variable name or aggregate


@dataclass(frozen=True, slots=True)
class OrderBy:
    key: str  # variable or aggregate alias
    descending: bool = False


@dataclass(frozen=True)
class QuerySpec:
    projections: tuple[Projection, ...]
    patterns: tuple[TriplePattern, ...]
    filters: tuple[Expr, ...] = ()
    group_by: tuple[str, ...] = ()
    order_by: OrderBy | None = None
    limit: int | None = None

    @property
    def aggregates(self) -> tuple[Aggregate, ...]:
        return tuple(p for p in self.projections if isinstance(p, Aggregate))

    @property
    def aliases(self) -> tuple[str, ...]:
        return tuple(a.alias for a in self.aggregates)

    def pattern_variables(self) -> set[str]:
        names = set()
        for pattern in self.patterns:
            for term in pattern:
                if isinstance(term, Variable):
                    names.add(term.name)
        return names

    def validate(self) -> None:
        if not self.projections:
            raise QueryValidationError("query projects nothing")
        if not self.patterns:
            raise QueryValidationError("query has no patterns")
        bound = self.pattern_variables()
        bare = [p for p in self.projections if isinstance(p, str)]
        for name in bare:
            if name not in bound:
                raise UnboundProjectionError(
                    f"projected variable ?{name} does not occur in any pattern"
                )
        for agg in self.aggregates:
            if agg.var not in bound:
                raise UnboundProjectionError(
                    f"aggregated variable ?{agg.var} does not occur in any pattern"
                )
        for expr in self.filters:
            for name in sorted(expr_variables(expr)):
                if name not in bound:
                    raise QueryValidationError(
                        f"filter variable ?{name} does not occur in any pattern"
                    )
        for name in self.group_by:
            if name not in bound:
                raise QueryValidationError(
                    f"grouping variable ?{name} does not occur in any pattern"
                )
        if self.aggregates or self.group_by:
            uncovered = [name for name in bare if name not in self.group_by]
            if uncovered:
                raise QueryValidationError(
                    "bare projections in an aggregated query must be grouped: "
                    + ", ".join(f"?{n}" for n in uncovered)
                )
        if self.order_by is not None:
            key = self.order_by.key
            if key not in self.aliases and key not in bound:
                raise QueryValidationError(
                    f"order key ?{key} is neither a pattern variable nor an alias"
                )
        if self.limit is not None and self.limit < 0:
            raise QueryValidationError("limit must be >= 0")


TriplePattern = tuple  # (Term, Term, Term)


# --- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<COMMENT>\#[^\n]*)
    | (?P<VAR>\?[A-Za-z_][A-Za-z0-9_]*)
    | (?P<IRIREF><[^<>\s]*>)
    | (?P<QNAME>(?:[A-Za-z_][A-Za-z0-9_]*)?:[A-Za-z0-9_][A-Za-z0-9_.\-]*)
    | (?P<NUMBER>\d+(?:\.\d+)?)
    | (?P<STRING>"(?:[^"\\\n]|\\.)*")
    | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<OP>&&|\|\||<=|>=|!=|[{}().=<>!+\-*/])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "SELECT", "WHERE", "FILTER", "GROUP", "ORDER", "BY",
    "ASC", "DESC", "LIMIT", "AS", "FROM",
}


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            ch = text[pos]
            if ch == '"':
                raise QuerySyntaxError("unterminated string literal", line, col)
            raise QuerySyntaxError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


# --- recursive-descent parser ----------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> QuerySyntaxError:
        tok = tok or self.peek()
        return QuerySyntaxError(message, tok.line, tok.column)

    def at_keyword(self, *names: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.value.upper() in names

    def expect_keyword(self, name: str) -> _Token:
        if not self.at_keyword(name):
            found = self.peek().value or "end of input"
            raise self.error(f"expected {name}, found {found!r}")
        return self.next()

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.value in ops

    def expect_op(self, op: str) -> _Token:
        if not self.at_op(op):
            found = self.peek().value or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}")
        return self.next()

    # query := SELECT proj+ from? WHERE { patterns filters } tail
    def parse(self) -> QuerySpec:
        self.expect_keyword("SELECT")
        projections = [self.projection()]
        while self.peek().kind == "VAR" or self.at_op("("):
            projections.append(self.projection())
        if self.at_keyword("FROM"):
            self.next()
            tok = self.peek()
            if tok.kind != "IRIREF":
                raise self.error("expected an IRI after FROM")
            self.next()  # named graphs are not supported; single default graph
        self.expect_keyword("WHERE")
        self.expect_op("{")
        patterns = [self.pattern()]
        if self.at_op("."):
            self.next()
        while not (self.at_op("}") or self.at_keyword("FILTER")):
            if self.peek().kind == "EOF":
                raise self.error("unterminated WHERE block, expected '}'")
            patterns.append(self.pattern())
            if self.at_op("."):
                self.next()
        filters = []
        while self.at_keyword("FILTER"):
            self.next()
            self.expect_op("(")
            filters.append(self.bool_expr())
            self.expect_op(")")
        self.expect_op("}")
        group_by: tuple[str, ...] = ()
        if self.at_keyword("GROUP"):
            self.next()
            self.expect_keyword("BY")
            names = [self.variable()]
            while self.peek().kind == "VAR":
                names.append(self.variable())
            group_by = tuple(names)
        order_by = None
        if self.at_keyword("ORDER"):
            self.next()
            self.expect_keyword("BY")
            descending = False
            if self.at_keyword("ASC", "DESC"):
                descending = self.next().value.upper() == "DESC"
            order_by = OrderBy(self.variable(), descending)
        limit = None
        if self.at_keyword("LIMIT"):
            self.next()
            tok = self.peek()
            if tok.kind != "NUMBER" or "." in tok.value:
                raise self.error("expected an integer after LIMIT")
            self.next()
            limit = int(tok.value)
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error(f"unexpected trailing input {tok.value!r}", tok)
        return QuerySpec(
            projections=tuple(projections),
            patterns=tuple(patterns),
            filters=tuple(filters),
            group_by=group_by,
            order_by=order_by,
            limit=limit,
        )

    def variable(self) -> str:
        tok = self.peek()
        if tok.kind != "VAR":
            found = tok.value or "end of input"
            raise self.error(f"expected a variable, found {found!r}")
        self.next()
        return tok.value[1:]

    def projection(self) -> Projection:
        if self.peek().kind == "VAR":
            return self.variable()
        self.expect_op("(")
        tok = self.peek()
        if tok.kind != "IDENT":
            raise self.error("expected an aggregate function name")
        func = tok.value.upper()
        if func not in AGGREGATE_FUNCS:
            raise UnknownAggregateError(
                f"unknown aggregate function {tok.value!r}", tok.line, tok.column
            )
        self.next()
        self.expect_op("(")
        var = self.variable()
        self.expect_op(")")
        self.expect_keyword("AS")
        alias = self.variable()
        self.expect_op(")")
        return Aggregate(func, var, alias)

    def pattern(self) -> TriplePattern:
        return (self.term(), self.term(), self.term())

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return Variable(tok.value[1:])
        if tok.kind == "IRIREF":
            self.next()
            return Iri(tok.value[1:-1])
        if tok.kind == "QNAME":
            self.next()
            prefix, _, local = tok.value.partition(":")
            base = PREFIXES.get(prefix)
            if base is None:
                raise self.error(f"unknown prefix {prefix!r}", tok)
            return Iri(base + local)
        if tok.kind == "NUMBER":
            self.next()
            return Literal(self.number_value(tok))
        if tok.kind == "STRING":
            self.next()
            return Literal(_unescape_string(tok))
        found = tok.value or "end of input"
        raise self.error(f"expected a term, found {found!r}")

    @staticmethod
    def number_value(tok: _Token) -> Union[int, Decimal]:
        return Decimal(tok.value) if "." in tok.value else int(tok.value)

    # boolexpr := andexpr ("||" andexpr)*
    def bool_expr(self) -> Expr:
        expr = self.and_expr()
        while self.at_op("||"):
            self.next()
            expr = BoolOp("||", expr, self.and_expr())
        return expr

    def and_expr(self) -> Expr:
        expr = self.not_expr()
        while self.at_op("&&"):
            self.next()
            expr = BoolOp("&&", expr, self.not_expr())
        return expr

    def not_expr(self) -> Expr:
        if self.at_op("!"):
            self.next()
            return Not(self.not_expr())
        return self.comparison()

    def comparison(self) -> Expr:
        expr = self.additive()
        if self.at_op("=", "!=", "<", "<=", ">", ">="):
            op = self.next().value
            return Compare(op, expr, self.additive())
        return expr

    def additive(self) -> Expr:
        expr = self.multiplicative()
        while self.at_op("+", "-"):
            op = self.next().value
            expr = Arith(op, expr, self.multiplicative())
        return expr

    def multiplicative(self) -> Expr:
        expr = self.unary()
        while self.at_op("*", "/"):
            op = self.next().value
            expr = Arith(op, expr, self.unary())
        return expr

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.next()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "VAR":
            self.next()
            return VarRef(tok.value[1:])
        if tok.kind == "NUMBER":
            self.next()
            return Const(self.number_value(tok))
        if tok.kind == "STRING":
            self.next()
            return Const(_unescape_string(tok))
        if self.at_op("("):
            self.next()
            expr = self.bool_expr()
            self.expect_op(")")
            return expr
        found = tok.value or "end of input"
        raise self.error(f"expected an expression, found {found!r}")


_STRING_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unescape_string(tok: _Token) -> str:
    body = tok.value[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            i += 1
            esc = body[i] if i < len(body) else ""
            if esc not in _STRING_ESCAPES:
                raise QuerySyntaxError(
                    f"invalid string escape \\{esc}", tok.line, tok.column
                )
            out.append(_STRING_ESCAPES[esc])
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def parse_query(text: str) -> QuerySpec:
    """Parse and validate a query; raises QuerySyntaxError / QueryValidationError."""
    spec = _Parser(text).parse()
    spec.validate()
    return spec
