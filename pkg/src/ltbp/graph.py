"""In-memory triple store: entity assertion, pattern matching, aggregation.

Triples follow the domain ontology: orders link to customers and products via
``wasPlacedBy`` / ``containsProduct``; data properties carry codes, dates,
quantities, and prices. Matching is a natural join over triple patterns with
shared variables; evaluation adds filters, grouping, aggregates, ordering,
and limits. Monetary aggregation is exact fixed-point decimal.

Iteration order everywhere is insertion order, so results are deterministic
for a deterministically built graph regardless of hash randomization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from typing import Iterable, Iterator, Optional, Sequence, Union

from . import terms as T
from .model import Customer, Order, PricingConfig, Product, adjustment_factor, to_factor
from .query import (
    Arith,
    BoolOp,
    Compare,
    Const,
    Expr,
    Neg,
    Not,
    QueryError,
    QuerySpec,
    VarRef,
    render_expr,
)
from .terms import Iri, Literal, Triple, Variable

BindingValue = Union[Iri, str, int, Decimal, date]
Binding = dict  # variable name -> BindingValue


class GraphError(Exception):
    pass


class DuplicateSubjectError(GraphError):
    pass


class DanglingReferenceError(GraphError):
    pass


class UnknownOrderError(GraphError):
    pass


class GraphFrozenError(GraphError):
    pass


class GraphParseError(GraphError):
    pass


class EvaluationError(QueryError):
    pass


class FilterTypeError(EvaluationError):
    pass


class Graph:
    """Set of triples with subject/predicate/object indexes."""

    def __init__(self) -> None:
        self._triples: dict[Triple, None] = {}
        self._by_subject: dict[Iri, list[Triple]] = {}
        self._by_predicate: dict[Iri, list[Triple]] = {}
        self._by_object: dict[Union[Iri, Literal], list[Triple]] = {}
        self._frozen = False

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def add(self, triple: Triple) -> bool:
        """Insert a triple; returns False when it was already present."""
        if self._frozen:
            raise GraphFrozenError("graph is frozen")
        if triple in self._triples:
            return False
        self._triples[triple] = None
        self._by_subject.setdefault(triple.subject, []).append(triple)
        self._by_predicate.setdefault(triple.predicate, []).append(triple)
        self._by_object.setdefault(triple.object, []).append(triple)
        return True

    def freeze(self) -> None:
        self._frozen = True

    def has_subject(self, iri: Iri) -> bool:
        return iri in self._by_subject

    def match(
        self,
        subject: Optional[Iri] = None,
        predicate: Optional[Iri] = None,
        object: Optional[Union[Iri, Literal]] = None,
    ) -> Iterator[Triple]:
        """Iterate triples matching the given concrete terms (None = any)."""
        candidates: Iterable[Triple]
        pools = []
        if subject is not None:
            pools.append(self._by_subject.get(subject, []))
        if predicate is not None:
            pools.append(self._by_predicate.get(predicate, []))
        if object is not None:
            pools.append(self._by_object.get(object, []))
        if pools:
            candidates = min(pools, key=len)
        else:
            candidates = self._triples
        for t in candidates:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if object is not None and t.object != object:
                continue
            yield t


# --- entity assertion --------------------------------------------------------


def assert_customer(
    graph: Graph, customer: Customer, config: PricingConfig
) -> list[Triple]:
    """Assert one customer: 5 triples, 6 when a region is present."""
    subject = T.customer_iri(customer.customer_code)
    if graph.has_subject(subject):
        raise DuplicateSubjectError(f"customer already asserted: {subject.value}")
    rho = adjustment_factor(customer.account_class, config)
    triples = [
        Triple(subject, T.TYPE, T.CUSTOMER_CLASS),
        Triple(subject, T.HAS_CUSTOMER_CODE, Literal(customer.customer_code)),
        Triple(subject, T.HAS_ACCOUNT_TYPE, Literal(customer.account_class.value)),
        Triple(subject, T.HAS_ADJUSTMENT_FACTOR, Literal(to_factor(rho))),
        Triple(subject, T.HAS_ANNUAL_REVENUE, Literal(customer.annual_revenue)),
    ]
    if customer.region is not None:
        triples.append(Triple(subject, T.HAS_REGION, Literal(customer.region)))
    for t in triples:
        graph.add(t)
    return triples


def assert_product(graph: Graph, product: Product) -> list[Triple]:
    """Assert one product: exactly 4 triples."""
    subject = T.product_iri(product.product_number)
    if graph.has_subject(subject):
        raise DuplicateSubjectError(f"product already asserted: {subject.value}")
    triples = [
        Triple(subject, T.TYPE, T.PRODUCT_CLASS),
        Triple(subject, T.HAS_PRODUCT_NUMBER, Literal(product.product_number)),
        Triple(subject, T.HAS_BASIC_TYPE, Literal(product.basic_type)),
        Triple(subject, T.HAS_PRODUCT_LINE, Literal(product.product_line)),
    ]
    for t in triples:
        graph.add(t)
    return triples


def assert_order(graph: Graph, order: Order) -> list[Triple]:
    """Assert one order: exactly 10 triples linking customer and product."""
    subject = T.order_iri(order.order_number)
    if graph.has_subject(subject):
        raise DuplicateSubjectError(f"order already asserted: {subject.value}")
    customer = T.customer_iri(order.customer_code)
    product = T.product_iri(order.product_number)
    if not graph.has_subject(customer):
        raise DanglingReferenceError(
            f"order {order.order_number} references unknown customer "
            f"{order.customer_code}"
        )
    if not graph.has_subject(product):
        raise DanglingReferenceError(
            f"order {order.order_number} references unknown product "
            f"{order.product_number}"
        )
    triples = [
        Triple(subject, T.TYPE, T.ORDER_CLASS),
        Triple(subject, T.HAS_ORDER_NUMBER, Literal(order.order_number)),
        Triple(subject, T.HAS_QUANTITY, Literal(order.quantity)),
        Triple(subject, T.HAS_ORIGINAL_PRICE, Literal(order.original_price)),
        Triple(subject, T.HAS_ORDER_DATE, Literal(order.order_date)),
        Triple(subject, T.HAS_REQUESTED_DATE, Literal(order.customer_request_date)),
        Triple(subject, T.HAS_CONFIRMED_DATE, Literal(order.customer_delivery_date)),
        Triple(subject, T.HAS_STANDARD_DATE, Literal(order.standard_delivery_date)),
        Triple(subject, T.WAS_PLACED_BY, customer),
        Triple(subject, T.CONTAINS_PRODUCT, product),
    ]
    for t in triples:
        graph.add(t)
    return triples


def assert_premium(graph: Graph, premium) -> list[Triple]:
    """Attach a customer's premium: 1 triple; idempotent on re-assert."""
    subject = T.customer_iri(premium.customer_code)
    if not graph.has_subject(subject):
        raise DanglingReferenceError(
            f"premium references unknown customer {premium.customer_code}"
        )
    triple = Triple(subject, T.HAS_PREMIUM, Literal(to_factor(premium.premium)))
    return [triple] if graph.add(triple) else []


def assert_priced(graph: Graph, priced) -> list[Triple]:
    """Attach RM and convex prices to an asserted order: 2 triples."""
    subject = T.order_iri(priced.order_number)
    if not graph.has_subject(subject):
        raise UnknownOrderError(
            f"priced order references unknown order {priced.order_number}"
        )
    added = []
    for predicate, value in (
        (T.HAS_RM_PRICE, priced.rm),
        (T.HAS_CONVEX_PRICE, priced.convex),
    ):
        triple = Triple(subject, predicate, Literal(value))
        if graph.add(triple):
            added.append(triple)
    return added


def build_graph(dataset, pricing=None, config: PricingConfig | None = None) -> Graph:
    """Materialize a dataset (and optional pricing output) as a graph."""
    config = config or PricingConfig()
    graph = Graph()
    for product in dataset.products:
        assert_product(graph, product)
    for customer in dataset.customers:
        assert_customer(graph, customer, config)
    for order in dataset.orders:
        assert_order(graph, order)
    if pricing is not None:
        for premium in pricing.premiums:
            assert_premium(graph, premium)
        for priced in pricing.priced_orders:
            assert_priced(graph, priced)
    return graph


# --- pattern matching --------------------------------------------------------


def _as_stored(value: BindingValue) -> Union[Iri, Literal]:
    return value if isinstance(value, Iri) else Literal(value)


def _as_binding(term: Union[Iri, Literal]) -> BindingValue:
    return term.value if isinstance(term, Literal) else term


def match_patterns(
    graph: Graph,
    patterns: Sequence[tuple],
    filters: Sequence[Expr] = (),
) -> list[Binding]:
    """All variable bindings satisfying every pattern and filter.

    Patterns join naturally on shared variables. Row order is deterministic
    but otherwise unspecified; use evaluate() for ordering.
    """
    rows: list[Binding] = [{}]
    for pattern in patterns:
        if len(pattern) != 3:
            raise QueryError(f"malformed pattern: {pattern!r}")
        out: list[Binding] = []
        for row in rows:
            lookup = []
            for term in pattern:
                if isinstance(term, Variable):
                    bound = row.get(term.name)
                    lookup.append(None if bound is None else _as_stored(bound))
                elif isinstance(term, (Iri, Literal)):
                    lookup.append(term)
                else:
                    lookup.append(_as_stored(term))
            for triple in graph.match(*lookup):
                extended = _extend(row, pattern, triple)
                if extended is not None:
                    out.append(extended)
        rows = out
        if not rows:
            break
    for expr in filters:
        rows = [row for row in rows if _truth(expr, row)]
    return rows


def _extend(row: Binding, pattern: tuple, triple: Triple) -> Optional[Binding]:
    extended = dict(row)
    for term, actual in zip(pattern, (triple.subject, triple.predicate, triple.object)):
        if not isinstance(term, Variable):
            continue
        value = _as_binding(actual)
        seen = extended.get(term.name)
        if seen is None:
            extended[term.name] = value
        elif seen != value:  # same variable twice within one pattern
            return None
    return extended


# --- filter evaluation -------------------------------------------------------


def _type_name(value) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, Decimal)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, date):
        return "date"
    if isinstance(value, Iri):
        return "iri"
    return type(value).__name__


def _eval_expr(expr: Expr, row: Binding):
    if isinstance(expr, VarRef):
        if expr.name not in row:
            raise EvaluationError(f"unbound variable ?{expr.name} in filter")
        return row[expr.name]
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Compare):
        return _compare(expr, row)
    if isinstance(expr, Arith):
        left = _eval_expr(expr.left, row)
        right = _eval_expr(expr.right, row)
        if not (_is_number(left) and _is_number(right)):
            raise FilterTypeError(
                f"arithmetic needs numbers, got {_type_name(left)} and "
                f"{_type_name(right)} in {render_expr(expr)}"
            )
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0:
            raise EvaluationError(f"division by zero in {render_expr(expr)}")
        return Decimal(left) / Decimal(right)
    if isinstance(expr, Neg):
        value = _eval_expr(expr.operand, row)
        if not _is_number(value):
            raise FilterTypeError(
                f"negation needs a number, got {_type_name(value)} "
                f"in {render_expr(expr)}"
            )
        return -value
    if isinstance(expr, BoolOp):
        left = _require_bool(_eval_expr(expr.left, row), expr)
        if expr.op == "&&":
            return left and _require_bool(_eval_expr(expr.right, row), expr)
        return left or _require_bool(_eval_expr(expr.right, row), expr)
    if isinstance(expr, Not):
        return not _require_bool(_eval_expr(expr.operand, row), expr)
    raise EvaluationError(f"cannot evaluate {expr!r}")


def _is_number(value) -> bool:
    return isinstance(value, (int, Decimal)) and not isinstance(value, bool)


def _require_bool(value, expr: Expr) -> bool:
    if not isinstance(value, bool):
        raise FilterTypeError(
            f"expected a boolean, got {_type_name(value)} in {render_expr(expr)}"
        )
    return value


def _compare(expr: Compare, row: Binding) -> bool:
    left = _eval_expr(expr.left, row)
    right = _eval_expr(expr.right, row)
    numeric = _is_number(left) and _is_number(right)
    same_kind = (
        numeric
        or (isinstance(left, str) and isinstance(right, str))
        or (isinstance(left, date) and isinstance(right, date))
        or (isinstance(left, Iri) and isinstance(right, Iri))
    )
    if not same_kind:
        raise FilterTypeError(
            f"type mismatch: cannot compare {_type_name(left)} to "
            f"{_type_name(right)} in {render_expr(expr)}"
        )
    if expr.op == "=":
        return left == right
    if expr.op == "!=":
        return left != right
    if isinstance(left, Iri):
        raise FilterTypeError(f"IRIs are not ordered in {render_expr(expr)}")
    if expr.op == "<":
        return left < right
    if expr.op == "<=":
        return left <= right
    if expr.op == ">":
        return left > right
    return left >= right


def _truth(expr: Expr, row: Binding) -> bool:
    return _require_bool(_eval_expr(expr, row), expr)


# --- evaluation --------------------------------------------------------------


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]

    def mappings(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


_SORT_RANK = {int: 0, Decimal: 0, str: 1, date: 2, Iri: 3}


def _sort_key(value):
    if isinstance(value, Iri):
        return (3, value.value)
    return (_SORT_RANK[type(value)], value)


def _group_key(values: tuple):
    return tuple(_sort_key(v) for v in values)


def _aggregate(func: str, values: list, alias: str):
    if func == "COUNT":
        return len(values)
    if not values:
        return 0 if func == "SUM" else None
    if func in ("SUM", "AVG"):
        total = 0
        for v in values:
            if not _is_number(v):
                raise EvaluationError(
                    f"{func} needs numeric values, got {_type_name(v)} "
                    f"for ?{alias}"
                )
            total = total + v
        if func == "SUM":
            return total
        return Decimal(total) / Decimal(len(values))
    # MIN / MAX over one comparable kind
    first = values[0]
    kinds = {_type_name(v) for v in values}
    if len(kinds) > 1 or isinstance(first, Iri):
        raise EvaluationError(
            f"{func} needs one ordered value kind, got {sorted(kinds)} for ?{alias}"
        )
    return min(values) if func == "MIN" else max(values)


def evaluate(graph: Graph, spec: QuerySpec) -> ResultTable:
    """Run a query: match, group, aggregate, order, and limit."""
    spec.validate()
    rows = match_patterns(graph, spec.patterns, spec.filters)
    aggregates = spec.aggregates
    columns = [p if isinstance(p, str) else p.alias for p in spec.projections]

    if aggregates or spec.group_by:
        groups: dict[tuple, list[Binding]] = {}
        for row in rows:
            key = tuple(row[name] for name in spec.group_by)
            groups.setdefault(key, []).append(row)
        if not spec.group_by and not groups:
            groups[()] = []  # global aggregates over no rows still yield one row
        out_rows = []
        for key in sorted(groups, key=_group_key):
            members = groups[key]
            values = dict(zip(spec.group_by, key))
            record = []
            for proj in spec.projections:
                if isinstance(proj, str):
                    record.append(values[proj])
                else:
                    record.append(
                        _aggregate(
                            proj.func,
                            [m[proj.var] for m in members],
                            proj.alias,
                        )
                    )
            out_rows.append(tuple(record))
    else:
        out_rows = [tuple(row[name] for name in spec.projections) for row in rows]

    if spec.order_by is not None:
        try:
            idx = columns.index(spec.order_by.key)
        except ValueError:
            raise EvaluationError(
                f"order key ?{spec.order_by.key} is not a result column"
            ) from None
        keyed = [r for r in out_rows if r[idx] is not None]
        absent = [r for r in out_rows if r[idx] is None]
        keyed.sort(key=lambda r: _sort_key(r[idx]), reverse=spec.order_by.descending)
        out_rows = keyed + absent
    if spec.limit is not None:
        out_rows = out_rows[: spec.limit]
    return ResultTable(columns, out_rows)


# --- N-Triples I/O -----------------------------------------------------------

_NT_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_NT_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}

_XSD_INTEGER = f"{T.XSD}integer"
_XSD_DECIMAL = f"{T.XSD}decimal"
_XSD_DATE = f"{T.XSD}date"


def _nt_escape(text: str) -> str:
    return "".join(_NT_ESCAPES.get(ch, ch) for ch in text)


def _nt_term(term: Union[Iri, Literal]) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    value = term.value
    if isinstance(value, bool):
        raise GraphError("boolean literals are not supported")
    if isinstance(value, int):
        return f'"{value}"^^<{_XSD_INTEGER}>'
    if isinstance(value, Decimal):
        return f'"{value}"^^<{_XSD_DECIMAL}>'
    if isinstance(value, date):
        return f'"{value.isoformat()}"^^<{_XSD_DATE}>'
    return f'"{_nt_escape(value)}"'


def serialize_triple(triple: Triple) -> str:
    return (
        f"{_nt_term(triple.subject)} {_nt_term(triple.predicate)} "
        f"{_nt_term(triple.object)} ."
    )


def export_ntriples(graph: Graph, path) -> None:
    """One triple per line in lexicographic order; reload round-trips."""
    lines = sorted(serialize_triple(t) for t in graph)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line + "\n")


_NT_LINE = re.compile(
    r'^<(?P<s>[^<>\s]*)>\s+<(?P<p>[^<>\s]*)>\s+(?P<o>.+?)\s*\.$'
)
_NT_LITERAL = re.compile(
    r'^"(?P<body>(?:[^"\\]|\\.)*)"(?:\^\^<(?P<dtype>[^<>\s]*)>)?$'
)


def _nt_unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            i += 1
            esc = body[i] if i < len(body) else ""
            if esc not in _NT_UNESCAPES:
                raise GraphParseError(f"invalid escape \\{esc}")
            out.append(_NT_UNESCAPES[esc])
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _parse_object(text: str, lineno: int) -> Union[Iri, Literal]:
    if text.startswith("<") and text.endswith(">"):
        return Iri(text[1:-1])
    m = _NT_LITERAL.match(text)
    if m is None:
        raise GraphParseError(f"line {lineno}: malformed object term: {text!r}")
    body = m.group("body")
    dtype = m.group("dtype")
    if dtype is None:
        return Literal(_nt_unescape(body))
    if dtype == _XSD_INTEGER:
        return Literal(int(body))
    if dtype == _XSD_DECIMAL:
        return Literal(Decimal(body))
    if dtype == _XSD_DATE:
        return Literal(date.fromisoformat(body))
    raise GraphParseError(f"line {lineno}: unsupported datatype <{dtype}>")


def load_ntriples(path) -> Graph:
    graph = Graph()
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            m = _NT_LINE.match(line)
            if m is None:
                raise GraphParseError(f"line {lineno}: malformed triple: {line!r}")
            graph.add(
                Triple(
                    Iri(m.group("s")),
                    Iri(m.group("p")),
                    _parse_object(m.group("o"), lineno),
                )
            )
    return graph
