"""Boolean queries over match conditions, evaluated as PEC sets.

A query is an AST of element atoms closed under ``!``, ``&`` and ``|``.
Conversion is structural: an atom maps to the sub-DAG of its node, a
negation to the complement against all PECs, conjunction/disjunction to
set intersection/union.  Atoms must be present in the lattice first
(:func:`prepare`), which keeps conversion itself a pure read.

Text syntax for the CLI: atoms are bracketed field maps such as
``[dst=210.4.214.0/23, proto=ANY]`` (omitted fields cover their full
domain; ``[]`` is the all-wildcard atom), combined with ``!``, ``&``,
``|`` and parentheses.
"""

from __future__ import annotations

from dataclasses import dataclass

from .elements import Schema
from .lattice import Lattice, Node


class QueryError(ValueError):
    """Query text or structure problem."""


class AtomNotFound(QueryError):
    """convert_to_pecs met an atom never inserted into the lattice."""


@dataclass(frozen=True)
class Atom:
    element: object


@dataclass(frozen=True)
class Not:
    operand: "Query"


@dataclass(frozen=True)
class And:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Or:
    left: "Query"
    right: "Query"


Query = Atom | Not | And | Or


def atoms(query: Query):
    """Yield every atom element in the query."""
    stack = [query]
    while stack:
        q = stack.pop()
        if isinstance(q, Atom):
            yield q.element
        elif isinstance(q, Not):
            stack.append(q.operand)
        else:
            stack.extend((q.left, q.right))


def prepare(lattice: Lattice, query: Query) -> None:
    """Insert every atom of ``query`` that the lattice does not know yet."""
    for elem in atoms(query):
        lattice.insert(elem)


def convert_to_pecs(lattice: Lattice, query: Query) -> frozenset[Node]:
    """Algorithmic core: map a Boolean query to the exact set of PECs."""
    if isinstance(query, Atom):
        node = lattice.find(query.element)
        if node is None:
            raise AtomNotFound(f"atom {query.element} not in lattice; run prepare()")
        return frozenset(lattice.subtree(node))
    if isinstance(query, Not):
        universe = frozenset(lattice.subtree(lattice.root))
        return universe - convert_to_pecs(lattice, query.operand)
    if isinstance(query, And):
        return convert_to_pecs(lattice, query.left) & \
            convert_to_pecs(lattice, query.right)
    if isinstance(query, Or):
        return convert_to_pecs(lattice, query.left) | \
            convert_to_pecs(lattice, query.right)
    raise QueryError(f"not a query node: {query!r}")


def nonempty(lattice: Lattice, pecs) -> frozenset[Node]:
    """Drop PECs with zero cardinality; empty PECs cannot witness anything."""
    return frozenset(n for n in pecs if not lattice.is_empty_pec(n))


# -- text syntax ---------------------------------------------------------------


def _split_top_level(body: str, sep: str) -> list[str]:
    """Split on ``sep`` outside brace nesting (set literals contain commas)."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise QueryError(f"unbalanced braces in {body!r}")
        elif ch == sep and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    if depth:
        raise QueryError(f"unbalanced braces in {body!r}")
    parts.append(body[start:])
    return parts


def _parse_atom(body: str, schema: Schema) -> Atom:
    body = body.strip()
    if not body:
        return Atom(schema.top())
    mapping: dict[str, str] = {}
    pairs = _split_top_level(body, ",")
    if len(pairs) == 1 and "=" not in _strip_braces(pairs[0]):
        # positional value, only unambiguous for single-field schemas
        if len(schema.fields) != 1:
            raise QueryError(
                f"positional atom {body!r} needs field names in a multi-field schema")
        return Atom(schema.match_from_mapping({schema.fields[0].name: pairs[0].strip()}))
    for pair in pairs:
        name, eq, value = pair.partition("=")
        if not eq:
            raise QueryError(f"expected field=value, got {pair.strip()!r}")
        name = name.strip()
        if name in mapping:
            raise QueryError(f"field {name!r} appears twice in one atom")
        mapping[name] = value.strip()
    try:
        return Atom(schema.match_from_mapping(mapping))
    except ValueError as exc:
        raise QueryError(f"bad atom [{body}]: {exc}") from exc


def _strip_braces(text: str) -> str:
    out, depth = [], 0
    for ch in text:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif depth == 0:
            out.append(ch)
    return "".join(out)


def _tokenize(text: str) -> list:
    tokens: list = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "!&|()":
            tokens.append(ch)
            i += 1
        elif ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise QueryError(f"missing ']' after position {i}")
            tokens.append(("atom", text[i + 1:end]))
            i = end + 1
        else:
            raise QueryError(f"unexpected character {ch!r} at position {i}")
    return tokens


class _Parser:
    # precedence: ! binds tighter than &, which binds tighter than |

    def __init__(self, tokens: list, schema: Schema):
        self.tokens = tokens
        self.schema = schema
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> Query:
        q = self.parse_or()
        if self.peek() is not None:
            raise QueryError(f"trailing input at token {self.peek()!r}")
        return q

    def parse_or(self) -> Query:
        q = self.parse_and()
        while self.peek() == "|":
            self.take()
            q = Or(q, self.parse_and())
        return q

    def parse_and(self) -> Query:
        q = self.parse_not()
        while self.peek() == "&":
            self.take()
            q = And(q, self.parse_not())
        return q

    def parse_not(self) -> Query:
        if self.peek() == "!":
            self.take()
            return Not(self.parse_not())
        return self.parse_primary()

    def parse_primary(self) -> Query:
        tok = self.take()
        if tok == "(":
            q = self.parse_or()
            if self.take() != ")":
                raise QueryError("missing ')'")
            return q
        if isinstance(tok, tuple) and tok[0] == "atom":
            return _parse_atom(tok[1], self.schema)
        raise QueryError(f"unexpected token {tok!r}")


def parse_query(text: str, schema: Schema) -> Query:
    """Parse the CLI query syntax into an AST."""
    tokens = _tokenize(text)
    if not tokens:
        raise QueryError("empty query")
    return _Parser(tokens, schema).parse()
