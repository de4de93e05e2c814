"""Independent brute-force ground truth.

Everything here answers questions by enumerating concrete headers or
truth assignments, never by consulting the lattice's own bookkeeping.
The test suite uses these oracles to cross-check the DAG construction,
the counting, and query conversion on small universes.

Also hosts the DNF reduction: a DNF clause over n variables maps to a
width-n ternary bit vector, turning tautology checking and model
counting into root-PEC emptiness and cardinality questions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import query as query_mod
from .elements import (DisjointRanges, ElementError, IpPrefix, OptionalValue,
                       Range, Schema, Tbv, TupleElement, ValueSet, FieldSpec)
from .lattice import Lattice, Node

DEFAULT_ENUM_CAP = 1 << 24


class UniverseTooLarge(ValueError):
    """Header enumeration refused; raise the cap explicitly to override."""


def _check_cap(schema: Schema, cap: int) -> int:
    size = schema.universe_size
    if size > cap:
        raise UniverseTooLarge(
            f"universe has {size} headers, enumeration cap is {cap}")
    return size


# -- header encoding -----------------------------------------------------------
#
# A header is one int per field; multi-field schemas use tuples.  The flat
# index of a header treats the first field as most significant.


def decode_header(schema: Schema, index: int):
    sizes = [f.domain_size for f in schema.fields]
    if len(sizes) == 1:
        return index
    coords = []
    for size in reversed(sizes):
        coords.append(index % size)
        index //= size
    return tuple(reversed(coords))


def iter_headers(schema: Schema, cap: int = DEFAULT_ENUM_CAP):
    size = _check_cap(schema, cap)
    for index in range(size):
        yield decode_header(schema, index)


# -- membership vectors ----------------------------------------------------------


def _field_member_array(elem, domain_size: int) -> np.ndarray:
    arr = np.zeros(domain_size, dtype=bool)
    if isinstance(elem, IpPrefix):
        arr[elem.address:elem.address + elem.cardinality()] = True
    elif isinstance(elem, Range):
        arr[elem.lo:elem.hi] = True
    elif isinstance(elem, DisjointRanges):
        for lo, hi in elem.intervals():
            arr[lo:hi] = True
    elif isinstance(elem, Tbv):
        hs = np.arange(domain_size, dtype=np.int64)
        arr = (hs & elem.care) == elem.value
    elif isinstance(elem, (ValueSet, OptionalValue)):
        for h in elem.iter_headers():
            arr[h] = True
    else:
        raise ElementError(f"no membership vector for {type(elem).__name__}")
    return arr


def membership_vector(schema: Schema, elem, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    """Boolean vector over the whole header universe, flat-index order."""
    _check_cap(schema, cap)
    if len(schema.fields) == 1:
        return _field_member_array(elem, schema.fields[0].domain_size)
    assert isinstance(elem, TupleElement)
    parts = [
        _field_member_array(coord, spec.domain_size)
        for coord, spec in zip(elem.coords, schema.fields)
    ]
    return reduce(lambda acc, nxt: np.logical_and.outer(acc, nxt).ravel(), parts)


# -- containment signatures -------------------------------------------------------


def classify_headers(schema, elements=None, cap: int = DEFAULT_ENUM_CAP,
                     engine: str = "numpy") -> dict[frozenset, int]:
    """Partition the universe by which elements contain each header.

    Accepts a schema plus elements, or a single parsed dataset.  Returns
    ``{signature: header count}`` where a signature is the frozenset of
    element indices containing the header; the empty signature is the
    class of headers outside every element.
    """
    if elements is None:  # a Dataset-like object
        schema, elements = schema.schema, schema.elements
    elements = list(elements)
    size = _check_cap(schema, cap)
    if engine == "python":
        counts: dict[frozenset, int] = {}
        for h in iter_headers(schema, cap):
            sig = frozenset(i for i, e in enumerate(elements)
                            if e.contains_header(h))
            counts[sig] = counts.get(sig, 0) + 1
        return counts
    if engine != "numpy":
        raise ValueError(f"unknown engine {engine!r}")
    if not elements:
        return {frozenset(): size}
    if len(elements) > 62:
        raise ValueError("numpy engine limited to 62 elements; use engine='python'")
    sig = np.zeros(size, dtype=np.int64)
    for i, elem in enumerate(elements):
        sig |= membership_vector(schema, elem, cap).astype(np.int64) << i
    values, counts = np.unique(sig, return_counts=True)
    out = {}
    for value, count in zip(values.tolist(), counts.tolist()):
        out[frozenset(i for i in range(len(elements)) if value >> i & 1)] = count
    return out


def pec_header_vectors(lattice: Lattice, cap: int = DEFAULT_ENUM_CAP
                       ) -> dict[int, np.ndarray]:
    """Per-node header sets computed by enumeration, not by counting.

    A node's class is its element minus the union of its direct children
    (every deeper descendant lies below some direct child).
    """
    out = {}
    for node in lattice.nodes:
        vec = membership_vector(lattice.schema, node.elem, cap).copy()
        for child in node.child_nodes():
            vec &= ~membership_vector(lattice.schema, child.elem, cap)
        out[node.id] = vec
    return out


def empty_pecs_by_enumeration(lattice: Lattice, cap: int = DEFAULT_ENUM_CAP
                              ) -> set[int]:
    """Node ids whose class holds no header, by per-header search.

    Scans each node's element for a witness header avoiding all direct
    children; independent of the lattice's cardinality bookkeeping.
    """
    _check_cap(lattice.schema, cap)
    empty = set()
    for node in lattice.nodes:
        children = [c.elem for c in node.child_nodes()]
        witness = False
        for h in node.elem.iter_headers():
            if not any(c.contains_header(h) for c in children):
                witness = True
                break
        if not witness:
            empty.add(node.id)
    return empty


def sample_header(lattice: Lattice, node: Node, limit: int = 1 << 16):
    """A concrete header in the node's class, or None within the scan limit."""
    children = [c.elem for c in node.child_nodes()]
    for i, h in enumerate(node.elem.iter_headers()):
        if i >= limit:
            return None
        if not any(c.contains_header(h) for c in children):
            return h
    return None


# -- query and forwarding oracles ----------------------------------------------


def evaluate_query(q, header) -> bool:
    """Truth of a query for one concrete header."""
    if isinstance(q, query_mod.Atom):
        return q.element.contains_header(header)
    if isinstance(q, query_mod.Not):
        return not evaluate_query(q.operand, header)
    if isinstance(q, query_mod.And):
        return evaluate_query(q.left, header) and evaluate_query(q.right, header)
    if isinstance(q, query_mod.Or):
        return evaluate_query(q.left, header) or evaluate_query(q.right, header)
    raise TypeError(f"not a query node: {q!r}")


def first_match(rules, header):
    """First-match semantics: the highest-priority rule containing the header."""
    for rule in rules:
        if rule.match.contains_header(header):
            return rule
    return None


def simulate_path(topology, start_device: str, header, max_hops: int = 1024):
    """Follow one header hop by hop; returns (terminal, path of devices).

    Terminal is ``("drop",)``, ``("ctl",)``, ``("out", port)`` or
    ``("loop",)`` when a device repeats.  Mirrors the forwarding-graph
    vertex conventions so results compare directly.
    """
    device = start_device
    path = [device]
    seen = {device}
    link_map = topology.link_map
    for _ in range(max_hops):
        table = topology.tables.get(device)
        rule = first_match(table.rules, header) if table else None
        if rule is None or rule.action.kind == "drop":
            return ("drop",), path
        if rule.action.kind == "controller":
            return ("ctl",), path
        port = rule.action.target
        link = link_map.get((device, port))
        if link is None:
            return ("out", port), path
        if link.filter is not None and not evaluate_query(link.filter, header):
            return ("drop",), path
        device = link.peer
        if device in seen:
            path.append(device)
            return ("loop",), path
        seen.add(device)
        path.append(device)
    return ("loop",), path


# -- DNF reduction ---------------------------------------------------------------


@dataclass(frozen=True)
class DnfFormula:
    """Disjunctive normal form over variables 1..num_vars.

    Clauses are tuples of non-zero signed variable indices; a negative
    index is a negated literal.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("need at least one variable")
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause (trivially true) not supported")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range")

    @classmethod
    def from_text(cls, text: str, num_vars: int | None = None) -> "DnfFormula":
        """One clause per line; literals are signed variable indices."""
        clauses = []
        max_var = 0
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                lits = tuple(int(tok) for tok in line.split())
            except ValueError as exc:
                raise ValueError(f"line {line_no}: {exc}") from exc
            clauses.append(lits)
            max_var = max(max_var, *(abs(v) for v in lits))
        return cls(num_vars or max_var, tuple(clauses))


def dnf_to_elements(formula: DnfFormula) -> list[Tbv]:
    """One width-n ternary vector per satisfiable clause.

    Position i-1 carries 1 for literal x_i, 0 for ¬x_i, * when absent;
    contradictory clauses (x ∧ ¬x) match nothing and are skipped.
    """
    n = formula.num_vars
    out = []
    for clause in formula.clauses:
        care = value = 0
        contradictory = False
        for lit in clause:
            bit = 1 << (n - abs(lit))
            if care & bit and bool(value & bit) != (lit > 0):
                contradictory = True
                break
            care |= bit
            if lit > 0:
                value |= bit
        if not contradictory:
            out.append(Tbv(n, care, value))
    return out


def dnf_schema(num_vars: int) -> Schema:
    return Schema([FieldSpec(name="bits", kind="tbv", width=num_vars)]).freeze()


def build_dnf_lattice(formula: DnfFormula) -> Lattice:
    lattice = Lattice(dnf_schema(formula.num_vars))
    for elem in dnf_to_elements(formula):
        lattice.insert(elem)
    return lattice


def is_tautology(formula: DnfFormula) -> bool:
    """True iff the clauses cover every assignment (root class empty)."""
    lattice = build_dnf_lattice(formula)
    return lattice.is_empty_pec(lattice.root)


def count_dnf_models(formula: DnfFormula) -> int:
    """Number of satisfying assignments: 2^n minus the root class size."""
    lattice = build_dnf_lattice(formula)
    return (1 << formula.num_vars) - lattice.pec_cardinality(lattice.root)


def _clause_satisfied(clause, assignment) -> bool:
    return all((assignment[abs(lit) - 1]) == (lit > 0) for lit in clause)


def truth_table_models(formula: DnfFormula) -> int:
    """Model count by direct per-assignment evaluation of the formula."""
    n = formula.num_vars
    count = 0
    for bits in range(1 << n):
        assignment = [bool(bits >> (n - i) & 1) for i in range(1, n + 1)]
        if any(_clause_satisfied(c, assignment) for c in formula.clauses):
            count += 1
    return count


def truth_table_is_tautology(formula: DnfFormula) -> bool:
    return truth_table_models(formula) == (1 << formula.num_vars)
