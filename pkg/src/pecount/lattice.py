"""Meet-semilattice DAG over match conditions, with exact class counting.

Each node holds one element, its direct (Hasse) children, and the exact
number of headers matched by the node's element but by none of its
descendants: the node's packet-equivalence-class (PEC) cardinality.
The DAG is closed under pairwise intersection and hash-conses elements
by canonical key, so there is exactly one node per distinct header set.
A PEC is empty exactly when its cardinality is zero.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .elements import Schema, canonical_key, intersect, is_subset


class LatticeError(RuntimeError):
    """Internal invariant violation (a defect, not a user error)."""


class QueriedWhileDirty(LatticeError):
    """Cardinality read while deferred recomputation is pending."""


class Node:
    """One DAG vertex: an element, its direct children, and its PEC count.

    Children are kept in an insertion-ordered map so traversals are
    reproducible; the final DAG shape itself does not depend on order.
    """

    __slots__ = ("id", "elem", "children", "cardinality")

    def __init__(self, node_id: int, elem, provisional_cardinality: int):
        self.id = node_id
        self.elem = elem
        self.children: dict[int, "Node"] = {}
        self.cardinality = provisional_cardinality

    def child_nodes(self):
        return self.children.values()

    def __repr__(self):
        return f"<Node {self.id}: {self.elem}>"


@dataclass
class PecReport:
    """Build statistics mirroring the usual evaluation columns."""

    insertions: int
    pecs: int
    empty_pecs: int
    atomic_predicates: int
    nodes: list | None = None

    def to_dict(self) -> dict:
        out = {
            "insertions": self.insertions,
            "pecs": self.pecs,
            "empty_pecs": self.empty_pecs,
            "atomic_predicates": self.atomic_predicates,
        }
        if self.nodes is not None:
            out["nodes"] = self.nodes
        return out

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def summary(self) -> str:
        return (f"insertions={self.insertions} pecs={self.pecs} "
                f"empty_pecs={self.empty_pecs} "
                f"atomic_predicates={self.atomic_predicates}")


class Lattice:
    """The meet-semilattice DAG rooted at the schema's all-wildcard element.

    In eager mode (the default) every :meth:`insert` leaves all PEC
    cardinalities up to date.  In amortized mode recomputation is
    deferred until :meth:`settle`; reading a cardinality before settling
    raises :class:`QueriedWhileDirty` rather than returning stale data.
    """

    def __init__(self, schema: Schema, eager: bool = True):
        if not schema.frozen:
            raise LatticeError("schema must be frozen before building a lattice")
        self.schema = schema
        self.eager = eager
        self._next_id = 0
        self._index: dict[bytes, Node] = {}
        self._modified: dict[int, Node] = {}  # insertion-ordered pending set
        self._inserted_keys: set[bytes] = set()
        self.root = self._new_node(schema.top())

    # -- node bookkeeping ---------------------------------------------------

    def _new_node(self, elem) -> Node:
        # provisional count: the element's own cardinality (overwritten on
        # first recomputation, so the initial value is never observable)
        node = Node(self._next_id, elem, elem.cardinality())
        self._next_id += 1
        self._index[canonical_key(elem)] = node
        return node

    def find(self, elem) -> Node | None:
        return self._index.get(canonical_key(elem))

    def find_or_create(self, elem) -> tuple[Node, bool]:
        node = self._index.get(canonical_key(elem))
        if node is not None:
            return node, False
        return self._new_node(elem), True

    def __len__(self) -> int:
        return len(self._index)

    @property
    def nodes(self) -> list[Node]:
        return sorted(self._index.values(), key=lambda n: n.id)

    @property
    def modified_nodes(self) -> tuple[Node, ...]:
        return tuple(self._modified.values())

    @property
    def insertions(self) -> int:
        return len(self._inserted_keys)

    # -- construction (Algorithms 1 and 2) ----------------------------------

    def insert(self, elem) -> Node:
        """Insert a match condition; returns its node.

        Creates every intersection node the closure requires.  Re-inserting
        an existing element is a no-op that returns the existing node.
        """
        self.schema.validate_element(elem)
        self._inserted_keys.add(canonical_key(elem))
        node, created = self.find_or_create(elem)
        if created:
            self._modified[node.id] = node
            self._insert_node(self.root, node)
            if self.eager:
                self.settle()
        return node

    def _insert_node(self, parent: Node, n: Node) -> None:
        taken: dict[int, Node] = {}  # children of n gathered along the way
        for child in list(parent.child_nodes()):
            if is_subset(child.elem, n.elem):
                taken[child.id] = child
            elif is_subset(n.elem, child.elem):
                # n belongs strictly below this child; the closure invariant
                # guarantees descending into one containing child suffices
                self._insert_node(child, n)
                return
            else:
                meet = intersect(n.elem, child.elem)
                if meet is None:
                    continue
                other, created = self.find_or_create(meet)
                taken[other.id] = other
                if created:
                    self._modified[other.id] = other
                    self._insert_node(child, other)
        parent.children[n.id] = n
        self._modified[parent.id] = parent
        # keep children mutually incomparable: move only the maximal
        # gathered nodes under n, unlinking them from parent when present
        gathered = list(taken.values())
        for cand in gathered:
            if any(other is not cand and is_subset(cand.elem, other.elem)
                   for other in gathered):
                continue
            parent.children.pop(cand.id, None)
            n.children[cand.id] = cand

    # -- counting (Algorithm 3) ----------------------------------------------

    def settle(self) -> None:
        """Recompute every pending PEC cardinality."""
        while self._modified:
            node = next(iter(self._modified.values()))
            self._compute_cardinality(node)

    def _compute_cardinality(self, n: Node) -> None:
        # BFS the sub-DAG, subtracting each distinct descendant exactly once;
        # pending descendants are recomputed first (dependency order)
        queue = deque([n])
        visited = {n.id}
        total = n.elem.cardinality()
        while queue:
            cur = queue.popleft()
            for child in cur.child_nodes():
                if child.id in visited:
                    continue
                if child.id in self._modified:
                    self._compute_cardinality(child)
                visited.add(child.id)
                total -= child.cardinality
                queue.append(child)
        if total < 0:
            raise LatticeError(
                f"negative PEC cardinality at node {n.id} ({n.elem}): {total}")
        n.cardinality = total
        self._modified.pop(n.id, None)

    # -- settled reads --------------------------------------------------------

    def _require_settled(self) -> None:
        if self._modified:
            raise QueriedWhileDirty(
                f"{len(self._modified)} nodes pending recomputation; call settle()")

    def pec_cardinality(self, node: Node) -> int:
        self._require_settled()
        return node.cardinality

    def is_empty_pec(self, node: Node) -> bool:
        self._require_settled()
        return node.cardinality == 0

    def subtree(self, node: Node) -> set[Node]:
        """All PECs of ``node`` and its descendants, each node once."""
        seen = {node.id: node}
        queue = deque([node])
        while queue:
            for child in queue.popleft().child_nodes():
                if child.id not in seen:
                    seen[child.id] = child
                    queue.append(child)
        return set(seen.values())

    def recount_all(self) -> None:
        """Mark every node modified and recompute from scratch."""
        for node in self._index.values():
            self._modified[node.id] = node
        self.settle()

    def report(self, dump_nodes: bool = False) -> PecReport:
        self._require_settled()
        total = len(self._index)
        empty = sum(1 for n in self._index.values() if n.cardinality == 0)
        dump = None
        if dump_nodes:
            dump = [
                {
                    "id": n.id,
                    "element": str(n.elem),
                    "pec_cardinality": n.cardinality,
                    "children": sorted(n.children),
                }
                for n in self.nodes
            ]
        return PecReport(
            insertions=self.insertions,
            pecs=total,
            empty_pecs=empty,
            atomic_predicates=total - empty,
            nodes=dump,
        )
