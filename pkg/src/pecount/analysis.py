"""Network-level checks on PEC-labeled forwarding graphs.

Rule tables use first-match semantics: a rule's *effective* PEC set is
its match converted to PECs minus everything claimed by higher-priority
rules, so priority overlap becomes exact set difference.  A forwarding
graph has one edge per (device, action target) labeled with the union
of the non-empty effective sets taking that action; loop detection and
reachability verification then work per PEC on edge labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import oracle
from .lattice import Lattice, Node
from .query import Atom, Query, convert_to_pecs, nonempty, prepare

DROP = ("drop",)
CONTROLLER = ("ctl",)
LOOP = ("loop",)


class TopologyError(ValueError):
    """Malformed rule table or topology."""


@dataclass(frozen=True)
class Action:
    kind: str  # "forward" | "drop" | "controller"
    target: str | None = None

    def __post_init__(self):
        if self.kind not in ("forward", "drop", "controller"):
            raise TopologyError(f"unknown action kind {self.kind!r}")
        if self.kind == "forward" and not self.target:
            raise TopologyError("forward action needs a port")

    @classmethod
    def drop(cls) -> "Action":
        return cls("drop")

    @classmethod
    def controller(cls) -> "Action":
        return cls("controller")

    @classmethod
    def forward(cls, port: str) -> "Action":
        return cls("forward", port)

    def __str__(self):
        return f"forward:{self.target}" if self.kind == "forward" else self.kind


@dataclass(frozen=True)
class Rule:
    priority: int  # lower value wins
    match: object
    action: Action


@dataclass
class RuleTable:
    device: str
    rules: list[Rule]

    def __post_init__(self):
        priorities = [r.priority for r in self.rules]
        if len(set(priorities)) != len(priorities):
            raise TopologyError(f"device {self.device!r}: duplicate rule priority")
        self.rules = sorted(self.rules, key=lambda r: r.priority)


@dataclass(frozen=True)
class Link:
    device: str
    port: str
    peer: str
    filter: Query | None = None  # optional admission filter on the link


@dataclass
class Topology:
    tables: dict[str, RuleTable]
    links: list[Link] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for link in self.links:
            for endpoint in (link.device, link.peer):
                if endpoint not in self.tables:
                    raise TopologyError(f"link endpoint {endpoint!r} is not a device")
            if (link.device, link.port) in seen:
                raise TopologyError(
                    f"port {link.port!r} on {link.device!r} is wired twice")
            seen.add((link.device, link.port))

    @property
    def link_map(self) -> dict[tuple[str, str], Link]:
        return {(l.device, l.port): l for l in self.links}

    def all_matches(self):
        for table in self.tables.values():
            for rule in table.rules:
                yield rule.match


def prepare_topology(lattice: Lattice, topology: Topology) -> None:
    """Insert every rule match and link-filter atom into the lattice."""
    for match in topology.all_matches():
        lattice.insert(match)
    for link in topology.links:
        if link.filter is not None:
            prepare(lattice, link.filter)


def table_effective_pecs(lattice: Lattice, table: RuleTable
                         ) -> list[tuple[Rule, frozenset[Node]]]:
    """Effective PEC set per rule: its match minus all higher-priority matches."""
    out = []
    claimed: frozenset[Node] = frozenset()
    for rule in table.rules:
        pecs = convert_to_pecs(lattice, Atom(rule.match))
        out.append((rule, pecs - claimed))
        claimed |= pecs
    return out


def effective_pecs(lattice: Lattice, table: RuleTable, rule: Rule
                   ) -> frozenset[Node]:
    for candidate, pecs in table_effective_pecs(lattice, table):
        if candidate is rule or (candidate.priority == rule.priority):
            return pecs
    raise TopologyError(f"rule priority {rule.priority} not in table {table.device!r}")


def shadowed_rules(lattice: Lattice, table: RuleTable) -> list[Rule]:
    """Rules whose effective set holds no non-empty PEC.

    Catches both a single covering rule and a union of higher-priority
    rules that only jointly cover the match.
    """
    out = []
    for rule, pecs in table_effective_pecs(lattice, table):
        if not nonempty(lattice, pecs):
            out.append(rule)
    return out


def _action_vertex(topology: Topology, device: str, action: Action):
    if action.kind == "drop":
        return DROP
    if action.kind == "controller":
        return CONTROLLER
    link = topology.link_map.get((device, action.target))
    if link is None:
        return ("out", action.target)  # unlinked port: an egress of the network
    return ("dev", link.peer)


def vertex_label(vertex) -> str:
    kind = vertex[0]
    if kind == "drop":
        return "DROP"
    if kind == "ctl":
        return "CONTROLLER"
    if kind == "loop":
        return "LOOP"
    return vertex[1]


class ForwardingGraph:
    """Edges labeled by non-empty PEC sets, one per (device, action target).

    Headers no rule matches fall through to an implicit drop edge so the
    out-labels of every device partition the arriving universe.  Link
    admission filters intersect the corresponding edge label.
    """

    def __init__(self, lattice: Lattice, topology: Topology):
        self.lattice = lattice
        self.topology = topology
        self.effective: dict[str, list[tuple[Rule, frozenset[Node]]]] = {}
        self.edges: dict[str, dict[tuple, frozenset[Node]]] = {}
        universe = frozenset(lattice.subtree(lattice.root))
        link_map = topology.link_map
        for device, table in topology.tables.items():
            per_rule = table_effective_pecs(lattice, table)
            self.effective[device] = per_rule
            targets: dict[tuple, frozenset[Node]] = {}
            matched: frozenset[Node] = frozenset()
            for rule, pecs in per_rule:
                live = nonempty(lattice, pecs)
                matched |= pecs
                if not live:
                    continue
                vertex = _action_vertex(topology, device, rule.action)
                if rule.action.kind == "forward":
                    link = link_map.get((device, rule.action.target))
                    if link is not None and link.filter is not None:
                        admitted = convert_to_pecs(lattice, link.filter)
                        rejected = live - admitted
                        if rejected:  # dies at the link, not at the device
                            targets[DROP] = targets.get(DROP, frozenset()) | rejected
                        live &= admitted
                        if not live:
                            continue
                targets[vertex] = targets.get(vertex, frozenset()) | live
            fallthrough = nonempty(lattice, universe - matched)
            if fallthrough:
                targets[DROP] = targets.get(DROP, frozenset()) | fallthrough
            self.edges[device] = targets

    def device_edges(self, device: str):
        """(peer device, label) pairs, excluding terminal sinks."""
        return [(vertex[1], label)
                for vertex, label in self.edges.get(device, {}).items()
                if vertex[0] == "dev"]


def build_forwarding_graph(lattice: Lattice, topology: Topology) -> ForwardingGraph:
    return ForwardingGraph(lattice, topology)


@dataclass
class LoopFinding:
    pec: Node
    cycle: list[str]

    def to_dict(self) -> dict:
        return {"pec": self.pec.id, "element": str(self.pec.elem),
                "cycle": self.cycle}


def detect_loops(graph: ForwardingGraph) -> list[LoopFinding]:
    """One representative forwarding cycle per PEC that can loop."""
    carried: dict[Node, dict[str, list[str]]] = {}
    for device in graph.topology.tables:
        for peer, label in graph.device_edges(device):
            for pec in label:
                carried.setdefault(pec, {}).setdefault(device, []).append(peer)
    findings = []
    for pec in sorted(carried, key=lambda n: n.id):
        cycle = _find_cycle(carried[pec])
        if cycle is not None:
            findings.append(LoopFinding(pec, cycle))
    return findings


def _find_cycle(adjacency: dict[str, list[str]]) -> list[str] | None:
    # iterative DFS with an explicit stack; gray nodes are on the current path
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {v: WHITE for v in adjacency}
    for start in adjacency:
        if color[start] != WHITE:
            continue
        path: list[str] = []
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            vertex, edge_idx = stack[-1]
            if edge_idx == 0:
                color[vertex] = GRAY
                path.append(vertex)
            succ = adjacency.get(vertex, [])
            if edge_idx < len(succ):
                stack[-1] = (vertex, edge_idx + 1)
                nxt = succ[edge_idx]
                state = color.get(nxt, BLACK)
                if state == GRAY:
                    return path[path.index(nxt):] + [nxt]
                if state == WHITE:
                    stack.append((nxt, 0))
            else:
                color[vertex] = BLACK
                path.pop()
                stack.pop()
    return None


@dataclass
class Witness:
    pec: Node
    reached: str
    sample: object | None

    def to_dict(self) -> dict:
        return {"pec": self.pec.id, "element": str(self.pec.elem),
                "reached": self.reached,
                "sample": None if self.sample is None else str(self.sample)}


@dataclass
class Verdict:
    passed: bool
    witnesses: list[Witness]

    def to_dict(self) -> dict:
        return {"verdict": "pass" if self.passed else "fail",
                "witnesses": [w.to_dict() for w in self.witnesses]}


def _walk_pec(graph: ForwardingGraph, device: str, pec: Node):
    """Terminal vertex reached by the class when injected at ``device``."""
    topology = graph.topology
    seen = set()
    while True:
        if device in seen:
            return LOOP
        seen.add(device)
        action = None
        for rule, pecs in graph.effective.get(device, []):
            if pec in pecs:
                action = rule.action
                break
        if action is None or action.kind == "drop":
            return DROP
        if action.kind == "controller":
            return CONTROLLER
        link = topology.link_map.get((device, action.target))
        if link is None:
            return ("out", action.target)
        if link.filter is not None:
            admitted = convert_to_pecs(graph.lattice, link.filter)
            if pec not in admitted:
                return DROP
        device = link.peer


def _expected_vertex(expected: str):
    lowered = expected.strip().lower()
    if lowered == "drop":
        return DROP
    if lowered == "controller":
        return CONTROLLER
    return ("out", expected.strip())


def verify(graph: ForwardingGraph, query: Query, expected: str,
           start: str | None = None, filter_empty: bool = True,
           sample_cap: int = 1 << 16) -> Verdict:
    """Check that every PEC selected by the query reaches only ``expected``.

    ``filter_empty=False`` keeps empty PECs in play, reproducing the
    false alarms that counting-based emptiness exists to prevent; it is
    intended for regression tests only.
    """
    lattice = graph.lattice
    pecs = convert_to_pecs(lattice, query)
    if filter_empty:
        pecs = nonempty(lattice, pecs)
    starts = [start] if start is not None else sorted(graph.topology.tables)
    target = _expected_vertex(expected)
    witnesses = []
    for pec in sorted(pecs, key=lambda n: n.id):
        for device in starts:
            reached = _walk_pec(graph, device, pec)
            if reached != target:
                sample = None
                if lattice.schema.universe_size <= sample_cap:
                    sample = oracle.sample_header(lattice, pec, limit=sample_cap)
                witnesses.append(Witness(pec, vertex_label(reached), sample))
                break
    return Verdict(not witnesses, witnesses)
