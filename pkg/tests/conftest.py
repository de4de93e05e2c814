"""Shared fixtures: the canonical example tables and topologies."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pecount import FieldSpec, Lattice, Schema
from pecount.analysis import Action, Rule, RuleTable, Topology


@pytest.fixture
def fig1_schema():
    """Source/destination prefixes plus a complementable protocol set."""
    return Schema([
        FieldSpec(name="src", kind="prefix", width=32),
        FieldSpec(name="dst", kind="prefix", width=32),
        FieldSpec(name="proto", kind="set", domain=256, declared_values=("UDP",)),
    ]).freeze()


@pytest.fixture
def fig1_elements(fig1_schema):
    """The three-rule table's match conditions and their two meets."""
    mk = fig1_schema.match_from_mapping
    return {
        "b": mk({"src": "0.0.0.4/30", "dst": "0.0.0.0/28", "proto": "!{UDP}"}),
        "c": mk({"src": "0.0.0.4/30", "dst": "0.0.0.12/30"}),
        "d": mk({"src": "0.0.0.0/29", "dst": "0.0.0.12/30", "proto": "UDP"}),
        "e": mk({"src": "0.0.0.4/30", "dst": "0.0.0.12/30", "proto": "!{UDP}"}),
        "f": mk({"src": "0.0.0.4/30", "dst": "0.0.0.12/30", "proto": "UDP"}),
    }


@pytest.fixture
def fig1_lattice(fig1_schema, fig1_elements):
    lattice = Lattice(fig1_schema)
    for name in ("b", "c", "d"):
        lattice.insert(fig1_elements[name])
    return lattice


@pytest.fixture
def small_fig1_schema():
    """Same shape as fig1 on a 512-header universe, enumerable by the oracle."""
    return Schema([
        FieldSpec(name="src", kind="prefix", width=4),
        FieldSpec(name="dst", kind="prefix", width=4),
        FieldSpec(name="proto", kind="set", domain=2, declared_values=("UDP",)),
    ]).freeze()


@pytest.fixture
def small_fig1_elements(small_fig1_schema):
    mk = small_fig1_schema.match_from_mapping
    return {
        "b": mk({"src": "4/2", "dst": "0/0", "proto": "!{UDP}"}),
        "c": mk({"src": "4/2", "dst": "12/2"}),
        "d": mk({"src": "0/1", "dst": "12/2", "proto": "UDP"}),
    }


@pytest.fixture
def dst_proto_schema():
    return Schema([
        FieldSpec(name="dst", kind="prefix", width=32),
        FieldSpec(name="proto", kind="set", domain=256, declared_values=("ICMP",)),
    ]).freeze()


@pytest.fixture
def edge_router_table(dst_proto_schema):
    """Five OpenFlow-style rules, highest priority first."""
    mk = dst_proto_schema.match_from_mapping
    return RuleTable("edge", [
        Rule(1, mk({"proto": "ICMP"}), Action.controller()),
        Rule(2, mk({"dst": "210.4.214.0/24"}), Action.forward("Port 1")),
        Rule(3, mk({"dst": "210.4.215.0/24"}), Action.forward("Port 1")),
        Rule(4, mk({"dst": "210.4.214.0/23"}), Action.forward("Port 2")),
        Rule(5, mk({}), Action.drop()),
    ])


@pytest.fixture
def edge_router_lattice(dst_proto_schema, edge_router_table):
    lattice = Lattice(dst_proto_schema)
    for rule in edge_router_table.rules:
        lattice.insert(rule.match)
    return lattice


@pytest.fixture
def prefix32_schema():
    return Schema([FieldSpec(name="dst", kind="prefix", width=32)]).freeze()


@pytest.fixture
def tiled_drop_table(prefix32_schema):
    """Six prefixes that tile a /24, then a shadowed /24 drop rule."""
    mk = prefix32_schema.match_from_mapping
    targets = [
        ("171.64.79.160/28", "core"),
        ("171.64.79.176/28", "core"),
        ("171.64.79.128/27", "core"),
        ("171.64.79.192/27", "core"),
        ("171.64.79.224/27", "core"),
        ("171.64.79.0/25", "core"),
    ]
    rules = [Rule(i + 1, mk({"dst": cidr}), Action.forward(port))
             for i, (cidr, port) in enumerate(targets)]
    rules.append(Rule(7, mk({"dst": "171.64.79.0/24"}), Action.drop()))
    return RuleTable("border", rules)


@pytest.fixture
def two_router_topology(prefix32_schema):
    """The sibling-prefix pair plus their covering parent, routed in a cycle
    shape that must nevertheless carry no loop."""
    mk = prefix32_schema.match_from_mapping
    x = mk({"dst": "10.57.0.0/19"})
    y = mk({"dst": "10.57.32.0/19"})
    z = mk({"dst": "10.57.0.0/18"})
    v1 = RuleTable("v1", [
        Rule(1, x, Action.forward("up")),
        Rule(2, y, Action.forward("up")),
        Rule(3, z, Action.forward("up")),
    ])
    v2 = RuleTable("v2", [
        Rule(1, x, Action.drop()),
        Rule(2, y, Action.drop()),
        Rule(3, z, Action.forward("back")),
    ])
    from pecount.analysis import Link
    return Topology({"v1": v1, "v2": v2}, [
        Link("v1", "up", "v2"),
        Link("v2", "back", "v1"),
    ])
