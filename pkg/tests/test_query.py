"""Query conversion to PEC sets, and the text syntax."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pecount import Lattice
from pecount.oracle import evaluate_query, pec_header_vectors
from pecount.query import (And, Atom, AtomNotFound, Not, Or, QueryError,
                           convert_to_pecs, nonempty, parse_query, prepare)
from pecount.selftest import random_tbv_instance, tbv_schema

from strategies import tbvs
import random


def elems_of(pecs):
    return {n.elem for n in pecs}


def test_edge_router_query_conversion(dst_proto_schema, edge_router_lattice):
    mk = dst_proto_schema.match_from_mapping
    b = mk({"dst": "210.4.214.0/23"})
    f = mk({"proto": "ICMP"})
    c = mk({"dst": "210.4.214.0/24"})
    d = mk({"dst": "210.4.215.0/24"})
    q = And(Atom(b), Not(Atom(f)))
    prepare(edge_router_lattice, q)  # all atoms already inserted: no growth
    assert len(edge_router_lattice) == 8
    pecs = convert_to_pecs(edge_router_lattice, q)
    assert elems_of(pecs) == {b, c, d}
    live = nonempty(edge_router_lattice, pecs)
    assert elems_of(live) == {c, d}  # the /23 class itself is empty


def test_atom_top_is_universe(fig1_lattice, fig1_schema):
    pecs = convert_to_pecs(fig1_lattice, Atom(fig1_schema.top()))
    assert pecs == frozenset(fig1_lattice.subtree(fig1_lattice.root))
    assert len(pecs) == 6


def test_contradiction_is_empty(fig1_lattice, fig1_elements):
    g = Atom(fig1_elements["b"])
    assert convert_to_pecs(fig1_lattice, And(g, Not(g))) == frozenset()


def test_nonempty_filter_trivial(fig1_lattice, fig1_elements):
    c = fig1_lattice.find(fig1_elements["c"])
    assert nonempty(fig1_lattice, {c}) == frozenset()


def test_prepare_inserts_novel_atom(fig1_lattice, fig1_schema):
    novel = Atom(fig1_schema.match_from_mapping({"src": "0.0.0.0/30"}))
    before = len(fig1_lattice)
    prepare(fig1_lattice, novel)
    assert len(fig1_lattice) > before
    assert convert_to_pecs(fig1_lattice, novel)


def test_atom_not_found_without_prepare(fig1_lattice, fig1_schema):
    novel = Atom(fig1_schema.match_from_mapping({"src": "1.2.3.0/30"}))
    with pytest.raises(AtomNotFound):
        convert_to_pecs(fig1_lattice, novel)


def _random_query(rng, atoms, depth):
    if depth == 0 or rng.random() < 0.4:
        return Atom(rng.choice(atoms))
    shape = rng.randrange(3)
    if shape == 0:
        return Not(_random_query(rng, atoms, depth - 1))
    node = And if shape == 1 else Or
    return node(_random_query(rng, atoms, depth - 1),
                _random_query(rng, atoms, depth - 1))


def _built_lattice(seed, width=6, count=8):
    rng = random.Random(seed)
    schema = tbv_schema(width)
    elements = random_tbv_instance(rng, width, count)
    lat = Lattice(schema)
    for elem in elements:
        lat.insert(elem)
    return rng, schema, elements, lat


@pytest.mark.parametrize("seed", range(6))
def test_query_semantics_match_per_header_truth(seed):
    rng, schema, elements, lat = _built_lattice(seed)
    if not elements:
        return
    vectors = pec_header_vectors(lat)
    q = _random_query(rng, elements, depth=3)
    prepare(lat, q)
    vectors = pec_header_vectors(lat)
    selected = convert_to_pecs(lat, q)
    denoted = set()
    for node in selected:
        vec = vectors[node.id]
        denoted.update(int(h) for h in vec.nonzero()[0])
    truth = {h for h in range(schema.universe_size) if evaluate_query(q, h)}
    assert denoted == truth


@pytest.mark.parametrize("seed", range(6))
def test_de_morgan_and_monotonicity(seed):
    rng, schema, elements, lat = _built_lattice(seed)
    if len(elements) < 2:
        return
    g = _random_query(rng, elements, 2)
    h = _random_query(rng, elements, 2)
    for q in (g, h):
        prepare(lat, q)
    lhs = convert_to_pecs(lat, Not(And(g, h)))
    rhs = convert_to_pecs(lat, Or(Not(g), Not(h)))
    assert lhs == rhs
    assert convert_to_pecs(lat, And(g, h)) <= convert_to_pecs(lat, g)


# -- text syntax ----------------------------------------------------------------


def test_parse_field_map_atom(fig1_schema):
    q = parse_query("[src=0.0.0.4/30, proto={UDP}]", fig1_schema)
    assert isinstance(q, Atom)
    expected = fig1_schema.match_from_mapping({"src": "0.0.0.4/30", "proto": "UDP"})
    assert q.element == expected


def test_parse_empty_atom_is_top(fig1_schema):
    assert parse_query("[]", fig1_schema).element == fig1_schema.top()
    assert parse_query("![]", fig1_schema) == Not(Atom(fig1_schema.top()))


def test_parse_precedence(fig1_schema):
    q = parse_query("[proto=UDP] & ![dst=0.0.0.0/28] | []", fig1_schema)
    assert isinstance(q, Or)
    assert isinstance(q.left, And)
    assert isinstance(q.left.right, Not)
    grouped = parse_query("[proto=UDP] & (![dst=0.0.0.0/28] | [])", fig1_schema)
    assert isinstance(grouped, And)


def test_parse_positional_atom_single_field(prefix32_schema):
    q = parse_query("[10.0.0.0/8] & ![]", prefix32_schema)
    assert isinstance(q, And)
    assert q.left.element == prefix32_schema.match_from_mapping({"dst": "10.0.0.0/8"})


def test_parse_errors(fig1_schema, prefix32_schema):
    for bad in ("", "[src=0.0.0.0/0", "[nosuch=1]", "[src=0/0] &",
                "[src=0/0] [dst=0/0]", ")", "[a=1,a=2]"):
        with pytest.raises(QueryError):
            parse_query(bad, fig1_schema)
    with pytest.raises(QueryError):
        parse_query("[10.0.0.0/8]", fig1_schema)  # positional needs 1 field


def test_parse_set_literal_commas(fig1_schema):
    q = parse_query("[proto={UDP}]", fig1_schema)
    assert isinstance(q, Atom)


@settings(max_examples=30, deadline=None)
@given(st.lists(tbvs(width=4), min_size=1, max_size=5))
def test_query_over_hypothesis_lattices(elements):
    schema = tbv_schema(4)
    lat = Lattice(schema)
    for elem in elements:
        lat.insert(elem)
    q = Or(Atom(elements[0]), Not(Atom(elements[-1])))
    prepare(lat, q)
    pecs = convert_to_pecs(lat, q)
    universe = frozenset(lat.subtree(lat.root))
    assert pecs <= universe
    assert convert_to_pecs(lat, Not(q)) == universe - pecs
