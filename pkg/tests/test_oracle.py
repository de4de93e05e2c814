"""Brute-force oracles: signatures, DNF reduction, per-header simulation."""

import random

import pytest

from pecount import FieldSpec, Lattice, Schema, Tbv
from pecount.oracle import (DnfFormula, UniverseTooLarge, classify_headers,
                            count_dnf_models, decode_header, dnf_to_elements,
                            empty_pecs_by_enumeration, is_tautology,
                            membership_vector, sample_header,
                            truth_table_is_tautology, truth_table_models)
from pecount.selftest import random_dnf, random_tbv_instance, tbv_schema


def test_dnf_to_elements_golden():
    f = DnfFormula(3, ((1, 3), (1, 2), (2, -3)))
    assert [str(t) for t in dnf_to_elements(f)] == ["1*1", "11*", "*10"]


def test_dnf_single_clause_and_empty_formula():
    assert [str(t) for t in dnf_to_elements(DnfFormula(3, ((1,),)))] == ["1**"]
    assert dnf_to_elements(DnfFormula(3, ())) == []


def test_contradictory_clause_skipped():
    f = DnfFormula(3, ((1, -1), (2,)))
    assert [str(t) for t in dnf_to_elements(f)] == ["*1*"]


def test_dnf_validation():
    with pytest.raises(ValueError):
        DnfFormula(2, ((0,),))
    with pytest.raises(ValueError):
        DnfFormula(2, ((3,),))
    with pytest.raises(ValueError):
        DnfFormula(2, ((),))


def test_dnf_from_text():
    f = DnfFormula.from_text("1 3\n1 2\n# comment\n\n2 -3\n")
    assert f.num_vars == 3
    assert f.clauses == ((1, 3), (1, 2), (2, -3))


def test_tautology_golden():
    assert not is_tautology(DnfFormula(3, ((1, 3), (1, 2), (2, -3))))
    assert is_tautology(DnfFormula(1, ((1,), (-1,))))


def test_count_models_golden():
    f = DnfFormula(3, ((1, 3), (1, 2), (2, -3)))
    assert count_dnf_models(f) == (1 << 3) - 4 == 4
    assert count_dnf_models(DnfFormula(3, ())) == 0


def test_redundant_clause_shows_as_empty_class():
    f = DnfFormula(3, ((1, 3), (1, 2), (2, -3)))
    from pecount.oracle import build_dnf_lattice
    lat = build_dnf_lattice(f)
    node = lat.find(Tbv.from_text("11*"))
    assert lat.is_empty_pec(node)


def test_clause_lattice_edge_structure():
    f = DnfFormula(3, ((1, 3), (1, 2), (2, -3)))
    from pecount.oracle import build_dnf_lattice
    lat = build_dnf_lattice(f)
    edges = {str(n.elem): {str(c.elem) for c in n.child_nodes()}
             for n in lat.nodes}
    assert edges == {
        "***": {"1*1", "11*", "*10"},
        "1*1": {"111"},
        "11*": {"111", "110"},
        "*10": {"110"},
        "111": set(),
        "110": set(),
    }


@pytest.mark.parametrize("seed", range(20))
def test_random_dnf_against_truth_table(seed):
    rng = random.Random(seed)
    f = random_dnf(rng, rng.randint(1, 8), 6)
    assert is_tautology(f) == truth_table_is_tautology(f)
    assert count_dnf_models(f) == truth_table_models(f)


# -- classification -----------------------------------------------------------------


def test_classify_empty_dataset(prefix32_schema):
    small = Schema([FieldSpec(name="dst", kind="prefix", width=8)]).freeze()
    assert classify_headers(small, []) == {frozenset(): 256}


def test_classify_reduced_three_rule_table(small_fig1_schema, small_fig1_elements):
    elements = [small_fig1_elements[k] for k in ("b", "c", "d")]
    classes = classify_headers(small_fig1_schema, elements)
    lat = Lattice(small_fig1_schema)
    for elem in elements:
        lat.insert(elem)
    live = [n for n in lat.nodes if not lat.is_empty_pec(n)]
    assert len(classes) == len(live) == 5
    assert sorted(classes.values()) == \
        sorted(lat.pec_cardinality(n) for n in live)


def test_classify_sibling_prefixes_sixteen_bit():
    schema = Schema([FieldSpec(name="dst", kind="prefix", width=16)]).freeze()
    mk = schema.match_from_mapping
    x, y, z = mk({"dst": "16384/3"}), mk({"dst": "24576/3"}), mk({"dst": "16384/2"})
    classes = classify_headers(schema, [x, y, z])
    assert len(classes) == 3
    assert classes[frozenset({0, 2})] == 1 << 13  # inside x (and so z)
    assert classes[frozenset({1, 2})] == 1 << 13  # inside y (and so z)
    assert classes[frozenset()] == (1 << 16) - (1 << 14)


@pytest.mark.parametrize("seed", range(5))
def test_engines_agree(seed):
    rng = random.Random(seed)
    schema = tbv_schema(6)
    elements = random_tbv_instance(rng, 6, 6)
    fast = classify_headers(schema, elements, engine="numpy")
    slow = classify_headers(schema, elements, engine="python")
    assert fast == slow


def test_classify_tuple_schema(small_fig1_schema, small_fig1_elements):
    elements = list(small_fig1_elements.values())
    fast = classify_headers(small_fig1_schema, elements, engine="numpy")
    slow = classify_headers(small_fig1_schema, elements, engine="python")
    assert fast == slow
    assert sum(fast.values()) == small_fig1_schema.universe_size == 512


def test_universe_cap_enforced(fig1_schema):
    with pytest.raises(UniverseTooLarge):
        classify_headers(fig1_schema, [])
    big = Schema([FieldSpec(name="dst", kind="prefix", width=30)]).freeze()
    with pytest.raises(UniverseTooLarge):
        classify_headers(big, [], cap=1 << 16)


def test_membership_vector_matches_contains(small_fig1_schema, small_fig1_elements):
    elem = small_fig1_elements["b"]
    vec = membership_vector(small_fig1_schema, elem)
    for index in range(small_fig1_schema.universe_size):
        header = decode_header(small_fig1_schema, index)
        assert bool(vec[index]) == elem.contains_header(header)


def test_emptiness_by_enumeration_matches_counting():
    rng = random.Random(11)
    schema = tbv_schema(8)
    lat = Lattice(schema)
    for elem in random_tbv_instance(rng, 8, 14):
        lat.insert(elem)
    enumerated = empty_pecs_by_enumeration(lat)
    counted = {n.id for n in lat.nodes if lat.is_empty_pec(n)}
    assert enumerated == counted


def test_sample_header_lands_in_class(fig1_lattice, fig1_elements):
    node = fig1_lattice.find(fig1_elements["b"])
    sample = sample_header(fig1_lattice, node)
    assert sample is not None
    assert node.elem.contains_header(sample)
    assert not any(c.elem.contains_header(sample) for c in node.child_nodes())
    empty = fig1_lattice.find(fig1_elements["c"])
    assert sample_header(fig1_lattice, empty, limit=1 << 12) is None
