"""File parsing, the two-pass value universe, and round-trips."""

import json

import pytest

from pecount import canonical_key
from pecount.analysis import TopologyError
from pecount.ingest import (Dataset, ParseError, collect_input_values,
                            load_dataset, load_schema_doc, parse_prefix_list,
                            parse_rule_table, parse_schema, parse_tbv_list,
                            parse_topology, serialize_dataset)

FIG1_SCHEMA = {
    "fields": [
        {"name": "src", "type": "prefix", "width": 32},
        {"name": "dst", "type": "prefix", "width": 32},
        {"name": "proto", "type": "set", "domain": 256},
    ]
}

FIG1_RULES = {
    "device": "v2",
    "rules": [
        {"priority": 1,
         "match": {"src": "0.0.0.4/30", "dst": "0.0.0.0/28", "proto": "!{UDP}"},
         "action": "drop"},
        {"priority": 2,
         "match": {"src": "0.0.0.0/29", "dst": "0.0.0.12/30", "proto": "UDP"},
         "action": "drop"},
        {"priority": 3,
         "match": {"src": "0.0.0.4/30", "dst": "0.0.0.12/30"},
         "action": "forward:out"},
    ],
}


def write(path, payload):
    if isinstance(payload, str):
        path.write_text(payload, encoding="utf-8")
    else:
        path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_parse_three_field_schema(tmp_path):
    schema_path = write(tmp_path / "schema.json", FIG1_SCHEMA)
    rules_path = write(tmp_path / "rules.json", FIG1_RULES)
    schema = parse_schema(schema_path, [rules_path])
    assert schema.frozen
    assert [f.kind for f in schema.fields] == ["prefix", "prefix", "set"]
    assert schema.universe_for("proto").values == ("UDP",)
    assert schema.universe_for("proto").nbits == 2  # UDP plus the rest


def test_parse_wide_tbv_schema(tmp_path):
    doc = {"fields": [{"name": "bits", "type": "tbv", "width": 128}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    assert schema.fields[0].width == 128
    assert schema.universe_size == 1 << 128


def test_parse_eight_field_tuple_schema(tmp_path):
    doc = {"fields": [
        {"name": "src", "type": "prefix", "width": 32},
        {"name": "dst", "type": "prefix", "width": 32},
        {"name": "sport", "type": "ranges", "bound": 65536},
        {"name": "dport", "type": "ranges", "bound": 65536},
        {"name": "proto", "type": "set", "domain": 256, "values": ["TCP", "UDP"]},
        {"name": "state", "type": "set", "domain": 4, "values": ["NEW", "EST"]},
        {"name": "iif", "type": "optional", "domain": 16, "values": ["eth0"]},
        {"name": "oif", "type": "optional", "domain": 16, "values": ["eth1"]},
    ]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    assert len(schema.fields) == 8
    match = schema.match_from_mapping(
        {"src": "1.2.3.0/24", "sport": "{[1024:2048)}", "proto": "TCP",
         "iif": "eth0"})
    assert len(match.coords) == 8


def test_schema_errors(tmp_path):
    bad_type = {"fields": [{"name": "x", "type": "hexagon", "width": 4}]}
    with pytest.raises(ParseError):
        load_schema_doc(write(tmp_path / "a.json", bad_type))
    missing_domain = {"fields": [{"name": "x", "type": "set"}]}
    with pytest.raises(ParseError):
        load_schema_doc(write(tmp_path / "b.json", missing_domain))
    with pytest.raises(ParseError):
        load_schema_doc(write(tmp_path / "c.json", "{not json"))


def test_prefix_list_with_comments_and_duplicates(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    text = "# three prefixes\r\n10.57.0.0/19\r\n10.57.32.0/19\n\n10.57.0.0/18\n10.57.0.0/19\n"
    dataset = parse_prefix_list(write(tmp_path / "p.txt", text), schema)
    assert len(dataset.elements) == 3
    assert dataset.duplicates == 1


def test_prefix_list_reports_line_numbers(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    with pytest.raises(ParseError) as err:
        parse_prefix_list(write(tmp_path / "p.txt", "10.0.0.0/8\nbogus\n"), schema)
    assert ":2" in str(err.value)


def test_tbv_list(tmp_path):
    doc = {"fields": [{"name": "bits", "type": "tbv", "width": 3}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    dataset = parse_tbv_list(write(tmp_path / "t.txt", "1*1\n11*\n*10\n"), schema)
    assert [str(e) for e in dataset.elements] == ["1*1", "11*", "*10"]
    with pytest.raises(ParseError):
        parse_tbv_list(write(tmp_path / "bad.txt", "1*10\n"), schema)


def test_rule_table_parse(tmp_path):
    schema_path = write(tmp_path / "schema.json", FIG1_SCHEMA)
    rules_path = write(tmp_path / "rules.json", FIG1_RULES)
    schema = parse_schema(schema_path, [rules_path])
    dataset = parse_rule_table(rules_path, schema)
    assert dataset.device == "v2"
    assert len(dataset.rules) == 3
    assert len(dataset.elements) == 3
    assert dataset.rules[0].action.kind == "drop"
    assert dataset.rules[2].action.target == "out"


def test_unknown_action_rejected(tmp_path):
    schema_path = write(tmp_path / "schema.json", FIG1_SCHEMA)
    doc = {"rules": [{"priority": 1, "match": {}, "action": "teleport"}]}
    rules_path = write(tmp_path / "rules.json", doc)
    schema = parse_schema(schema_path, [rules_path])
    with pytest.raises(ParseError):
        parse_rule_table(rules_path, schema)


def test_topology_parse_and_validation(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    topo_doc = {
        "devices": [
            {"device": "v1", "rules": [
                {"priority": 1, "match": {"dst": "10.57.0.0/18"},
                 "action": "forward:up"}]},
            {"device": "v2", "rules": []},
        ],
        "links": [{"device": "v1", "port": "up", "peer": "v2"}],
    }
    topology = parse_topology(write(tmp_path / "t.json", topo_doc), schema)
    assert set(topology.tables) == {"v1", "v2"}
    assert topology.link_map[("v1", "up")].peer == "v2"

    topo_doc["links"][0]["peer"] = "ghost"
    with pytest.raises(TopologyError):
        parse_topology(write(tmp_path / "t2.json", topo_doc), schema)

    topo_doc["links"] = []
    topo_doc["devices"][0]["rules"].append(
        {"priority": 1, "match": {}, "action": "drop"})
    with pytest.raises(TopologyError):
        parse_topology(write(tmp_path / "t3.json", topo_doc), schema)


def test_topology_link_filter_parsed(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    topo_doc = {
        "devices": [{"device": "a", "rules": []}, {"device": "b", "rules": []}],
        "links": [{"device": "a", "port": "p", "peer": "b",
                   "filter": "[dst=10.0.0.0/8]"}],
    }
    topo_path = write(tmp_path / "t.json", topo_doc)
    schema = parse_schema(write(tmp_path / "s.json", doc), [topo_path])
    topology = parse_topology(topo_path, schema)
    assert topology.links[0].filter is not None


def test_empty_device_list_is_empty_topology(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    topology = parse_topology(write(tmp_path / "t.json", {"devices": []}), schema)
    assert topology.tables == {}


def test_round_trip_preserves_canonical_keys(tmp_path):
    schema_path = write(tmp_path / "schema.json", FIG1_SCHEMA)
    rules_path = write(tmp_path / "rules.json", FIG1_RULES)
    schema = parse_schema(schema_path, [rules_path])
    dataset = parse_rule_table(rules_path, schema)
    redone = write(tmp_path / "again.json", serialize_dataset(dataset))
    dataset2 = parse_rule_table(redone, schema)
    assert [canonical_key(e) for e in dataset.elements] == \
        [canonical_key(e) for e in dataset2.elements]


def test_line_dataset_round_trip(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    dataset = parse_prefix_list(
        write(tmp_path / "p.txt", "10.57.0.0/19\n10.57.0.0/18\n"), schema)
    redone = write(tmp_path / "p2.txt", serialize_dataset(dataset))
    dataset2 = parse_prefix_list(redone, schema)
    assert [canonical_key(e) for e in dataset.elements] == \
        [canonical_key(e) for e in dataset2.elements]


def test_value_layout_independent_of_input_order(tmp_path):
    schema_doc = {"fields": [{"name": "proto", "type": "set", "domain": 16}]}
    rules_a = {"rules": [
        {"priority": 1, "match": {"proto": "UDP"}, "action": "drop"},
        {"priority": 2, "match": {"proto": "{TCP,ICMP}"}, "action": "drop"},
    ]}
    rules_b = {"rules": list(reversed([
        {"priority": 1, "match": {"proto": "UDP"}, "action": "drop"},
        {"priority": 2, "match": {"proto": "{TCP,ICMP}"}, "action": "drop"},
    ]))}
    keys = []
    for name, doc in (("a", rules_a), ("b", rules_b)):
        schema_path = write(tmp_path / f"s{name}.json", schema_doc)
        rules_path = write(tmp_path / f"r{name}.json", doc)
        schema = parse_schema(schema_path, [rules_path])
        assert schema.universe_for("proto").values == ("ICMP", "TCP", "UDP")
        dataset = parse_rule_table(rules_path, schema)
        keys.append(sorted(canonical_key(e) for e in dataset.elements))
    assert keys[0] == keys[1]


def test_wildcard_value_names_rejected(tmp_path):
    schema_doc = {"fields": [{"name": "iif", "type": "optional", "domain": 8}]}
    rules = {"rules": [
        {"priority": 1, "match": {"iif": "eth*"}, "action": "drop"}]}
    schema_path = write(tmp_path / "s.json", schema_doc)
    rules_path = write(tmp_path / "r.json", rules)
    schema = load_schema_doc(schema_path)
    with pytest.raises(ParseError):
        collect_input_values(schema, rules_path)


def test_load_dataset_autodetects(tmp_path):
    doc = {"fields": [{"name": "dst", "type": "prefix", "width": 32}]}
    schema = parse_schema(write(tmp_path / "s.json", doc))
    lines = write(tmp_path / "p.txt", "10.0.0.0/8\n")
    assert isinstance(load_dataset(lines, schema), Dataset)
    table = write(tmp_path / "r.json",
                  {"rules": [{"priority": 1, "match": {}, "action": "drop"}]})
    assert load_dataset(table, schema).rules is not None


def test_value_outside_frozen_universe(tmp_path):
    schema_doc = {"fields": [{"name": "proto", "type": "set", "domain": 16,
                              "values": ["UDP"]}]}
    schema = parse_schema(write(tmp_path / "s.json", schema_doc))
    rules = {"rules": [
        {"priority": 1, "match": {"proto": "GRE"}, "action": "drop"}]}
    rules_path = write(tmp_path / "r.json", rules)
    with pytest.raises(ParseError):
        parse_rule_table(rules_path, schema)
