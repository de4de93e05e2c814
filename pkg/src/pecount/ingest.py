"""Parsers for schemas, rule datasets, and topologies.

Set- and optional-typed fields derive their bit layout from the distinct
values appearing anywhere in the inputs, so ingestion is two-pass:
:func:`parse_schema` scans the given input files for values and freezes
the schema, after which the per-file parsers construct elements.  Layout
indices are assigned in sorted value order, so the result does not
depend on input file order.

Formats (see docs/formats.md): a schema document and rule tables or
topologies are JSON; prefix and ternary-vector datasets are plain text,
one entry per line with ``#`` comments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .analysis import Action, Link, Rule, RuleTable, Topology
from .elements import (ElementError, FieldSpec, Schema, SchemaError,
                       TupleElement, canonical_key)
from .query import (QueryError, _split_top_level, _strip_braces, _tokenize,
                    parse_query)


class ParseError(ValueError):
    """Input file problem, with file and line context where available."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = str(path)
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass
class Dataset:
    """Deduplicated match conditions from one input file."""

    schema: Schema
    elements: list
    rules: list[Rule] | None = None
    device: str | None = None
    duplicates: int = 0
    source: str | None = None


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(exc), path) from exc


def _read_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}", path, exc.lineno) from exc


# -- schema ----------------------------------------------------------------------


def load_schema_doc(path) -> Schema:
    """Read a schema document; the result is not yet frozen."""
    doc = _read_json(path)
    if not isinstance(doc, dict) or "fields" not in doc:
        raise ParseError("schema document needs a 'fields' array", path)
    specs = []
    for i, raw in enumerate(doc["fields"]):
        try:
            specs.append(FieldSpec(
                name=raw["name"],
                kind=raw["type"],
                width=int(raw.get("width", 0)),
                bound=int(raw.get("bound", 0)),
                domain=int(raw.get("domain", 0)),
                declared_values=tuple(str(v) for v in raw.get("values", ())),
            ))
        except (KeyError, TypeError, ValueError, SchemaError) as exc:
            raise ParseError(f"field #{i}: {exc}", path) from exc
    try:
        return Schema(specs)
    except SchemaError as exc:
        raise ParseError(str(exc), path) from exc


def parse_schema(path, input_paths=()) -> Schema:
    """Load a schema and freeze it after scanning inputs for set values."""
    schema = load_schema_doc(path)
    for input_path in input_paths:
        collect_input_values(schema, input_path)
    try:
        return schema.freeze()
    except SchemaError as exc:
        raise ParseError(str(exc), path) from exc


def _set_tokens(text: str) -> list[str]:
    """Explicit value tokens in a set/optional literal; none for full-domain."""
    text = str(text).strip()
    if text in ("*", "ANY", "any"):
        return []
    if text.startswith("!"):
        text = text[1:].strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    for token in tokens:
        if "*" in token or "?" in token:
            raise ElementError(f"wildcard value name {token!r} is not supported")
    return tokens


def _collect_from_match(schema: Schema, mapping: dict) -> None:
    for name, value in mapping.items():
        spec = schema.fields[schema.field_index(name)]
        if spec.kind not in ("set", "optional"):
            continue
        for token in _set_tokens(value):
            schema.collect_value(name, token)


def _collect_from_query_text(schema: Schema, text: str) -> None:
    for token in _tokenize(text):
        if not (isinstance(token, tuple) and token[0] == "atom"):
            continue
        body = token[1].strip()
        if not body:
            continue
        pairs = _split_top_level(body, ",")
        if len(pairs) == 1 and "=" not in _strip_braces(pairs[0]):
            if len(schema.fields) == 1:
                _collect_from_match(schema, {schema.fields[0].name: pairs[0].strip()})
            continue
        mapping = {}
        for pair in pairs:
            name, eq, value = pair.partition("=")
            if eq:
                mapping[name.strip()] = value.strip()
        _collect_from_match(schema, mapping)


def collect_input_values(schema: Schema, path) -> None:
    """First pass over one input file: record set/optional value tokens."""
    text = _read_text(path)
    stripped = text.lstrip()
    if not stripped.startswith("{"):
        return  # line-oriented prefix/tbv lists carry no set values
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}", path, exc.lineno) from exc
    tables = doc.get("devices", [doc]) if isinstance(doc, dict) else []
    for table in tables:
        for rule in table.get("rules", []):
            match = rule.get("match", {})
            try:
                _collect_from_match(schema, match)
            except (ElementError, SchemaError) as exc:
                raise ParseError(str(exc), path) from exc
    for link in doc.get("links", []) if isinstance(doc, dict) else []:
        if "filter" in link:
            _collect_from_query_text(schema, link["filter"])


def collect_query_values(schema: Schema, query_text: str) -> None:
    """Record set/optional tokens from a query before freezing the schema."""
    _collect_from_query_text(schema, query_text)


# -- line datasets ----------------------------------------------------------------


def _dedup(schema: Schema, elements) -> tuple[list, int]:
    seen = set()
    unique = []
    duplicates = 0
    for elem in elements:
        key = canonical_key(elem)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        unique.append(elem)
    return unique, duplicates


def _parse_lines(path, schema: Schema, field_index: int) -> Dataset:
    if not schema.frozen:
        raise ParseError("schema must be frozen first", path)
    elements = []
    for line_no, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            elements.append(schema.parse_field_value(field_index, line))
        except (ElementError, SchemaError) as exc:
            raise ParseError(str(exc), path, line_no) from exc
    unique, duplicates = _dedup(schema, elements)
    return Dataset(schema, unique, duplicates=duplicates, source=str(path))


def parse_prefix_list(path, schema: Schema) -> Dataset:
    """One CIDR per line against a single prefix-typed field."""
    index = _single_field(schema, "prefix", path)
    return _parse_lines(path, schema, index)


def parse_tbv_list(path, schema: Schema) -> Dataset:
    """One fixed-width ternary string per line."""
    index = _single_field(schema, "tbv", path)
    return _parse_lines(path, schema, index)


def _single_field(schema: Schema, kind: str, path) -> int:
    if len(schema.fields) != 1 or schema.fields[0].kind != kind:
        raise ParseError(
            f"line datasets need a single {kind!r} field schema, "
            f"got {schema!r}", path)
    return 0


# -- rule tables and topologies -----------------------------------------------------


def _parse_action(raw: str) -> Action:
    text = str(raw).strip()
    lowered = text.lower()
    if lowered == "drop":
        return Action.drop()
    if lowered == "controller":
        return Action.controller()
    if lowered.startswith("forward:"):
        port = text.partition(":")[2].strip()
        return Action.forward(port)
    raise ElementError(f"unknown action {raw!r} "
                       "(use drop | controller | forward:<port>)")


def _parse_table(doc: dict, schema: Schema, path, default_device: str) -> RuleTable:
    device = str(doc.get("device", default_device))
    rules = []
    for i, raw in enumerate(doc.get("rules", [])):
        try:
            match = schema.match_from_mapping(raw.get("match", {}))
            rules.append(Rule(
                priority=int(raw["priority"]),
                match=match,
                action=_parse_action(raw["action"]),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"device {device!r} rule #{i}: {exc}", path) from exc
    return RuleTable(device, rules)


def parse_rule_table(path, schema: Schema) -> Dataset:
    """A single device's priority-ordered rules (JSON)."""
    if not schema.frozen:
        raise ParseError("schema must be frozen first", path)
    doc = _read_json(path)
    table = _parse_table(doc, schema, path, default_device="device0")
    unique, duplicates = _dedup(schema, [r.match for r in table.rules])
    return Dataset(schema, unique, rules=table.rules, device=table.device,
                   duplicates=duplicates, source=str(path))


def parse_topology(path, schema: Schema) -> Topology:
    """Devices with rule tables plus directed (device, port) -> peer links."""
    if not schema.frozen:
        raise ParseError("schema must be frozen first", path)
    doc = _read_json(path)
    if not isinstance(doc, dict) or "devices" not in doc:
        raise ParseError("topology document needs a 'devices' array", path)
    tables = {}
    for i, raw in enumerate(doc["devices"]):
        table = _parse_table(raw, schema, path, default_device=f"device{i}")
        if table.device in tables:
            raise ParseError(f"duplicate device {table.device!r}", path)
        tables[table.device] = table
    links = []
    for i, raw in enumerate(doc.get("links", [])):
        try:
            filter_query = None
            if "filter" in raw:
                filter_query = parse_query(raw["filter"], schema)
            links.append(Link(
                device=str(raw["device"]),
                port=str(raw["port"]),
                peer=str(raw["peer"]),
                filter=filter_query,
            ))
        except (KeyError, TypeError, QueryError) as exc:
            raise ParseError(f"link #{i}: {exc}", path) from exc
    return Topology(tables, links)


def load_dataset(path, schema: Schema) -> Dataset:
    """Parse a rules file, auto-detecting JSON rule tables vs. line lists."""
    text = _read_text(path)
    if text.lstrip().startswith("{"):
        return parse_rule_table(path, schema)
    if len(schema.fields) != 1:
        raise ParseError("line datasets need a single-field schema", path)
    kind = schema.fields[0].kind
    if kind == "prefix":
        return parse_prefix_list(path, schema)
    if kind == "tbv":
        return parse_tbv_list(path, schema)
    return _parse_lines(path, schema, 0)


# -- serialization -----------------------------------------------------------------


def element_to_mapping(schema: Schema, elem) -> dict[str, str]:
    """Field-name to text mapping that re-parses to the same element."""
    if len(schema.fields) == 1:
        return {schema.fields[0].name: str(elem)}
    assert isinstance(elem, TupleElement)
    return {spec.name: str(coord)
            for spec, coord in zip(schema.fields, elem.coords)}


def serialize_dataset(dataset: Dataset) -> str:
    """Round-trippable text form of a dataset."""
    schema = dataset.schema
    if dataset.rules is not None:
        doc = {
            "device": dataset.device,
            "rules": [
                {
                    "priority": rule.priority,
                    "match": element_to_mapping(schema, rule.match),
                    "action": str(rule.action),
                }
                for rule in dataset.rules
            ],
        }
        return json.dumps(doc, indent=2)
    return "\n".join(str(elem) for elem in dataset.elements) + "\n"
