"""Match-condition algebra.

A match condition ("element") is an immutable value drawn from a finite
partially ordered set: an IP prefix, a ternary bit vector, a half-closed
range, a set of disjoint ranges, a value set, an optional value, or a
fixed-arity tuple of these.  Every element supports exact intersection
(the greatest lower bound), subset testing, and exact cardinality;
disjoint range sets and value sets additionally support complement.

The empty match is never materialized as an element: operations that
would produce it return ``None`` instead.
"""

from __future__ import annotations

import ipaddress
import math
from dataclasses import dataclass, field


class ElementError(ValueError):
    """Malformed element, or an operation across mismatched types/schemas."""


class UnsupportedComplement(ElementError):
    """Complement requested on a type that cannot negate efficiently."""


class SchemaError(ValueError):
    """Schema declaration or validation failure."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ElementError(msg)


def _same_kind(a, b) -> None:
    if type(a) is not type(b):
        raise ElementError(f"type mismatch: {type(a).__name__} vs {type(b).__name__}")


@dataclass(frozen=True, slots=True)
class IpPrefix:
    """A ``width``-bit address prefix; host bits of ``address`` must be zero."""

    width: int
    address: int
    prefix_len: int

    def __post_init__(self):
        _require(0 < self.width, "prefix width must be positive")
        _require(0 <= self.prefix_len <= self.width, "prefix length out of range")
        _require(0 <= self.address < (1 << self.width), "address out of range")
        host_bits = self.width - self.prefix_len
        _require(self.address & ((1 << host_bits) - 1) == 0,
                 "address has non-zero host bits (not canonical)")

    @classmethod
    def from_text(cls, text: str, width: int = 32) -> "IpPrefix":
        """Parse ``a.b.c.d/p`` (width 32) or ``int/p``; a bare value means /width."""
        text = text.strip()
        if text in ("*", "ANY", "any"):
            return cls(width, 0, 0)
        if width == 32 and ("." in text):
            try:
                net = ipaddress.IPv4Network(text, strict=True)
            except ValueError as exc:
                raise ElementError(f"bad IPv4 prefix {text!r}: {exc}") from exc
            return cls(32, int(net.network_address), net.prefixlen)
        if "/" in text:
            addr_s, _, plen_s = text.partition("/")
            try:
                return cls(width, int(addr_s, 0), int(plen_s))
            except ValueError as exc:
                raise ElementError(f"bad prefix {text!r}: {exc}") from exc
        try:
            return cls(width, int(text, 0), width)
        except ValueError as exc:
            raise ElementError(f"bad prefix {text!r}: {exc}") from exc

    def cardinality(self) -> int:
        return 1 << (self.width - self.prefix_len)

    def intersect(self, other: "IpPrefix"):
        _same_kind(self, other)
        _require(self.width == other.width, "prefix width mismatch")
        if self.prefix_len > other.prefix_len:
            return other.intersect(self)
        # self is the shorter (or equal) prefix: overlap iff it contains other
        shift = self.width - self.prefix_len
        if other.address >> shift == self.address >> shift:
            return other
        return None

    def issubset(self, other: "IpPrefix") -> bool:
        _same_kind(self, other)
        _require(self.width == other.width, "prefix width mismatch")
        if other.prefix_len > self.prefix_len:
            return False
        if other.prefix_len == 0:
            return True
        shift = self.width - other.prefix_len
        return self.address >> shift == other.address >> shift

    def contains_header(self, h: int) -> bool:
        shift = self.width - self.prefix_len
        return h >> shift == self.address >> shift

    def as_range(self) -> "Range":
        """The same address set as a half-closed interval."""
        return Range(1 << self.width, self.address,
                     self.address + self.cardinality())

    def iter_headers(self):
        return iter(range(self.address, self.address + self.cardinality()))

    def key(self):
        return ("P", self.width, self.address, self.prefix_len)

    def __str__(self):
        if self.width == 32:
            return f"{ipaddress.IPv4Address(self.address)}/{self.prefix_len}"
        return f"{self.address}/{self.prefix_len}"


@dataclass(frozen=True, slots=True)
class Tbv:
    """Fixed-width ternary bit vector.

    ``care`` has a 1 at every non-wildcard position, ``value`` holds the
    fixed bits (``value & ~care == 0``).  Text position ``j`` (from the
    left) maps to bit ``width - 1 - j``.
    """

    width: int
    care: int
    value: int

    def __post_init__(self):
        _require(self.width > 0, "tbv width must be positive")
        full = (1 << self.width) - 1
        _require(0 <= self.care <= full, "care mask out of range")
        _require(self.value & ~self.care == 0, "value bits outside care mask")

    @classmethod
    def from_text(cls, text: str, width: int | None = None) -> "Tbv":
        text = text.strip()
        if text in ("ANY", "any") and width:
            return cls(width, 0, 0)
        if width is not None and len(text) != width:
            raise ElementError(f"tbv {text!r} is not {width} digits wide")
        care = value = 0
        for ch in text:
            care <<= 1
            value <<= 1
            if ch == "1":
                care |= 1
                value |= 1
            elif ch == "0":
                care |= 1
            elif ch not in ("*", "∗"):
                raise ElementError(f"bad ternary digit {ch!r} in {text!r}")
        return cls(len(text), care, value)

    def cardinality(self) -> int:
        return 1 << (self.width - self.care.bit_count())

    def intersect(self, other: "Tbv"):
        _same_kind(self, other)
        _require(self.width == other.width, "tbv width mismatch")
        if (self.value ^ other.value) & self.care & other.care:
            return None
        return Tbv(self.width, self.care | other.care, self.value | other.value)

    def issubset(self, other: "Tbv") -> bool:
        _same_kind(self, other)
        _require(self.width == other.width, "tbv width mismatch")
        return (other.care & ~self.care) == 0 and \
            (self.value ^ other.value) & other.care == 0

    def contains_header(self, h: int) -> bool:
        return (h ^ self.value) & self.care == 0

    def iter_headers(self):
        free = [i for i in range(self.width) if not self.care >> i & 1]
        for combo in range(1 << len(free)):
            h = self.value
            for j, bit in enumerate(free):
                if combo >> j & 1:
                    h |= 1 << bit
            yield h

    def key(self):
        return ("T", self.width, self.care, self.value)

    def __str__(self):
        out = []
        for j in range(self.width):
            bit = self.width - 1 - j
            if not self.care >> bit & 1:
                out.append("*")
            else:
                out.append("1" if self.value >> bit & 1 else "0")
        return "".join(out)


@dataclass(frozen=True, slots=True)
class Range:
    """Half-closed interval ``[lo:hi)`` inside the field domain ``[0:bound)``."""

    bound: int
    lo: int
    hi: int

    def __post_init__(self):
        _require(0 <= self.lo < self.hi <= self.bound, "range bounds out of order")

    @classmethod
    def from_text(cls, text: str, bound: int) -> "Range":
        text = text.strip()
        if text in ("*", "ANY", "any"):
            return cls(bound, 0, bound)
        if text.startswith("[") and text.endswith(")"):
            lo_s, _, hi_s = text[1:-1].partition(":")
            try:
                return cls(bound, int(lo_s), int(hi_s))
            except ValueError as exc:
                raise ElementError(f"bad range {text!r}: {exc}") from exc
        try:
            v = int(text)
        except ValueError as exc:
            raise ElementError(f"bad range {text!r}") from exc
        return cls(bound, v, v + 1)

    def cardinality(self) -> int:
        return self.hi - self.lo

    def intersect(self, other: "Range"):
        _same_kind(self, other)
        _require(self.bound == other.bound, "range bound mismatch")
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo >= hi:
            return None
        return Range(self.bound, lo, hi)

    def contains_header(self, h: int) -> bool:
        return self.lo <= h < self.hi

    def iter_headers(self):
        return iter(range(self.lo, self.hi))

    def key(self):
        return ("R", self.bound, self.lo, self.hi)

    def __str__(self):
        return f"[{self.lo}:{self.hi})"


@dataclass(frozen=True, slots=True)
class DisjointRanges:
    """A non-empty union of disjoint half-closed intervals over ``[0:bound)``.

    Internally a strictly increasing boundary array whose first and last
    entries are the domain sentinels 0 and ``bound``; consecutive pairs
    alternate between covered and uncovered.  ``covered_from_start``
    selects whether coverage begins at the first boundary, so complement
    is a constant-time flag flip.
    """

    bound: int
    boundaries: tuple[int, ...]
    covered_from_start: bool

    def __post_init__(self):
        b = self.boundaries
        _require(len(b) >= 2, "boundary array too short")
        _require(b[0] == 0 and b[-1] == self.bound, "missing domain sentinels")
        _require(all(x < y for x, y in zip(b, b[1:])), "boundaries not increasing")
        _require(len(self.intervals()) > 0, "empty range set is not an element")

    @classmethod
    def from_intervals(cls, bound: int, intervals) -> "DisjointRanges":
        ivs = sorted((int(lo), int(hi)) for lo, hi in intervals)
        _require(bool(ivs), "empty range set is not an element")
        for lo, hi in ivs:
            _require(0 <= lo < hi <= bound, f"interval [{lo}:{hi}) out of domain")
        merged = [list(ivs[0])]
        for lo, hi in ivs[1:]:
            if lo <= merged[-1][1]:  # overlapping or adjacent: coalesce
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        interior = [p for lo, hi in merged for p in (lo, hi) if 0 < p < bound]
        boundaries = tuple([0] + interior + [bound])
        return cls(bound, boundaries, merged[0][0] == 0)

    @classmethod
    def from_text(cls, text: str, bound: int) -> "DisjointRanges":
        text = text.strip()
        if text in ("*", "ANY", "any"):
            return cls.from_intervals(bound, [(0, bound)])
        negate = text.startswith("!")
        if negate:
            text = text[1:].strip()
        body = text[1:-1] if text.startswith("{") and text.endswith("}") else text
        ivs = []
        for part in body.split(","):
            part = part.strip()
            if not part:
                continue
            if not (part.startswith("[") and part.endswith(")")):
                raise ElementError(f"bad interval {part!r}")
            lo_s, _, hi_s = part[1:-1].partition(":")
            try:
                ivs.append((int(lo_s), int(hi_s)))
            except ValueError as exc:
                raise ElementError(f"bad interval {part!r}: {exc}") from exc
        elem = cls.from_intervals(bound, ivs)
        if negate:
            flipped = elem.complement()
            if flipped is None:
                raise ElementError(f"{text!r} complements the full domain (empty match)")
            return flipped
        return elem

    def intervals(self) -> tuple[tuple[int, int], ...]:
        out = []
        i = 0 if self.covered_from_start else 1
        b = self.boundaries
        while i + 1 < len(b):
            out.append((b[i], b[i + 1]))
            i += 2
        return tuple(out)

    def cardinality(self) -> int:
        return sum(hi - lo for lo, hi in self.intervals())

    def intersect(self, other: "DisjointRanges"):
        _same_kind(self, other)
        _require(self.bound == other.bound, "range bound mismatch")
        mine, theirs = self.intervals(), other.intervals()
        out = []
        i = j = 0
        while i < len(mine) and j < len(theirs):
            lo = max(mine[i][0], theirs[j][0])
            hi = min(mine[i][1], theirs[j][1])
            if lo < hi:
                out.append((lo, hi))
            if mine[i][1] <= theirs[j][1]:
                i += 1
            else:
                j += 1
        if not out:
            return None
        return DisjointRanges.from_intervals(self.bound, out)

    def complement(self):
        # the flip is empty only when this element covers the whole domain
        if self.boundaries == (0, self.bound) and self.covered_from_start:
            return None
        return DisjointRanges(self.bound, self.boundaries,
                              not self.covered_from_start)

    def contains_header(self, h: int) -> bool:
        return any(lo <= h < hi for lo, hi in self.intervals())

    def iter_headers(self):
        for lo, hi in self.intervals():
            yield from range(lo, hi)

    def key(self):
        return ("D", self.bound, self.covered_from_start, self.boundaries)

    def __str__(self):
        return "{" + ",".join(f"[{lo}:{hi})" for lo, hi in self.intervals()) + "}"


@dataclass(frozen=True)
class ValueUniverse:
    """Frozen per-field layout for set/optional elements.

    ``values`` are the distinct explicit values named anywhere in the
    inputs, sorted; bit ``i`` of a :class:`ValueSet` stands for
    ``values[i]``.  When the declared domain exceeds the explicit values,
    one extra trailing bit stands for all remaining ("other") values.
    """

    values: tuple[str, ...]
    domain_size: int
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.values)) != len(self.values):
            raise SchemaError("duplicate values in universe")
        if tuple(sorted(self.values)) != self.values:
            raise SchemaError("universe values must be sorted")
        if self.domain_size < len(self.values):
            raise SchemaError(
                f"domain size {self.domain_size} below {len(self.values)} distinct values")
        if self.domain_size < 1:
            raise SchemaError("domain size must be positive")
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.values)})

    @property
    def has_other(self) -> bool:
        return self.domain_size > len(self.values)

    @property
    def nbits(self) -> int:
        return len(self.values) + (1 if self.has_other else 0)

    @property
    def full_mask(self) -> int:
        return (1 << self.nbits) - 1

    @property
    def other_weight(self) -> int:
        return self.domain_size - len(self.values)

    def index(self, value: str) -> int:
        try:
            return self._index[value]
        except KeyError:
            raise ElementError(
                f"value {value!r} not in the frozen universe "
                f"(declare it in the schema or an input)") from None


@dataclass(frozen=True, slots=True)
class ValueSet:
    """Bitset over a :class:`ValueUniverse`; the trailing bit, when present,
    matches every value not explicitly named in the inputs."""

    universe: ValueUniverse
    bits: int

    def __post_init__(self):
        _require(0 < self.bits <= self.universe.full_mask,
                 "value set bits out of range (empty set is not an element)")

    @classmethod
    def from_values(cls, universe: ValueUniverse, values) -> "ValueSet":
        bits = 0
        for v in values:
            bits |= 1 << universe.index(str(v))
        return cls(universe, bits)

    @classmethod
    def full(cls, universe: ValueUniverse) -> "ValueSet":
        return cls(universe, universe.full_mask)

    @classmethod
    def from_text(cls, text: str, universe: ValueUniverse) -> "ValueSet":
        text = text.strip()
        if text in ("*", "ANY", "any"):
            return cls.full(universe)
        negate = text.startswith("!")
        if negate:
            text = text[1:].strip()
        body = text[1:-1] if text.startswith("{") and text.endswith("}") else text
        values = [p.strip() for p in body.split(",") if p.strip()]
        if not values:
            raise ElementError("empty value set literal")
        elem = cls.from_values(universe, values)
        if negate:
            flipped = elem.complement()
            if flipped is None:
                raise ElementError(f"!{text} matches nothing")
            return flipped
        return elem

    def cardinality(self) -> int:
        k = len(self.universe.values)
        explicit = (self.bits & ((1 << k) - 1)).bit_count()
        other = self.universe.other_weight if self.universe.has_other and \
            self.bits >> k & 1 else 0
        return explicit + other

    def intersect(self, other: "ValueSet"):
        _same_kind(self, other)
        _require(self.universe == other.universe, "value universe mismatch")
        bits = self.bits & other.bits
        if not bits:
            return None
        return ValueSet(self.universe, bits)

    def complement(self):
        bits = self.bits ^ self.universe.full_mask
        if not bits:
            return None
        return ValueSet(self.universe, bits)

    def contains_header(self, h: int) -> bool:
        k = len(self.universe.values)
        if h < k:
            return bool(self.bits >> h & 1)
        return self.universe.has_other and bool(self.bits >> k & 1)

    def iter_headers(self):
        k = len(self.universe.values)
        for i in range(k):
            if self.bits >> i & 1:
                yield i
        if self.universe.has_other and self.bits >> k & 1:
            yield from range(k, self.universe.domain_size)

    def key(self):
        return ("S", self.universe.domain_size, len(self.universe.values), self.bits)

    def __str__(self):
        k = len(self.universe.values)
        if self.bits == self.universe.full_mask:
            return "*"
        if self.universe.has_other and self.bits >> k & 1:
            missing = [v for i, v in enumerate(self.universe.values)
                       if not self.bits >> i & 1]
            return "!{" + ",".join(missing) + "}"
        present = [v for i, v in enumerate(self.universe.values) if self.bits >> i & 1]
        return "{" + ",".join(present) + "}"


@dataclass(frozen=True, slots=True)
class OptionalValue:
    """Wildcard, or exactly one value of the field domain."""

    universe: ValueUniverse
    value: str | None  # None means wildcard

    def __post_init__(self):
        if self.value is not None:
            self.universe.index(self.value)  # must be a known explicit value

    @classmethod
    def from_text(cls, text: str, universe: ValueUniverse) -> "OptionalValue":
        text = text.strip()
        if text in ("*", "ANY", "any"):
            return cls(universe, None)
        return cls(universe, text)

    @property
    def is_wildcard(self) -> bool:
        return self.value is None

    def cardinality(self) -> int:
        return self.universe.domain_size if self.is_wildcard else 1

    def intersect(self, other: "OptionalValue"):
        _same_kind(self, other)
        _require(self.universe == other.universe, "value universe mismatch")
        if self.is_wildcard:
            return other
        if other.is_wildcard or other.value == self.value:
            return self
        return None

    def contains_header(self, h: int) -> bool:
        return self.is_wildcard or h == self.universe.index(self.value)

    def iter_headers(self):
        if self.is_wildcard:
            return iter(range(self.universe.domain_size))
        return iter((self.universe.index(self.value),))

    def key(self):
        return ("O", self.universe.domain_size, self.value)

    def __str__(self):
        return "*" if self.is_wildcard else str(self.value)


@dataclass(frozen=True, slots=True)
class TupleElement:
    """Fixed-arity product of elements, ordered coordinate-wise."""

    coords: tuple

    def __post_init__(self):
        _require(len(self.coords) >= 1, "tuple element needs coordinates")

    def cardinality(self) -> int:
        return math.prod(c.cardinality() for c in self.coords)

    def intersect(self, other: "TupleElement"):
        _same_kind(self, other)
        _require(len(self.coords) == len(other.coords), "tuple arity mismatch")
        out = []
        for a, b in zip(self.coords, other.coords):
            meet = a.intersect(b)
            if meet is None:
                return None
            out.append(meet)
        return TupleElement(tuple(out))

    def issubset(self, other: "TupleElement") -> bool:
        _same_kind(self, other)
        _require(len(self.coords) == len(other.coords), "tuple arity mismatch")
        return all(is_subset(a, b) for a, b in zip(self.coords, other.coords))

    def contains_header(self, h) -> bool:
        return all(c.contains_header(x) for c, x in zip(self.coords, h))

    def iter_headers(self):
        def rec(i):
            if i == len(self.coords):
                yield ()
                return
            for x in self.coords[i].iter_headers():
                for rest in rec(i + 1):
                    yield (x,) + rest
        return rec(0)

    def key(self):
        return ("U",) + tuple(c.key() for c in self.coords)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def intersect(a, b):
    """Greatest lower bound of two same-type elements, or ``None`` if disjoint."""
    return a.intersect(b)


def is_subset(a, b) -> bool:
    """True iff every header matched by ``a`` is matched by ``b``."""
    fast = getattr(a, "issubset", None)
    if fast is not None:
        return fast(b)
    return a.intersect(b) == a


def cardinality(a) -> int:
    """Exact number of headers matched by ``a``."""
    return a.cardinality()


def complement(a):
    """Exact complement within the field domain; ``None`` if ``a`` is full.

    Only :class:`DisjointRanges` and :class:`ValueSet` support this.
    """
    op = getattr(a, "complement", None)
    if op is None:
        raise UnsupportedComplement(f"{type(a).__name__} has no complement operator")
    return op()


def canonical_key(a) -> bytes:
    """Injective byte key within one schema: equal iff same header set."""
    return repr(a.key()).encode()


_FIELD_KINDS = ("prefix", "tbv", "range", "ranges", "set", "optional")


@dataclass(frozen=True, slots=True)
class FieldSpec:
    """One field of a schema: its name, element kind, and domain size."""

    name: str
    kind: str
    width: int = 0      # prefix / tbv
    bound: int = 0      # range / ranges
    domain: int = 0     # set / optional
    declared_values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in _FIELD_KINDS:
            raise SchemaError(f"unknown element type {self.kind!r}")
        if self.kind in ("prefix", "tbv") and self.width < 1:
            raise SchemaError(f"field {self.name!r}: width required")
        if self.kind in ("range", "ranges") and self.bound < 1:
            raise SchemaError(f"field {self.name!r}: bound required")
        if self.kind in ("set", "optional") and self.domain < 1:
            raise SchemaError(f"field {self.name!r}: domain size required")

    @property
    def domain_size(self) -> int:
        if self.kind in ("prefix", "tbv"):
            return 1 << self.width
        if self.kind in ("range", "ranges"):
            return self.bound
        return self.domain


class Schema:
    """Ordered field layout for one dataset.

    Set and optional fields get their bit layout from the distinct values
    seen across *all* inputs, so ingestion is two-pass: collect values
    with :meth:`collect_value`, then :meth:`freeze` before any element is
    constructed.  A schema with a single field produces bare elements;
    multi-field schemas produce :class:`TupleElement`.
    """

    def __init__(self, field_specs):
        self.fields: tuple[FieldSpec, ...] = tuple(field_specs)
        if not self.fields:
            raise SchemaError("schema needs at least one field")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate field names")
        self._by_name = {f.name: i for i, f in enumerate(self.fields)}
        self._pools: dict[str, set[str]] = {
            f.name: set(f.declared_values)
            for f in self.fields if f.kind in ("set", "optional")
        }
        self._universes: dict[str, ValueUniverse] | None = None

    @property
    def frozen(self) -> bool:
        return self._universes is not None

    def field_index(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown field {name!r}") from None

    def collect_value(self, field_name: str, value) -> None:
        """First ingestion pass: record an explicit set/optional value."""
        if self.frozen:
            raise SchemaError("schema already frozen")
        spec = self.fields[self.field_index(field_name)]
        if spec.kind not in ("set", "optional"):
            return
        self._pools[field_name].add(str(value))

    def freeze(self) -> "Schema":
        """Fix per-field value layouts; indices are assigned in sorted order."""
        if self.frozen:
            return self
        universes = {}
        for spec in self.fields:
            if spec.kind not in ("set", "optional"):
                continue
            values = tuple(sorted(self._pools[spec.name]))
            if len(values) > spec.domain:
                raise SchemaError(
                    f"field {spec.name!r}: {len(values)} distinct values exceed "
                    f"domain size {spec.domain}")
            universes[spec.name] = ValueUniverse(values, spec.domain)
        self._universes = universes
        return self

    def universe_for(self, field_name: str) -> ValueUniverse:
        if not self.frozen:
            raise SchemaError("schema not frozen yet")
        return self._universes[field_name]

    def field_top(self, i: int):
        spec = self.fields[i]
        if spec.kind == "prefix":
            return IpPrefix(spec.width, 0, 0)
        if spec.kind == "tbv":
            return Tbv(spec.width, 0, 0)
        if spec.kind == "range":
            return Range(spec.bound, 0, spec.bound)
        if spec.kind == "ranges":
            return DisjointRanges.from_intervals(spec.bound, [(0, spec.bound)])
        if spec.kind == "set":
            return ValueSet.full(self.universe_for(spec.name))
        return OptionalValue(self.universe_for(spec.name), None)

    def top(self):
        """The all-wildcard element: every field covers its full domain."""
        if not self.frozen:
            raise SchemaError("schema not frozen yet")
        if len(self.fields) == 1:
            return self.field_top(0)
        return TupleElement(tuple(self.field_top(i) for i in range(len(self.fields))))

    def parse_field_value(self, i: int, text: str):
        spec = self.fields[i]
        text = str(text)
        if spec.kind == "prefix":
            return IpPrefix.from_text(text, spec.width)
        if spec.kind == "tbv":
            return Tbv.from_text(text, spec.width)
        if spec.kind == "range":
            return Range.from_text(text, spec.bound)
        if spec.kind == "ranges":
            return DisjointRanges.from_text(text, spec.bound)
        if spec.kind == "set":
            return ValueSet.from_text(text, self.universe_for(spec.name))
        return OptionalValue.from_text(text, self.universe_for(spec.name))

    def match_from_mapping(self, mapping):
        """Build an element from ``{field name: value text}``; omitted fields
        cover their full domain."""
        for name in mapping:
            self.field_index(name)  # reject unknown fields
        coords = []
        for i, spec in enumerate(self.fields):
            if spec.name in mapping:
                coords.append(self.parse_field_value(i, mapping[spec.name]))
            else:
                coords.append(self.field_top(i))
        if len(coords) == 1:
            return coords[0]
        return TupleElement(tuple(coords))

    def _validate_field(self, i: int, elem) -> None:
        spec = self.fields[i]
        expected = {"prefix": IpPrefix, "tbv": Tbv, "range": Range,
                    "ranges": DisjointRanges, "set": ValueSet,
                    "optional": OptionalValue}[spec.kind]
        if type(elem) is not expected:
            raise SchemaError(
                f"field {spec.name!r} expects {expected.__name__}, "
                f"got {type(elem).__name__}")
        if spec.kind in ("prefix", "tbv") and elem.width != spec.width:
            raise SchemaError(f"field {spec.name!r}: width {elem.width} != {spec.width}")
        if spec.kind in ("range", "ranges") and elem.bound != spec.bound:
            raise SchemaError(f"field {spec.name!r}: bound {elem.bound} != {spec.bound}")
        if spec.kind in ("set", "optional") and \
                elem.universe != self.universe_for(spec.name):
            raise SchemaError(f"field {spec.name!r}: foreign value universe")

    def validate_element(self, elem) -> None:
        """Raise :class:`SchemaError` unless ``elem`` fits this schema."""
        if not self.frozen:
            raise SchemaError("schema not frozen yet")
        if len(self.fields) == 1:
            self._validate_field(0, elem)
            return
        if type(elem) is not TupleElement:
            raise SchemaError(f"expected a {len(self.fields)}-tuple element")
        if len(elem.coords) != len(self.fields):
            raise SchemaError(
                f"tuple arity {len(elem.coords)} != {len(self.fields)} fields")
        for i, coord in enumerate(elem.coords):
            self._validate_field(i, coord)

    @property
    def universe_size(self) -> int:
        """Total number of headers this schema describes."""
        return math.prod(f.domain_size for f in self.fields)

    def __repr__(self):
        inner = ", ".join(f"{f.name}:{f.kind}" for f in self.fields)
        return f"Schema({inner})"


def top(schema: Schema):
    """The maximum element of the schema's subset order."""
    return schema.top()
