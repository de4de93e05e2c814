"""Randomized self-checks and the synthetic benchmark.

The invariant scans here are deliberately slow and direct: they re-derive
what the lattice claims (shape, closure, conservation, the partition into
minimal classes) from element operations and header enumeration alone.
The selftest driver runs them on seeded random instances; any failure
reports the instance seed so it replays exactly.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .elements import IpPrefix, Schema, Tbv, FieldSpec, canonical_key, intersect, is_subset
from .lattice import Lattice

PORTABLE_RNG = "Mersenne Twister (random.Random)"  # stable across platforms


# -- invariant scans ---------------------------------------------------------------


def check_hasse_shape(lattice: Lattice) -> None:
    """Children strictly below parents, mutually incomparable, no transitive edges."""
    nodes = lattice.nodes
    for parent in nodes:
        children = list(parent.child_nodes())
        for child in children:
            assert is_subset(child.elem, parent.elem) and child is not parent, \
                f"child {child.id} not strictly below parent {parent.id}"
        for a in children:
            for b in children:
                if a is not b:
                    assert not is_subset(a.elem, b.elem), \
                        f"children {a.id} and {b.id} of {parent.id} are comparable"
        for child in children:
            for other in nodes:
                if other is parent or other is child:
                    continue
                assert not (is_subset(child.elem, other.elem)
                            and is_subset(other.elem, parent.elem)), \
                    f"edge {parent.id}->{child.id} is transitive via {other.id}"


def check_closure(lattice: Lattice) -> None:
    """Every non-empty pairwise intersection of node elements has a node."""
    nodes = lattice.nodes
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            meet = intersect(a.elem, b.elem)
            if meet is not None:
                assert lattice.find(meet) is not None, \
                    f"closure miss: {a.elem} ∩ {b.elem} = {meet} has no node"


def check_conservation(lattice: Lattice) -> None:
    """Class cardinalities sum exactly to the size of the universe."""
    total = sum(lattice.pec_cardinality(n) for n in lattice.nodes)
    expect = lattice.root.elem.cardinality()
    assert total == expect, f"conservation broken: {total} != {expect}"


def check_partition(lattice: Lattice, inserted, cap: int = oracle.DEFAULT_ENUM_CAP
                    ) -> None:
    """Non-empty classes must match brute-force containment signatures exactly.

    Verifies, by full header enumeration: the classes partition the
    universe, per-class counts equal the stored cardinalities, each
    inserted element is a disjunction of classes, and the number of
    non-empty classes is minimal (one per distinct signature).
    """
    inserted = list(inserted)
    schema = lattice.schema
    size = schema.universe_size
    assert size <= cap, f"universe {size} exceeds enumeration cap {cap}"
    vectors = oracle.pec_header_vectors(lattice, cap)
    owner = np.full(size, -1, dtype=np.int64)
    coverage = np.zeros(size, dtype=np.int64)
    for node in lattice.nodes:
        vec = vectors[node.id]
        count = int(vec.sum())
        assert count == lattice.pec_cardinality(node), \
            f"node {node.id} ({node.elem}): enumerated {count}, " \
            f"stored {lattice.pec_cardinality(node)}"
        coverage += vec
        owner[vec] = node.id
    assert np.all(coverage == 1), "classes do not partition the universe"

    signature = np.zeros(size, dtype=np.int64)
    member = {}
    for i, elem in enumerate(inserted):
        member[i] = oracle.membership_vector(schema, elem, cap)
        signature |= member[i].astype(np.int64) << i

    pairs = {(int(o), int(s)) for o, s in zip(owner.tolist(), signature.tolist())}
    owners = {o for o, _ in pairs}
    signatures = {s for _, s in pairs}
    assert len(pairs) == len(owners) == len(signatures), \
        "containment signatures and non-empty classes are not in bijection"
    live = sum(1 for n in lattice.nodes if not lattice.is_empty_pec(n))
    assert live == len(owners), \
        f"{live} non-empty classes vs {len(owners)} signature classes"

    for i, elem in enumerate(inserted):
        node = lattice.find(elem)
        union = np.zeros(size, dtype=bool)
        for sub in lattice.subtree(node):
            union |= vectors[sub.id]
        assert np.array_equal(union, member[i]), \
            f"element {elem} is not the union of its subtree classes"


def check_emptiness_oracle(lattice: Lattice, cap: int = oracle.DEFAULT_ENUM_CAP
                           ) -> None:
    enumerated = oracle.empty_pecs_by_enumeration(lattice, cap)
    counted = {n.id for n in lattice.nodes if lattice.is_empty_pec(n)}
    assert enumerated == counted, \
        f"emptiness mismatch: enumeration {sorted(enumerated)} vs " \
        f"counting {sorted(counted)}"


def pec_fingerprint(lattice: Lattice) -> dict[bytes, int]:
    """Multiset of (element key, class cardinality): insertion-order invariant."""
    return {canonical_key(n.elem): lattice.pec_cardinality(n)
            for n in lattice.nodes}


def check_order_invariance(schema: Schema, elements, rng: random.Random,
                           rounds: int = 2) -> None:
    reference = None
    elements = list(elements)
    for _ in range(rounds + 1):
        lattice = Lattice(schema)
        for elem in elements:
            lattice.insert(elem)
        fingerprint = pec_fingerprint(lattice)
        if reference is None:
            reference = fingerprint
        else:
            assert fingerprint == reference, "insertion order changed the classes"
        rng.shuffle(elements)


# -- random instances ---------------------------------------------------------------


def tbv_schema(width: int) -> Schema:
    return Schema([FieldSpec(name="bits", kind="tbv", width=width)]).freeze()


def prefix_schema(width: int) -> Schema:
    return Schema([FieldSpec(name="dst", kind="prefix", width=width)]).freeze()


def random_tbv(rng: random.Random, width: int, wildcard_tenths: int = 4) -> Tbv:
    care = value = 0
    for bit in range(width):
        if rng.randrange(10) < wildcard_tenths:
            continue
        care |= 1 << bit
        if rng.randrange(2):
            value |= 1 << bit
    return Tbv(width, care, value)


def random_tbv_instance(rng: random.Random, width: int, count: int) -> list[Tbv]:
    seen = set()
    out = []
    for _ in range(count):
        elem = random_tbv(rng, width)
        if elem.key() not in seen:
            seen.add(elem.key())
            out.append(elem)
    return out


def random_prefix_instance(rng: random.Random, width: int, count: int
                           ) -> list[IpPrefix]:
    seen = set()
    out = []
    for _ in range(count):
        plen = rng.randint(0, width)
        addr = rng.getrandbits(width) >> (width - plen) << (width - plen) \
            if plen else 0
        elem = IpPrefix(width, addr, plen)
        if elem.key() not in seen:
            seen.add(elem.key())
            out.append(elem)
    return out


def random_dnf(rng: random.Random, num_vars: int, max_clauses: int
               ) -> oracle.DnfFormula:
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        size = rng.randint(1, num_vars)
        variables = rng.sample(range(1, num_vars + 1), size)
        clauses.append(tuple(v if rng.randrange(2) else -v for v in variables))
    return oracle.DnfFormula(num_vars, tuple(clauses))


# -- selftest driver ----------------------------------------------------------------


@dataclass
class SelftestResult:
    seed: int
    iterations: int
    checks_run: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def run_selftest(seed: int, width: int, count: int, iterations: int,
                 enum_cap: int = oracle.DEFAULT_ENUM_CAP,
                 log=None) -> SelftestResult:
    """Run the randomized property suites; failures echo a replay seed."""
    if not 1 <= width <= 16:
        raise ValueError("width must be between 1 and 16 for oracle comparison")
    if count < 1 or iterations < 1:
        raise ValueError("count and iterations must be positive")
    master = random.Random(seed)
    result = SelftestResult(seed=seed, iterations=iterations)
    for iteration in range(iterations):
        sub_seed = master.getrandbits(32)
        rng = random.Random(sub_seed)
        label = f"iteration {iteration} (seed {seed}, sub-seed {sub_seed})"
        try:
            if rng.randrange(2):
                schema = tbv_schema(width)
                elements = random_tbv_instance(rng, width, rng.randint(1, count))
            else:
                schema = prefix_schema(width)
                elements = random_prefix_instance(rng, width, rng.randint(1, count))
            lattice = Lattice(schema)
            for elem in elements:
                lattice.insert(elem)
            check_conservation(lattice)
            check_hasse_shape(lattice)
            check_closure(lattice)
            check_partition(lattice, elements, enum_cap)
            check_emptiness_oracle(lattice, enum_cap)
            check_order_invariance(schema, elements, rng)
            formula = random_dnf(rng, rng.randint(1, min(width, 10)), 6)
            assert oracle.is_tautology(formula) == \
                oracle.truth_table_is_tautology(formula), "tautology mismatch"
            assert oracle.count_dnf_models(formula) == \
                oracle.truth_table_models(formula), "model count mismatch"
            result.checks_run += 8
            if log:
                log(f"ok {label}: {len(elements)} elements, "
                    f"{len(lattice)} nodes")
        except AssertionError as exc:
            result.failures.append(f"{label}: {exc}")
            if log:
                log(f"FAIL {label}: {exc}")
    return result


# -- synthetic benchmark --------------------------------------------------------------


@dataclass
class BenchResult:
    count: int
    width: int
    seed: int
    build_seconds: float
    emptiness_seconds: float
    nodes: int
    empty_pecs: int
    runs: int
    deterministic: bool

    def summary(self) -> str:
        return (f"count={self.count} width={self.width} seed={self.seed} "
                f"build={self.build_seconds:.3f}s "
                f"emptiness={self.emptiness_seconds:.3f}s nodes={self.nodes} "
                f"empty_pecs={self.empty_pecs} deterministic={self.deterministic}")


def bench_elements(rng: random.Random, count: int, width: int,
                   wildcard_bits: int = 8) -> list[Tbv]:
    """Sparse-wildcard ternary vectors: the standard synthetic workload."""
    out = []
    seen = set()
    while len(out) < count:
        positions = rng.sample(range(width), min(wildcard_bits, width))
        care = (1 << width) - 1
        for bit in positions:
            care &= ~(1 << bit)
        value = rng.getrandbits(width) & care
        elem = Tbv(width, care, value)
        if elem.key() not in seen:
            seen.add(elem.key())
            out.append(elem)
    return out


def run_bench(count: int, width: int, seed: int, runs: int = 2,
              wildcard_bits: int = 8, log=None) -> BenchResult:
    """Timed build + emptiness pass over seeded random ternary vectors.

    Wall-clock numbers are machine-local and not comparable to any
    published measurements; the node counts are the reproducible part.
    """
    node_counts = []
    build_s = empty_s = 0.0
    empty_count = 0
    for run in range(runs):
        elements = bench_elements(random.Random(seed), count, width, wildcard_bits)
        start = time.perf_counter()
        lattice = Lattice(tbv_schema(width), eager=False)
        for elem in elements:
            lattice.insert(elem)
        lattice.settle()
        build_s = time.perf_counter() - start
        start = time.perf_counter()
        lattice.recount_all()
        empty_count = sum(1 for n in lattice.nodes if lattice.is_empty_pec(n))
        empty_s = time.perf_counter() - start
        node_counts.append(len(lattice))
        if log:
            log(f"run {run}: nodes={len(lattice)} build={build_s:.3f}s")
    return BenchResult(
        count=count, width=width, seed=seed,
        build_seconds=build_s, emptiness_seconds=empty_s,
        nodes=node_counts[-1], empty_pecs=empty_count,
        runs=runs, deterministic=len(set(node_counts)) == 1,
    )


@dataclass
class SpeedupResult:
    counting_seconds: float
    enumeration_seconds: float
    empty_pecs: int
    agree: bool

    @property
    def speedup(self) -> float:
        if self.counting_seconds == 0:
            return float("inf")
        return self.enumeration_seconds / self.counting_seconds


def shadow_tiling_elements(width: int, groups: int, prefix_len: int = 4,
                           split: int = 2, seed: int = 1) -> list[Tbv]:
    """Prefix-style vectors where each parent is exactly tiled by children.

    Every parent's class is empty (union shadowing), which is the case
    that forces a brute-force emptiness check to exhaust the element.
    """
    assert groups <= 1 << prefix_len
    rng = random.Random(seed)
    elements = []
    for top in rng.sample(range(1 << prefix_len), groups):
        parent_care = ((1 << prefix_len) - 1) << (width - prefix_len)
        parent_value = top << (width - prefix_len)
        elements.append(Tbv(width, parent_care, parent_value))
        child_care = ((1 << (prefix_len + split)) - 1) << (width - prefix_len - split)
        for piece in range(1 << split):
            value = parent_value | piece << (width - prefix_len - split)
            elements.append(Tbv(width, child_care, value))
    rng.shuffle(elements)
    return elements


def emptiness_speedup(width: int = 16, groups: int = 12, seed: int = 1
                      ) -> SpeedupResult:
    """Counting-based emptiness vs per-header enumeration on one instance."""
    lattice = Lattice(tbv_schema(width))
    for elem in shadow_tiling_elements(width, groups, seed=seed):
        lattice.insert(elem)
    start = time.perf_counter()
    lattice.recount_all()
    counted = {n.id for n in lattice.nodes if lattice.is_empty_pec(n)}
    counting_s = time.perf_counter() - start
    start = time.perf_counter()
    enumerated = oracle.empty_pecs_by_enumeration(lattice)
    enumeration_s = time.perf_counter() - start
    return SpeedupResult(counting_s, enumeration_s, len(counted),
                         counted == enumerated)
