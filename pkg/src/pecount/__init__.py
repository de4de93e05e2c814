"""Exact packet-equivalence-class computation via a counting meet-semilattice."""

from .elements import (DisjointRanges, ElementError, FieldSpec, IpPrefix,
                       OptionalValue, Range, Schema, SchemaError, Tbv,
                       TupleElement, UnsupportedComplement, ValueSet,
                       ValueUniverse, canonical_key, cardinality, complement,
                       intersect, is_subset, top)
from .lattice import Lattice, LatticeError, Node, PecReport, QueriedWhileDirty

__version__ = "0.1.0"

__all__ = [
    "DisjointRanges", "ElementError", "FieldSpec", "IpPrefix", "OptionalValue",
    "Range", "Schema", "SchemaError", "Tbv", "TupleElement",
    "UnsupportedComplement", "ValueSet", "ValueUniverse", "canonical_key",
    "cardinality", "complement", "intersect", "is_subset", "top",
    "Lattice", "LatticeError", "Node", "PecReport", "QueriedWhileDirty",
    "__version__",
]
