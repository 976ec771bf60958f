"""Noncommutative birational rowmotion on finite posets, with exact arithmetic."""
from .algebra import UNDEFINED, Matrix, StructureError, Tropical, parse_ring
from .poset import Poset, parse_poset_spec
from .rowmotion import Labeling, Orbit, iterate, rowmotion, toggle

__all__ = [
    "UNDEFINED",
    "Matrix",
    "StructureError",
    "Tropical",
    "parse_ring",
    "Poset",
    "parse_poset_spec",
    "Labeling",
    "Orbit",
    "iterate",
    "rowmotion",
    "toggle",
]
