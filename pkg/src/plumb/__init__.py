"""Exact cohomology invariants of generic surface singularities from plumbing graphs."""

from .cycles import Cycle, ZERO, basis, parse_cycle, reduced
from .errors import PlumbError
from .graph import PlumbingGraph, parse_graph

__all__ = ["Cycle", "ZERO", "basis", "parse_cycle", "reduced", "PlumbError", "PlumbingGraph", "parse_graph"]
__version__ = "0.1.0"
