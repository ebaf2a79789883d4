"""heisenflow - flow-line decompositions of horizontal vector charges on Heisenberg groups."""

__version__ = "0.1.0"
