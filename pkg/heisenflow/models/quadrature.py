"""Weighted node sets discretizing the seed measure."""

from dataclasses import dataclass

import numpy as np

from heisenflow.utils.exceptions import DimensionMismatchError
from heisenflow.utils.validators import as_float_array, group_index


@dataclass(frozen=True, eq=False)
class SeedQuadrature:
    """Nodes with positive masses; ``nodes`` has shape ``(N, 2n+1)``."""

    nodes: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        nodes = np.array(np.atleast_2d(as_float_array(self.nodes, "seed nodes")), copy=True)
        masses = np.array(as_float_array(self.masses, "seed masses").reshape(-1), copy=True)
        group_index(nodes.shape[1])
        if nodes.shape[0] != masses.shape[0]:
            raise DimensionMismatchError(f"{nodes.shape[0]} nodes but {masses.shape[0]} masses")
        if np.any(masses <= 0):
            raise DimensionMismatchError("seed masses must be positive")
        nodes.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "masses", masses)

    def __len__(self) -> int:
        return self.masses.shape[0]

    @property
    def n(self) -> int:
        return (self.nodes.shape[1] - 1) // 2

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature sum of node values (shape ``(N,)``)."""
        return float(np.dot(self.masses, values))
