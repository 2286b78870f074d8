"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from rdcap import Grid, NetworkConfig, NodePlacement


def synthetic_grid(m: int, cell_of=None) -> Grid:
    """A Grid with a chosen dimension and (optionally) node->cell map."""
    side = 1.0 / m
    if cell_of is None:
        cell_of = np.zeros(0, dtype=np.int64)
    cell_of = np.asarray(cell_of, dtype=np.int64)
    members: dict = {}
    for node, cell in enumerate(cell_of):
        members.setdefault(int(cell), []).append(node)
    return Grid(m=m, side=side, r=np.sqrt(5.0) * side, cell_of=cell_of,
                members=members)


def placement_at(points) -> NodePlacement:
    """A NodePlacement with hand-picked positions."""
    return NodePlacement(positions=np.asarray(points, dtype=float), seed=0)


@pytest.fixture
def config():
    return NetworkConfig()
