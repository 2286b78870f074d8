"""Node placement on the unit square and the cell tessellation.

The square is tiled exactly with m = floor(1/g(n)) cells per side, where
g(n) = sqrt(2 ln n / n), so the actual cell side 1/m is never below g(n).
Cells are addressed as (cx, cy) with cx = floor(x * m): "horizontal"
movement changes cx.  Nodes landing exactly on coordinate 1.0 are clamped
into the last cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import NetworkConfig
from .errors import ConfigError, DomainError

# Data hops relay between edge-adjacent cells; sqrt(5) * side is the
# largest distance between points of two such cells.
RANGE_FACTOR = math.sqrt(5.0)


@dataclass(frozen=True)
class NodePlacement:
    """i.i.d.-uniform node positions in the unit square."""

    positions: np.ndarray  # shape (n, 2)
    seed: int

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass
class Grid:
    """Cell tessellation plus derived interference structure.

    cell_of maps node index -> flat cell index (cy * m + cx); members is
    the inverse map, with node lists sorted by index.
    """

    m: int
    side: float
    r: float
    cell_of: np.ndarray
    members: dict = field(repr=False)

    @property
    def n_cells(self) -> int:
        return self.m * self.m

    def cell_xy(self, flat: int) -> tuple:
        return (flat % self.m, flat // self.m)

    def flat_index(self, cx: int, cy: int) -> int:
        return cy * self.m + cx


def place_nodes(config: NetworkConfig) -> NodePlacement:
    """Drop config.n i.i.d.-uniform nodes; deterministic under the seed."""
    if config.n < 1:
        raise ConfigError("need at least one node")
    rng = np.random.default_rng(config.seed)
    positions = rng.random((config.n, 2))
    return NodePlacement(positions=positions, seed=config.seed)


def cell_side(n: int) -> float:
    """Tessellation cell-side target g(n) = sqrt(2 ln n / n)."""
    if n < 2:
        raise DomainError("cell side requires n >= 2")
    return math.sqrt(2.0 * math.log(n) / n)


def grid_dim(n: int) -> int:
    """Cells per side: m = max(1, floor(1/g(n)))."""
    if n < 2:
        return 1
    return max(1, int(math.floor(1.0 / cell_side(n))))


def build_grid(placement: NodePlacement, config: NetworkConfig) -> Grid:
    """Assign every node to exactly one cell of the m-by-m tessellation."""
    n = placement.n
    m = grid_dim(n)
    side = 1.0 / m
    # floor(x * m), with coordinate 1.0 clamped into the last cell
    idx = np.floor(placement.positions * m).astype(np.int64)
    np.clip(idx, 0, m - 1, out=idx)
    cell_of = idx[:, 1] * m + idx[:, 0]
    members: dict = {}
    order = np.argsort(cell_of, kind="stable")
    for node in order:
        members.setdefault(int(cell_of[node]), []).append(int(node))
    return Grid(m=m, side=side, r=RANGE_FACTOR * side, cell_of=cell_of,
                members=members)


def interference_offsets(grid: Grid, config: NetworkConfig) -> list:
    """Relative cell offsets (dx, dy) != (0, 0) that interfere.

    Two cells interfere when the minimum distance between their closed
    squares is below (2 + delta) * r.  Both that threshold and the cell
    side scale together, so the offset set depends only on delta.
    """
    threshold = (2.0 + config.delta) * grid.r
    limit = int(math.ceil(threshold / grid.side)) + 1
    offsets = []
    for dx in range(-limit, limit + 1):
        for dy in range(-limit, limit + 1):
            if dx == 0 and dy == 0:
                continue
            gap_x = max(abs(dx) - 1, 0) * grid.side
            gap_y = max(abs(dy) - 1, 0) * grid.side
            if math.hypot(gap_x, gap_y) < threshold:
                offsets.append((dx, dy))
    return offsets


def interfering_neighbors(grid: Grid, config: NetworkConfig) -> dict:
    """Symmetric cell adjacency: flat cell index -> sorted neighbor list."""
    offsets = interference_offsets(grid, config)
    m = grid.m
    adjacency = {}
    for cy in range(m):
        for cx in range(m):
            neigh = []
            for dx, dy in offsets:
                nx, ny = cx + dx, cy + dy
                if 0 <= nx < m and 0 <= ny < m:
                    neigh.append(ny * m + nx)
            adjacency[cy * m + cx] = sorted(neigh)
    return adjacency


def empty_cell_bound(n: int) -> float:
    """Upper bound 1/(2 n ln n) on P(some cell holds no node)."""
    if n < 2:
        raise DomainError("empty-cell bound requires n >= 2")
    return 1.0 / (2.0 * n * math.log(n))


def empty_cell_frequency(n: int, trials: int, seed: int = 0,
                         chunk: int = 2000) -> float:
    """Monte Carlo estimate of P(some cell holds no node).

    Samples full uniform placements (in chunks, for memory) and counts the
    trials in which at least one of the m*m cells is unoccupied.
    """
    m = grid_dim(n)
    n_cells = m * m
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        batch = min(chunk, trials - done)
        pos = rng.random((batch, n, 2))
        idx = np.minimum((pos * m).astype(np.int64), m - 1)
        flat = idx[..., 1] * m + idx[..., 0]
        flat += (np.arange(batch) * n_cells)[:, None]
        counts = np.bincount(flat.ravel(), minlength=batch * n_cells)
        counts = counts.reshape(batch, n_cells)
        hits += int(np.count_nonzero((counts == 0).any(axis=1)))
        done += batch
    return hits / trials
