"""L-shaped cell routing and per-cell route-load statistics.

A route runs horizontally from the source's cell to the destination's
column, then vertically to the destination's cell.  Orientation is fixed
(horizontal first) so that load statistics are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, RouteError
from .topology import Grid


@dataclass(frozen=True)
class Route:
    """Ordered (cx, cy) cells traversed from source cell to destination cell."""

    src: int
    dst: int
    cells: tuple


@dataclass
class CellLoads:
    """Per-cell route counts N_i and their ratios to sqrt(n ln n)."""

    counts: np.ndarray  # shape (m*m,), flat cell index
    n: int
    max_ratio: float
    min_ratio: float


def build_route(src: int, dst: int, grid: Grid) -> Route:
    """Horizontal-then-vertical cell path between two distinct nodes."""
    if src == dst:
        raise RouteError("source and destination must differ")
    sx, sy = grid.cell_xy(int(grid.cell_of[src]))
    dx, dy = grid.cell_xy(int(grid.cell_of[dst]))
    cells = [(sx, sy)]
    step = 1 if dx >= sx else -1
    for cx in range(sx + step, dx + step, step) if dx != sx else []:
        cells.append((cx, sy))
    step = 1 if dy >= sy else -1
    for cy in range(sy + step, dy + step, step) if dy != sy else []:
        cells.append((dx, cy))
    return Route(src=src, dst=dst, cells=tuple(cells))


def assign_destinations(placement_n: int, rng: np.random.Generator) -> np.ndarray:
    """Random injective, fixed-point-free destination map (a derangement).

    Every node is the destination of exactly one source, and no node is
    its own destination.  Rejection sampling over random permutations
    succeeds in ~e tries.
    """
    n = placement_n
    if n < 2:
        raise ConfigError("destination assignment requires n >= 2")
    while True:
        perm = rng.permutation(n)
        if not np.any(perm == np.arange(n)):
            return perm


def redraw_destination(dest: np.ndarray, node: int,
                       rng: np.random.Generator) -> None:
    """Give `node` a fresh random destination, keeping `dest` a derangement.

    Swaps the targets of `node` and a random other source; retries when a
    swap would create a fixed point.  In place.
    """
    n = len(dest)
    for _ in range(64):
        other = int(rng.integers(n))
        if other == node:
            continue
        a, b = dest[node], dest[other]
        if b == node or a == other:
            continue
        dest[node], dest[other] = b, a
        return
    # pathological rng streak; the existing destination stays valid


def cell_loads(routes: list, grid: Grid, n: int | None = None) -> CellLoads:
    """Exact per-cell traversal counts over a set of routes."""
    if n is None:
        n = len(grid.cell_of)
    counts = np.zeros(grid.n_cells, dtype=np.int64)
    for route in routes:
        for cx, cy in route.cells:
            counts[grid.flat_index(cx, cy)] += 1
    scale = math.sqrt(n * math.log(n)) if n >= 2 else 1.0
    return CellLoads(
        counts=counts,
        n=n,
        max_ratio=float(counts.max()) / scale,
        min_ratio=float(counts.min()) / scale,
    )


def loads_to_csv(loads: CellLoads, grid: Grid) -> str:
    """CSV export: cell_x, cell_y, N_i."""
    lines = ["cell_x,cell_y,N_i"]
    for flat in range(grid.n_cells):
        cx, cy = grid.cell_xy(flat)
        lines.append(f"{cx},{cy},{int(loads.counts[flat])}")
    return "\n".join(lines) + "\n"
