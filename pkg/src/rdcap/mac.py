"""Interference rules for data slots and the capture rule for RREQ slots.

Data transmissions follow the protocol model: i -> j succeeds iff no other
transmitter sits within (1 + delta) * r of j.  Cells take turns under a
periodic schedule whose period depends only on delta, so same-color cells
are far enough apart that their transmissions never conflict.

RREQ broadcasts use capture: a listener keeps the packet of the nearest
in-range transmitter (equal-power monotone path loss makes "nearest" and
"highest SINR" the same choice); exact distance ties go to the lower node
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig
from .topology import Grid, NodePlacement, RANGE_FACTOR


@dataclass(frozen=True)
class Schedule:
    """Cell transmission schedule: flat cell index -> color, period = #colors."""

    colors: dict
    period: int


def color_schedule(interference: dict) -> Schedule:
    """Greedy proper coloring of an arbitrary symmetric cell adjacency.

    Colors cells in index order with the smallest color unused by already
    colored neighbors; uses at most (max degree + 1) colors.
    """
    colors: dict = {}
    for cell in sorted(interference):
        used = {colors[nb] for nb in interference[cell] if nb in colors}
        c = 0
        while c in used:
            c += 1
        colors[cell] = c
    period = max(colors.values()) + 1 if colors else 1
    return Schedule(colors=colors, period=period)


def schedule_stride(delta: float) -> int:
    """Lattice stride of the periodic cell schedule.

    Same-color cells are a multiple of `stride` cells apart in each axis;
    stride - 1 cell gaps must cover the (2 + delta) * r interference
    distance with r = sqrt(5) * side, so the stride (and the schedule
    period stride**2) depends only on delta.
    """
    return 1 + int(math.ceil((2.0 + delta) * RANGE_FACTOR))


def cell_schedule(grid: Grid, config: NetworkConfig) -> Schedule:
    """Periodic schedule color(cx, cy) = (cx mod s) + s * (cy mod s).

    The period s**2 is the same for every grid size, which realizes the
    constant-period guarantee of the tessellation construction.  (Greedy
    coloring would use fewer colors on small grids and more on large
    ones; the periodic pattern trades a constant factor for an n-free
    period.)
    """
    s = schedule_stride(config.delta)
    colors = {}
    for cy in range(grid.m):
        for cx in range(grid.m):
            colors[cy * grid.m + cx] = (cx % s) + s * (cy % s)
    return Schedule(colors=colors, period=s * s)


def data_slot_success(transmitters, placement: NodePlacement,
                      config: NetworkConfig, r: float) -> set:
    """Protocol-model outcome for a set of simultaneous (sender, receiver) pairs.

    A pair fails out of range when the receiver is farther than r from its
    sender; otherwise it succeeds iff every other sender is at distance
    >= (1 + delta) * r from the receiver.
    """
    pairs = list(transmitters)
    pos = placement.positions
    senders = np.array([p[0] for p in pairs], dtype=np.int64)
    good = set()
    guard = (1.0 + config.delta) * r
    for sender, receiver in pairs:
        d = math.dist(pos[sender], pos[receiver])
        if d > r:
            continue
        others = senders[senders != sender]
        if len(others):
            dd = np.hypot(pos[others, 0] - pos[receiver][0],
                          pos[others, 1] - pos[receiver][1])
            if float(dd.min()) < guard:
                continue
        good.add((sender, receiver))
    return good


def capture_winner(receiver_pos, candidates, positions, radius: float):
    """Nearest in-range transmitter index, ties to the lower index; None if none.

    `candidates` is an iterable of transmitter node indices.
    """
    best = None
    best_d = None
    for t in candidates:
        d = math.dist(receiver_pos, positions[t])
        if d > radius:
            continue
        if best is None or d < best_d or (d == best_d and t < best):
            best, best_d = t, d
    return best


def capture_receive(receiver: int, transmitters, placement: NodePlacement,
                    config: NetworkConfig):
    """Which transmitter's packet (if any) a listening node captures.

    Implements the three slot outcomes: nothing in range -> None; one in
    range -> that packet; several -> the nearest transmitter wins.
    """
    pos = placement.positions
    return capture_winner(pos[receiver], transmitters, pos,
                          config.reception_radius)
