"""Slotted RREQ flooding with capture-limited reception.

Every discovery flood is a forward-once epidemic: the origin broadcasts
its request in the first discovery slot, and any node that first receives
it in slot t rebroadcasts exactly once in slot t+1.  A node with several
queued requests sends them oldest-first, one per slot, and listens only
when its queue is empty.  Reception is arbitrated by the capture rule
(nearest in-range transmitter wins).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import NetworkConfig
from .errors import ConfigError, DomainError
from .topology import NodePlacement


@dataclass
class RdpOutcome:
    """Measured result of one discovery flood."""

    rdp_id: int
    origin: int
    f: float                        # distinct receivers / (n - 1)
    slots_used: int
    first_receptions_per_slot: list


@dataclass
class FloodStats:
    """Aggregate reach statistics over a batch of floods."""

    mean_f: float
    median_f: float
    nbar_r: float     # first-time receptions per discovery slot
    gamma_hat: float  # median_f / mean_f
    chat: float       # nbar_r / n


@dataclass
class _Flood:
    origin: int
    start_slot: int
    receivers: set = field(default_factory=set)
    per_slot: dict = field(default_factory=dict)
    pending_count: int = 1
    last_slot: int = 0


class FloodEngine:
    """Shared slotted state for any number of concurrent floods.

    The engine owns per-node broadcast queues and forward histories; the
    caller advances it one discovery slot at a time and collects the
    floods that closed (no copies left to broadcast).
    """

    def __init__(self, placement: NodePlacement, config: NetworkConfig):
        if placement.n < 2:
            raise ConfigError("flooding needs at least two nodes")
        self.positions = placement.positions
        self.n = placement.n
        self.radius = config.reception_radius
        self.pending = [deque() for _ in range(self.n)]
        self.seen = [set() for _ in range(self.n)]
        self.floods: dict = {}
        self.slot = 0
        self._next_id = 0

    def start(self, origin: int) -> int:
        """Queue a new flood at `origin`; it broadcasts in the next step."""
        rdp_id = self._next_id
        self._next_id += 1
        self.floods[rdp_id] = _Flood(origin=origin, start_slot=self.slot + 1)
        self.seen[origin].add(rdp_id)
        self.pending[origin].append(rdp_id)
        return rdp_id

    def has_pending(self, node: int) -> bool:
        return bool(self.pending[node])

    def step(self):
        """Advance one discovery slot.

        Returns (transmitter_count, first_receptions, closed) where
        `closed` lists (rdp_id, RdpOutcome) for floods that finished this
        slot.
        """
        self.slot += 1
        tx_nodes = [i for i in range(self.n) if self.pending[i]]
        tx_ids = [self.pending[i].popleft() for i in tx_nodes]
        for rdp_id in tx_ids:
            self.floods[rdp_id].pending_count -= 1

        first_receptions = 0
        if tx_nodes:
            tx_set = set(tx_nodes)
            listeners = [i for i in range(self.n) if i not in tx_set]
            if listeners:
                tree = cKDTree(self.positions[tx_nodes])
                dists, hits = tree.query(self.positions[listeners], k=1,
                                         distance_upper_bound=self.radius)
                for j, (d, h) in enumerate(zip(dists, hits)):
                    if not np.isfinite(d):
                        continue
                    node = listeners[j]
                    rdp_id = tx_ids[h]
                    if rdp_id in self.seen[node]:
                        continue
                    self.seen[node].add(rdp_id)
                    self.pending[node].append(rdp_id)
                    flood = self.floods[rdp_id]
                    flood.receivers.add(node)
                    flood.pending_count += 1
                    flood.per_slot[self.slot] = flood.per_slot.get(self.slot, 0) + 1
                    flood.last_slot = self.slot
                    first_receptions += 1

        closed = []
        for rdp_id in [i for i, fl in self.floods.items()
                       if fl.pending_count == 0 and fl.start_slot <= self.slot]:
            closed.append((rdp_id, self._close(rdp_id)))
        return len(tx_nodes), first_receptions, closed

    def force_close(self, rdp_id: int) -> RdpOutcome:
        """Close a flood at budget exhaustion, dropping queued copies."""
        for node in range(self.n):
            if rdp_id in self.seen[node] and rdp_id in self.pending[node]:
                self.pending[node].remove(rdp_id)
        self.floods[rdp_id].pending_count = 0
        return self._close(rdp_id)

    def _close(self, rdp_id: int) -> RdpOutcome:
        flood = self.floods.pop(rdp_id)
        end = max(flood.last_slot, flood.start_slot)
        per_slot = [flood.per_slot.get(s, 0)
                    for s in range(flood.start_slot, end + 1)]
        outcome = RdpOutcome(
            rdp_id=rdp_id,
            origin=flood.origin,
            f=len(flood.receivers) / (self.n - 1),
            slots_used=end - flood.start_slot + 1,
            first_receptions_per_slot=per_slot,
        )
        # forget the id so long simulations don't accumulate history
        self.seen[flood.origin].discard(rdp_id)
        for node in flood.receivers:
            self.seen[node].discard(rdp_id)
        return outcome


def run_flood(origin: int, placement: NodePlacement, config: NetworkConfig,
              slot_budget: int) -> RdpOutcome:
    """Run a single flood to completion (or budget) on an idle network."""
    if slot_budget < 1:
        raise DomainError("slot budget must be >= 1")
    engine = FloodEngine(placement, config)
    rdp_id = engine.start(origin)
    for _ in range(slot_budget):
        _, _, closed = engine.step()
        if closed:
            return closed[0][1]
    return engine.force_close(rdp_id)


def run_concurrent_floods(origins: list, placement: NodePlacement,
                          config: NetworkConfig, slot_budget: int):
    """Run several floods sharing the same discovery slots.

    All floods start in slot 1.  Returns (outcomes, FloodStats); outcomes
    are ordered as `origins`.
    """
    if not origins:
        raise ConfigError("need at least one origin")
    if slot_budget < 1:
        raise DomainError("slot budget must be >= 1")
    engine = FloodEngine(placement, config)
    ids = [engine.start(o) for o in origins]
    results: dict = {}
    slots = 0
    while len(results) < len(ids) and slots < slot_budget:
        _, _, closed = engine.step()
        slots += 1
        for rdp_id, outcome in closed:
            results[rdp_id] = outcome
    for rdp_id in ids:
        if rdp_id not in results:
            results[rdp_id] = engine.force_close(rdp_id)
    outcomes = [results[i] for i in ids]
    return outcomes, flood_stats(outcomes, placement.n)


def flood_stats(outcomes: list, n: int) -> FloodStats:
    """Reach statistics; nbar_r averages over the longest flood's slots."""
    if not outcomes:
        raise DomainError("no flood outcomes")
    fs = np.array([o.f for o in outcomes], dtype=float)
    mean_f = float(fs.mean())
    median_f = float(np.median(fs))
    total_first = sum(sum(o.first_receptions_per_slot) for o in outcomes)
    slots = max(o.slots_used for o in outcomes)
    nbar_r = total_first / slots
    gamma_hat = median_f / mean_f if mean_f > 0 else 0.0
    return FloodStats(mean_f=mean_f, median_f=median_f, nbar_r=nbar_r,
                      gamma_hat=gamma_hat, chat=nbar_r / n)
