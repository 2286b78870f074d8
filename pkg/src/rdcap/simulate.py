"""End-to-end slotted simulation of data traffic plus route discovery.

Slots are multiplexed deterministically: a fraction theta carries route
discovery (RDP slots), the rest carries data.  Every node alternates
between an active state (route known, mean duration tau(n)) and a dormant
state (searching, retrying at rate nu).  Data packets hop between cells
under the periodic cell schedule, one packet per cell activation, FIFO
per cell.

Discovery success can be resolved two ways:

  analytic -- each attempt succeeds with the self-consistent probability
              obtained from the arrival-rate fixed point (fast; used for
              large sweeps);
  flooded  -- every attempt runs a real RREQ flood sharing RDP slots with
              all other floods, and succeeds with probability G(f) of its
              measured reach f (slow; faithful).

Throughput is operational: the highest per-source offered rate whose
delivery ratio stays above the target, found by bisection over offered
rates.  The run starts from an (estimated) stationary state and the first
warmup fraction of the horizon is discarded.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import NetworkConfig, RNG_ALGORITHM
from .errors import ConfigError, DomainError
from .flood import FloodEngine
from .gmodel import GModel, g_eval, identity_g
from .mac import cell_schedule
from .rates import scheme_a_qprime, solve_lambda, xi_from_rates
from .routing import assign_destinations, build_route, cell_loads, redraw_destination
from .topology import build_grid, place_nodes

DEFAULT_TARGET_RATIO = 0.95
BISECT_ITERS = 6
QUEUE_CAP = 500
MIN_XI_SAMPLES = 30
FLOODED_AUTO_LIMIT = 512


@dataclass
class NodeState:
    """Inspection snapshot of one node's protocol state."""

    mode: str                 # "D" or "N"
    dest: int
    route: tuple              # flat cell indices, D only
    d_remaining: int          # remaining active slots, D only


@dataclass
class Metrics:
    """Measured outputs of one simulation point."""

    throughput_per_node: float   # bits per unit time
    xi_measured: float           # mean dormant duration, slots
    tau_measured: float          # mean active duration, slots
    active_fraction: float
    lambda_measured: float       # discovery initiations per slot
    q_measured: float            # per-attempt success frequency
    delivered_bits: float
    generated_bits: float = 0.0
    delivery_ratio: float = 1.0
    offered_rate: float = 0.0    # packets per data slot per active source
    nbar_r: float = 0.0          # flooded mode: first receptions per RDP slot
    mean_reach: float = 0.0      # flooded mode: mean flood reach fraction
    median_reach: float = 0.0
    success_mode: str = "analytic"
    horizon_slots: int = 0
    n: int = 0
    seed: int = 0
    rng_algorithm: str = RNG_ALGORITHM


def active_fraction(tau: float, xi: float) -> float:
    """Long-run fraction of time with a usable route: tau / (tau + xi)."""
    if tau < 0 or xi < 0 or tau + xi == 0:
        raise DomainError("need tau, xi >= 0 with tau + xi > 0")
    return tau / (tau + xi)


def success_mode(config: NetworkConfig, requested: str = "auto") -> str:
    """Pick how discovery success is resolved for this configuration.

    "auto" runs real floods only at small n, where their cost is
    negligible; explicit requests are honored as-is.
    """
    if requested in ("analytic", "flooded"):
        return requested
    if requested != "auto":
        raise ConfigError(f"unknown success mode {requested!r}")
    return "flooded" if config.n <= FLOODED_AUTO_LIMIT else "analytic"


def analytic_attempt_probability(config: NetworkConfig, gmodel: GModel) -> float:
    """Self-consistent per-attempt success probability.

    Under congestion the mean reach of a flood is the per-slot reach
    budget chat * n spread over the discovery arrivals, so
    Q(x) = G(min(1, chat n / (x (n-1)))); the time split maps this to
    Q'(lam) = Q(lam / theta), and lam solves the arrival fixed point.
    """
    n = config.n
    if n < 2:
        raise ConfigError("need n >= 2")

    def q_fn(x: float) -> float:
        return g_eval(gmodel, min(1.0, config.chat * n / (x * (n - 1))))

    def qp_fn(lam: float) -> float:
        return scheme_a_qprime(q_fn, lam, config.theta)

    lam = solve_lambda(n, config.nu, config.tau(), qp_fn)
    return qp_fn(lam)


class _IndexedSet:
    """Set of node indices with O(1) add/remove and uniform sampling."""

    def __init__(self, items=()):
        self.items = list(items)
        self.pos = {v: i for i, v in enumerate(self.items)}

    def __len__(self):
        return len(self.items)

    def __contains__(self, v):
        return v in self.pos

    def add(self, v):
        self.pos[v] = len(self.items)
        self.items.append(v)

    def remove(self, v):
        i = self.pos.pop(v)
        last = self.items.pop()
        if last != v:
            self.items[i] = last
            self.pos[last] = i

    def sample(self, rng: np.random.Generator, k: int) -> list:
        m = len(self.items)
        if k >= m:
            return list(self.items)
        if k > m // 2:
            idx = rng.permutation(m)[:k]
            return [self.items[i] for i in idx]
        chosen = set()
        out = []
        while len(out) < k:
            i = int(rng.integers(m))
            if i not in chosen:
                chosen.add(i)
                out.append(self.items[i])
        return out


class _World:
    """Mutable state of one simulation execution at a fixed offered rate."""

    def __init__(self, config: NetworkConfig, gmodel: GModel, mode: str,
                 horizon_slots: int):
        if horizon_slots < 1000:
            raise ConfigError("horizon must be at least 1000 slots")
        if config.n < 2:
            raise ConfigError("simulation needs n >= 2")
        self.config = config
        self.gmodel = gmodel
        self.mode = mode
        self.horizon = horizon_slots
        self.rng = np.random.default_rng(config.seed)

        self.placement = place_nodes(config)
        self.grid = build_grid(self.placement, config)
        self.schedule = cell_schedule(self.grid, config)
        self.period = self.schedule.period
        self.color_cells = [[] for _ in range(self.period)]
        for cell, color in self.schedule.colors.items():
            self.color_cells[color].append(cell)

        n = config.n
        self.dest = assign_destinations(n, self.rng)
        self.tau_bar = config.tau()
        self.p_geom = min(1.0, 1.0 / self.tau_bar)
        # initiation is only possible in RDP slots; nu/theta there gives
        # an overall initiation rate of nu per slot
        self.p_attempt = min(1.0, config.nu / config.theta)

        self.q_attempt = analytic_attempt_probability(config, gmodel)
        xi_pred = xi_from_rates(config.nu, self.q_attempt) \
            if self.q_attempt > 0 else math.inf
        self.af_pred = active_fraction(self.tau_bar, xi_pred) \
            if math.isfinite(xi_pred) else 0.0

        self.route_of = [None] * n         # flat cell tuple while active
        self._route_cache = {}             # (src cell, dst cell) -> tuple
        self.d_remaining = np.zeros(n, dtype=np.int64)  # drawn D duration
        self.d_end = np.zeros(n, dtype=np.int64)        # expiry slot
        self.expiry = {}                   # slot -> [nodes]
        self.idle = _IndexedSet()          # dormant, no flood in flight
        self.active = _IndexedSet()        # route holders
        self.n_since = [-1] * n            # slot the current dormancy began
        self.queues = [deque() for _ in range(self.grid.n_cells)]

        self.engine = FloodEngine(self.placement, config) \
            if mode == "flooded" else None
        self.flood_of = {}                 # rdp_id -> origin (flooded mode)

        self.slot = 0
        self.data_slots = 0
        self._stationary_init()

        # measurement window state
        self.warmup = int(0.2 * horizon_slots)
        self.in_window = False
        self.attempts = 0
        self.successes = 0
        self.closures = 0
        self.generated = 0
        self.delivered = 0
        self.cohort_generated = 0
        self.cohort_delivered = 0
        self.active_slot_acc = 0
        self.window_slots = 0
        self.rdp_slots = 0
        self.first_receptions = 0
        self.tau_samples = []
        self.xi_samples = []
        self.reach_samples = []

        hops = 2.0 * self.grid.m / 3.0 + 1.0
        self.drain = int(math.ceil(2.0 * hops * self.period
                                   / (1.0 - config.theta)))
        self.cohort_end = max(self.warmup + 1, horizon_slots - self.drain)

    # -- setup ---------------------------------------------------------

    def _stationary_init(self):
        """Start nodes from the predicted stationary D/N mix.

        Both state durations are (treated as) memoryless, so fresh
        residual draws at t=0 give a stationary start and the warmup only
        has to flush queue transients.
        """
        n = self.config.n
        draw = self.rng.random(n) < self.af_pred
        d_lens = self.rng.geometric(self.p_geom, size=n)
        for node in range(n):
            if draw[node]:
                self._enter_active(node, redraw_dest=False,
                                   d_len=int(d_lens[node]))
            else:
                self.idle.add(node)

    # -- state transitions ---------------------------------------------

    def _enter_active(self, node: int, redraw_dest: bool = True,
                      d_len: int | None = None):
        if redraw_dest:
            redraw_destination(self.dest, node, self.rng)
        # routes are built lazily at injection time (_route_flat); most
        # activations never carry a packet before the route breaks
        self.route_of[node] = None
        if d_len is None:
            d_len = int(self.rng.geometric(self.p_geom))
        self.d_remaining[node] = d_len
        self.d_end[node] = self.slot + d_len
        self.expiry.setdefault(self.slot + d_len, []).append(node)
        self.active.add(node)
        if node in self.idle.pos:
            self.idle.remove(node)

    def _route_flat(self, node: int) -> tuple:
        """Flat cell path of an active node, memoized by endpoint cells."""
        flat = self.route_of[node]
        if flat is None:
            key = (int(self.grid.cell_of[node]),
                   int(self.grid.cell_of[self.dest[node]]))
            flat = self._route_cache.get(key)
            if flat is None:
                route = build_route(node, int(self.dest[node]), self.grid)
                flat = tuple(self.grid.flat_index(cx, cy)
                             for cx, cy in route.cells)
                self._route_cache[key] = flat
            self.route_of[node] = flat
        return flat

    def _complete_attempt(self, node: int, won: bool):
        if won:
            if self.in_window:
                self.successes += 1
                since = self.n_since[node]
                if since >= 0:
                    self.xi_samples.append(self.slot - since)
            self.n_since[node] = -1
            self._enter_active(node)
        elif node not in self.idle.pos:
            self.idle.add(node)

    def _expire_routes(self):
        for node in self.expiry.pop(self.slot, []):
            self.active.remove(node)
            self.route_of[node] = None
            self.idle.add(node)
            self.n_since[node] = self.slot
            if self.in_window:
                self.tau_samples.append(int(self.d_remaining[node]))
            self.d_remaining[node] = 0

    # -- slot handlers -------------------------------------------------

    def _rdp_slot(self):
        if self.in_window:
            self.rdp_slots += 1
        k = int(self.rng.binomial(len(self.idle), self.p_attempt)) \
            if len(self.idle) else 0
        if self.in_window:
            self.attempts += k
        if self.mode == "analytic":
            # losing attempts leave the idle set untouched, so only the
            # winners (a uniform subset of idle) need identities
            if k:
                wins = int(self.rng.binomial(k, self.q_attempt)) \
                    if self.q_attempt > 0 else 0
                if self.in_window:
                    self.closures += k
                    self.successes += wins
                if wins:
                    winners = self.idle.sample(self.rng, wins)
                    d_lens = self.rng.geometric(self.p_geom,
                                                size=len(winners))
                    for node, d_len in zip(winners, d_lens):
                        if self.in_window:
                            since = self.n_since[node]
                            if since >= 0:
                                self.xi_samples.append(self.slot - since)
                        self.n_since[node] = -1
                        self._enter_active(node, d_len=int(d_len))
        else:
            starters = self.idle.sample(self.rng, k) if k else []
            for node in starters:
                rdp_id = self.engine.start(node)
                self.flood_of[rdp_id] = node
                self.idle.remove(node)
            _, first, closed = self.engine.step()
            if self.in_window:
                self.first_receptions += first
            for rdp_id, outcome in closed:
                node = self.flood_of.pop(rdp_id)
                won = self.rng.random() < g_eval(self.gmodel, outcome.f)
                if self.in_window:
                    self.closures += 1
                    self.reach_samples.append(outcome.f)
                self._complete_attempt(node, won)

    def _data_slot(self, offered: float):
        if offered > 0 and len(self.active):
            k = int(self.rng.binomial(len(self.active), offered))
            if k:
                in_cohort = self.in_window and self.slot <= self.cohort_end
                for node in self.active.sample(self.rng, k):
                    if self.in_window:
                        self.generated += 1
                    if in_cohort:
                        self.cohort_generated += 1
                    cells = self._route_flat(node)
                    q = self.queues[cells[0]]
                    if len(q) < QUEUE_CAP:
                        q.append([cells, 0, in_cohort])
        color = self.data_slots % self.period
        for cell in self.color_cells[color]:
            q = self.queues[cell]
            if not q:
                continue
            packet = q.popleft()
            cells, i, in_cohort = packet
            if i + 1 >= len(cells):
                if self.in_window:
                    self.delivered += 1
                if in_cohort:
                    self.cohort_delivered += 1
            else:
                nxt = self.queues[cells[i + 1]]
                if len(nxt) < QUEUE_CAP:
                    packet[1] = i + 1
                    nxt.append(packet)
        self.data_slots += 1

    # -- driver --------------------------------------------------------

    def run(self, offered: float) -> Metrics:
        config = self.config
        theta = config.theta
        for t in range(self.horizon):
            self.slot = t + 1
            if self.slot == self.warmup + 1:
                self.in_window = True
            self._expire_routes()
            if math.floor(self.slot * theta) > math.floor((self.slot - 1) * theta):
                self._rdp_slot()
            else:
                self._data_slot(offered)
            if self.in_window:
                self.active_slot_acc += len(self.active)
                self.window_slots += 1
        return self._metrics(offered)

    def _metrics(self, offered: float) -> Metrics:
        config = self.config
        window = max(1, self.window_slots)
        q_meas = self.successes / self.closures if self.closures else 0.0
        # rate-based dormancy estimate: completed-period sample means are
        # censoring-biased whenever xi is not far below the window length
        if q_meas > 0:
            xi_meas = xi_from_rates(config.nu, q_meas)
        elif len(self.xi_samples) >= MIN_XI_SAMPLES:
            xi_meas = float(np.mean(self.xi_samples))
        else:
            xi_meas = math.inf
        tau_meas = float(np.mean(self.tau_samples)) if self.tau_samples \
            else self.tau_bar
        ratio = self.cohort_delivered / self.cohort_generated \
            if self.cohort_generated else 1.0
        cohort_slots = max(1, self.cohort_end - self.warmup)
        throughput = self.cohort_delivered * config.w / (config.n * cohort_slots)
        reach = np.array(self.reach_samples) if self.reach_samples else None
        return Metrics(
            throughput_per_node=throughput,
            xi_measured=xi_meas,
            tau_measured=tau_meas,
            active_fraction=self.active_slot_acc / (config.n * window),
            lambda_measured=self.attempts / window,
            q_measured=q_meas,
            delivered_bits=self.delivered * config.s_rreq,
            generated_bits=self.generated * config.s_rreq,
            delivery_ratio=ratio,
            offered_rate=offered,
            nbar_r=self.first_receptions / self.rdp_slots
            if self.rdp_slots else 0.0,
            mean_reach=float(reach.mean()) if reach is not None else 0.0,
            median_reach=float(np.median(reach)) if reach is not None else 0.0,
            success_mode=self.mode,
            horizon_slots=self.horizon,
            n=config.n,
            seed=config.seed,
        )

    def node_state(self, node: int) -> NodeState:
        if node in self.active.pos:
            return NodeState(mode="D", dest=int(self.dest[node]),
                             route=self._route_flat(node),
                             d_remaining=max(0, int(self.d_end[node]) - self.slot))
        return NodeState(mode="N", dest=int(self.dest[node]), route=(),
                         d_remaining=0)


def _offered_cap_estimate(config: NetworkConfig, world: _World) -> float:
    """Generous starting point for the offered-rate bisection.

    Scales the full-pairing bottleneck cell load by the predicted active
    fraction; the bisection then narrows from several times the implied
    per-route service share.
    """
    grid = world.grid
    routes = [build_route(i, int(world.dest[i]), grid)
              for i in range(config.n)]
    peak = float(cell_loads(routes, grid, config.n).counts.max())
    l_eff = max(1.0, peak * max(world.af_pred, 1.0 / config.n))
    # a source can never inject faster than its own cell is served, so
    # the search is also capped at the per-cell MAC share 1/K
    return min(1.0 / world.schedule.period,
               8.0 / (world.schedule.period * l_eff))


def run_simulation(config: NetworkConfig, horizon_slots: int,
                   gmodel: GModel | None = None, mode: str = "auto",
                   offered_rate: float | None = None,
                   target_ratio: float = DEFAULT_TARGET_RATIO) -> Metrics:
    """Simulate one network point and report its Metrics.

    With `offered_rate=None` the sustained throughput is found by
    bisection: six halvings over offered rates, keeping the highest rate
    whose cohort delivery ratio meets `target_ratio`.  A fixed
    `offered_rate` (possibly 0 to measure only the discovery machinery)
    skips the search.
    """
    gmodel = gmodel if gmodel is not None else identity_g()
    mode = success_mode(config, mode)

    def execute(rate: float) -> Metrics:
        world = _World(config, gmodel, mode, horizon_slots)
        return world.run(rate)

    if offered_rate is not None:
        return execute(offered_rate)

    probe_world = _World(config, gmodel, mode, horizon_slots)
    hi = _offered_cap_estimate(config, probe_world)
    best = None
    lo = 0.0
    m_hi = execute(hi)
    if m_hi.delivery_ratio >= target_ratio:
        return m_hi
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        m = execute(mid)
        if m.delivery_ratio >= target_ratio:
            lo = mid
            best = m
        else:
            hi = mid
    if best is None:
        best = execute(0.0)
    return best
