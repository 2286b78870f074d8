"""Exogenous network parameters and their flat key=value serialization.

Time is slotted: one slot is the transmission time of a single RREQ-sized
packet, ``slot_time = s_rreq / w``.  All rates and durations elsewhere in
the package are expressed in slots unless noted otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError

RNG_ALGORITHM = "numpy-PCG64"  # recorded in output metadata for reproducibility


@dataclass(frozen=True)
class TauModel:
    """Exogenous route-lifetime model tau(n), in slots.

    kinds:
      constant  -- tau(n) = coeff
      inv_sqrt  -- tau(n) = coeff / sqrt(n)
      table     -- piecewise-linear interpolation of {n: tau} samples
    """

    kind: str = "constant"
    coeff: float = 32.0
    table: tuple = ()  # ((n, tau), ...) sorted by n, for kind="table"

    def __post_init__(self):
        if self.kind not in ("constant", "inv_sqrt", "table"):
            raise ConfigError(f"unknown tau model kind: {self.kind!r}")
        if self.kind == "table":
            if len(self.table) < 1:
                raise ConfigError("table tau model needs at least one sample")
            ns = [p[0] for p in self.table]
            if ns != sorted(ns):
                raise ConfigError("tau table must be sorted by n")
        elif self.coeff <= 0:
            raise ConfigError("tau coefficient must be positive")

    def tau(self, n: int) -> float:
        if self.kind == "constant":
            return self.coeff
        if self.kind == "inv_sqrt":
            return self.coeff / math.sqrt(n)
        ns = [p[0] for p in self.table]
        ts = [p[1] for p in self.table]
        if n <= ns[0]:
            return ts[0]
        if n >= ns[-1]:
            return ts[-1]
        for i in range(1, len(ns)):
            if n <= ns[i]:
                w = (n - ns[i - 1]) / (ns[i] - ns[i - 1])
                return ts[i - 1] + w * (ts[i] - ts[i - 1])
        return ts[-1]

    def spec_string(self) -> str:
        if self.kind == "table":
            pts = ";".join(f"{n}:{t}" for n, t in self.table)
            return f"table:{pts}"
        return f"{self.kind}:{self.coeff}"

    @classmethod
    def from_spec(cls, text: str) -> "TauModel":
        kind, _, rest = text.partition(":")
        if kind == "table":
            pts = []
            for item in rest.split(";"):
                sn, _, st = item.partition(":")
                pts.append((int(sn), float(st)))
            return cls(kind="table", table=tuple(pts))
        if rest == "":
            raise ConfigError(f"tau model {text!r} missing coefficient")
        return cls(kind=kind, coeff=float(rest))


@dataclass(frozen=True)
class NetworkConfig:
    """All exogenous parameters of one simulated network.

    n           -- node count
    w           -- link rate, bits per unit time
    s_rreq      -- RREQ (and data) packet size, bits
    delta       -- protocol-model guard factor
    nu          -- per-node route-discovery initiation rate, attempts/slot
    theta       -- fraction of slots devoted to route discovery (Scheme A)
    area_coeff  -- c in reception area a(n) = min(1, c/n)
    chat        -- calibrated first-receptions-per-slot constant (n_r/n),
                   used by the analytic success mode
    tau_model   -- exogenous route-lifetime model
    seed        -- 64-bit RNG seed
    """

    n: int = 1024
    w: float = 1.0
    s_rreq: float = 1.0
    delta: float = 1.0
    nu: float = 0.25
    theta: float = 0.5
    area_coeff: float = 16.0
    chat: float = 0.25
    tau_model: TauModel = field(default_factory=TauModel)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.w <= 0 or self.s_rreq <= 0:
            raise ConfigError("w and s_rreq must be positive")
        if self.delta < 0:
            raise ConfigError("delta must be >= 0")
        if not 0 < self.nu <= 1:
            raise ConfigError("nu must be in (0, 1]")
        if not 0 < self.theta < 1:
            raise ConfigError("theta must be in (0, 1)")
        if self.area_coeff <= 0:
            raise ConfigError("area_coeff must be positive")
        if not 0 < self.chat <= 1:
            raise ConfigError("chat must be in (0, 1]")

    @property
    def slot_time(self) -> float:
        """Slot length in physical time units (transmission of one RREQ)."""
        return self.s_rreq / self.w

    @property
    def reception_area(self) -> float:
        """Broadcast reception area a(n) = min(1, c/n)."""
        return min(1.0, self.area_coeff / self.n)

    @property
    def reception_radius(self) -> float:
        """Radius of the disk of area a(n)."""
        return math.sqrt(self.reception_area / math.pi)

    def tau(self) -> float:
        return self.tau_model.tau(self.n)

    def with_(self, **kw) -> "NetworkConfig":
        return replace(self, **kw)


_CONFIG_FIELDS = {
    "n": int,
    "w": float,
    "s_rreq": float,
    "delta": float,
    "nu": float,
    "theta": float,
    "area_coeff": float,
    "chat": float,
    "tau_model": TauModel.from_spec,
    "seed": int,
}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key=value`` lines; '#' starts a comment.

    Returns a raw key->string dict; unknown keys are the caller's problem
    (the harness rejects them).
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def network_config_from_items(items: dict) -> NetworkConfig:
    """Build a NetworkConfig from string items; unknown keys raise."""
    kwargs = {}
    for key, value in items.items():
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        kwargs[key] = _CONFIG_FIELDS[key](value)
    return NetworkConfig(**kwargs)


def network_config_to_items(config: NetworkConfig) -> dict:
    """Flat key=value view of a NetworkConfig (all values as strings)."""
    return {
        "n": str(config.n),
        "w": repr(config.w),
        "s_rreq": repr(config.s_rreq),
        "delta": repr(config.delta),
        "nu": repr(config.nu),
        "theta": repr(config.theta),
        "area_coeff": repr(config.area_coeff),
        "chat": repr(config.chat),
        "tau_model": config.tau_model.spec_string(),
        "seed": str(config.seed),
    }
