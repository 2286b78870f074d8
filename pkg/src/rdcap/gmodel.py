"""Route-discovery success functions Q = G(f).

G maps the fraction of nodes reached by a discovery flood to the
probability that the flood found its destination.  Admissible models are
monotone on [0, 1] with G(0) = 0, G(1) = 1, G(f) >= f, and concave.

kinds:
  identity     -- G(f) = f (a brand-new destination nobody has heard of)
  k_target(k)  -- G(f) = 1 - (1 - f)**k (any of k independent nodes can
                  answer, e.g. k ~ sqrt(n) route-cache holders)
  step_repair  -- G(f) = 1 for f > 0 (perfect local route repair)
  table        -- monotone linear interpolation of empirical samples
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

_KINDS = ("identity", "k_target", "step_repair", "table")


@dataclass(frozen=True)
class GModel:
    kind: str = "identity"
    k: float = 1.0           # k_target only
    points: tuple = ()       # table only: ((f, G(f)), ...) sorted by f
    gamma: float = 0.5       # median/mean reach constant for bound computations

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown G model kind: {self.kind!r}")
        if self.kind == "k_target" and self.k <= 0:
            raise ConfigError("k_target needs k > 0")
        if self.kind == "table" and len(self.points) < 2:
            raise ConfigError("table G model needs at least two points")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must be in (0, 1]")

    def spec_string(self) -> str:
        if self.kind == "k_target":
            return f"k_target:{self.k}"
        if self.kind == "table":
            return "table:" + ";".join(f"{f}:{g}" for f, g in self.points)
        return self.kind

    @classmethod
    def from_spec(cls, text: str, gamma: float = 0.5) -> "GModel":
        kind, _, rest = text.partition(":")
        if kind == "k_target":
            return cls(kind="k_target", k=float(rest), gamma=gamma)
        if kind == "table":
            pts = []
            for item in rest.split(";"):
                sf, _, sg = item.partition(":")
                pts.append((float(sf), float(sg)))
            return cls(kind="table", points=tuple(sorted(pts)), gamma=gamma)
        return cls(kind=kind, gamma=gamma)


def identity_g(gamma: float = 0.5) -> GModel:
    return GModel(kind="identity", gamma=gamma)


def k_target_g(k: float, gamma: float = 0.5) -> GModel:
    return GModel(kind="k_target", k=k, gamma=gamma)


def step_repair_g(gamma: float = 0.5) -> GModel:
    return GModel(kind="step_repair", gamma=gamma)


def g_eval(model: GModel, f: float) -> float:
    """Evaluate G(f) for f in [0, 1]."""
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"reach fraction {f} outside [0, 1]")
    if model.kind == "identity":
        return f
    if model.kind == "k_target":
        return 1.0 - (1.0 - f) ** model.k
    if model.kind == "step_repair":
        return 1.0 if f > 0.0 else 0.0
    fs = np.array([p[0] for p in model.points])
    gs = np.array([p[1] for p in model.points])
    return float(np.interp(f, fs, gs))


def validate_gmodel(model: GModel, lattice_step: float = 1e-3) -> list:
    """Check the admissibility conditions on a lattice; returns violations.

    Never raises: each violated condition contributes one human-readable
    entry.  Concavity is checked by second differences (skipped for the
    step model, which is concave only in the limiting sense).
    """
    violations = []
    f = np.arange(0.0, 1.0 + lattice_step / 2, lattice_step)
    g = np.array([g_eval(model, min(1.0, x)) for x in f])
    if abs(g[0]) > 1e-12 and model.kind != "step_repair":
        violations.append(f"G(0) = {g[0]}, expected 0")
    if model.kind == "step_repair" and g_eval(model, 0.0) != 0.0:
        violations.append("G(0) != 0")
    if abs(g[-1] - 1.0) > 1e-12:
        violations.append(f"G(1) = {g[-1]}, expected 1")
    diffs = np.diff(g)
    if np.any(diffs < -1e-12):
        i = int(np.argmin(diffs))
        violations.append(f"not monotone near f = {f[i]:.3f}")
    below = g - f < -1e-9
    if np.any(below):
        i = int(np.argmax(below))
        violations.append(f"G(f) < f at f = {f[i]:.3f} "
                          f"(G = {g[i]:.6f})")
    if model.kind != "step_repair":
        second = np.diff(g, 2)
        if np.any(second > 1e-9):
            i = int(np.argmax(second))
            violations.append(f"not concave near f = {f[i]:.3f}")
    return violations
