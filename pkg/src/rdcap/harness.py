"""Experiment orchestration: sweeps over n, persistence, presets.

A sweep runs `replications` seeded simulation points at every n, takes
per-n medians, fits log-log exponents, classifies the scaling regime of
the scenario, and persists one CSV of point rows plus a JSON metadata
sidecar.  Per-point seeds are stable hashes of (base seed, n, replication
index), so growing a sweep never reshuffles existing points.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .analysis import RegimeVerdict, ScalingFit, classify_regime, fit_exponent
from .config import (NetworkConfig, RNG_ALGORITHM, TauModel,
                     network_config_from_items, network_config_to_items,
                     parse_config_text)
from .errors import ConfigError
from .gmodel import GModel, identity_g, k_target_g, step_repair_g
from .mac import schedule_stride
from .simulate import Metrics, run_simulation
from .topology import grid_dim

SCENARIOS = ("example1", "example2", "example3", "custom")

CSV_COLUMNS = ("n", "seed", "throughput_per_node", "xi_measured",
               "tau_measured", "active_fraction", "lambda_measured",
               "q_measured")

_DEFAULT_TAU_COEFF = {"example1": 32.0, "example2": 512.0, "example3": 8192.0}


def scenario_presets(name: str, tau_coeff: float | None = None,
                     k_coeff: float = 1.0):
    """(tau model, per-n G model factory) for the canonical scenarios.

    example1 -- churn: route lifetimes don't depend on n, and a joining
                pair is unknown to everyone (G(f) = f).
    example2 -- mobility: lifetimes shrink as 1/sqrt(n); the destination
                is already known to ~k_coeff sqrt(n) route holders.
    example3 -- mobility with perfect route repair (G steps to 1).
    """
    if name not in ("example1", "example2", "example3"):
        raise ConfigError(f"unknown scenario preset {name!r}")
    coeff = tau_coeff if tau_coeff is not None else _DEFAULT_TAU_COEFF[name]
    if name == "example1":
        return TauModel(kind="constant", coeff=coeff), lambda n: identity_g()
    if name == "example2":
        return (TauModel(kind="inv_sqrt", coeff=coeff),
                lambda n: k_target_g(k_coeff * math.sqrt(n)))
    return TauModel(kind="inv_sqrt", coeff=coeff), lambda n: step_repair_g()


def default_horizon(n: int, theta: float, delta: float) -> int:
    """Horizon long enough for warmup, a measurement cohort, and drain."""
    period = schedule_stride(delta) ** 2
    hops = 2.0 * grid_dim(n) / 3.0 + 1.0
    drain = 2.0 * hops * period / (1.0 - theta)
    return max(10000, int(math.ceil(3.0 * drain)))


@dataclass
class ExperimentSpec:
    base: NetworkConfig
    n_values: tuple
    replications: int = 8
    scenario: str = "example1"
    gmodel_spec: str = "identity"      # custom scenario only
    tau_coeff: Optional[float] = None
    horizon_slots: int = 0             # 0 -> per-n default
    output_dir: str = "runs"
    mode: str = "auto"
    offered_rate: Optional[float] = None
    workers: int = 0                   # 0 -> os.cpu_count()

    def __post_init__(self):
        ns = tuple(int(v) for v in self.n_values)
        if len(ns) < 2 or list(ns) != sorted(set(ns)):
            raise ConfigError("n_values must be >= 2 strictly increasing sizes")
        self.n_values = ns
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")

    def models(self):
        """(tau model, n -> GModel) for this spec's scenario."""
        if self.scenario == "custom":
            tau = self.base.tau_model
            gm = GModel.from_spec(self.gmodel_spec)
            return tau, (lambda n: gm)
        return scenario_presets(self.scenario, self.tau_coeff)

    def to_items(self) -> dict:
        items = network_config_to_items(self.base)
        items.update({
            "n_values": ",".join(str(v) for v in self.n_values),
            "replications": str(self.replications),
            "scenario": self.scenario,
            "gmodel": self.gmodel_spec,
            "horizon_slots": str(self.horizon_slots),
            "output_dir": self.output_dir,
            "mode": self.mode,
            "offered_rate": "none" if self.offered_rate is None
            else repr(self.offered_rate),
            "workers": str(self.workers),
        })
        if self.tau_coeff is not None:
            items["tau_coeff"] = repr(self.tau_coeff)
        return items

    def digest(self) -> str:
        payload = json.dumps(self.to_items(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


_SPEC_KEYS = ("n_values", "replications", "scenario", "gmodel", "tau_coeff",
              "horizon_slots", "output_dir", "mode", "offered_rate", "workers")


def experiment_spec_from_text(text: str) -> ExperimentSpec:
    """Parse a flat key=value experiment file; unknown keys are fatal."""
    items = parse_config_text(text)
    spec_items = {k: items.pop(k) for k in list(items) if k in _SPEC_KEYS}
    base = network_config_from_items(items)  # rejects leftovers
    kwargs = {"base": base}
    if "n_values" not in spec_items:
        raise ConfigError("experiment file needs n_values")
    kwargs["n_values"] = tuple(int(v) for v in spec_items["n_values"].split(","))
    if "replications" in spec_items:
        kwargs["replications"] = int(spec_items["replications"])
    if "scenario" in spec_items:
        kwargs["scenario"] = spec_items["scenario"]
    if "gmodel" in spec_items:
        kwargs["gmodel_spec"] = spec_items["gmodel"]
    if "tau_coeff" in spec_items:
        kwargs["tau_coeff"] = float(spec_items["tau_coeff"])
    if "horizon_slots" in spec_items and spec_items["horizon_slots"] != "auto":
        kwargs["horizon_slots"] = int(spec_items["horizon_slots"])
    if "output_dir" in spec_items:
        kwargs["output_dir"] = spec_items["output_dir"]
    if "mode" in spec_items:
        kwargs["mode"] = spec_items["mode"]
    if "offered_rate" in spec_items and spec_items["offered_rate"] != "none":
        kwargs["offered_rate"] = float(spec_items["offered_rate"])
    if "workers" in spec_items:
        kwargs["workers"] = int(spec_items["workers"])
    return ExperimentSpec(**kwargs)


@dataclass
class RunRecord:
    spec_hash: str
    rows: list                     # per-point Metrics
    fits: dict                     # quantity -> ScalingFit
    verdict: Optional[RegimeVerdict]
    failures: list                 # (n, rep, message)
    started_at: float
    finished_at: float
    generator: str = RNG_ALGORITHM
    medians: dict = field(default_factory=dict)


def point_seed(base_seed: int, n: int, replication: int) -> int:
    """Stable 64-bit per-point seed."""
    digest = hashlib.sha256(f"{base_seed}:{n}:{replication}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _run_point(args):
    spec, n, rep = args
    tau_model, g_factory = spec.models()
    config = spec.base.with_(n=n, seed=point_seed(spec.base.seed, n, rep),
                             tau_model=tau_model)
    horizon = spec.horizon_slots or default_horizon(n, config.theta,
                                                    config.delta)
    return run_simulation(config, horizon, gmodel=g_factory(n),
                          mode=spec.mode, offered_rate=spec.offered_rate)


def _extended_probes(n_values) -> list:
    """Probe grid for regime classification, padded to span two decades."""
    probes = list(n_values)
    while probes[-1] < 100 * probes[0] or len(probes) < 4:
        probes.append(probes[-1] * 4)
    return probes


def run_sweep(spec: ExperimentSpec,
              progress: Callable[[str], None] | None = None) -> RunRecord:
    """Execute every (n, replication) point and aggregate the sweep."""
    started = time.time()
    points = [(n, rep) for n in spec.n_values
              for rep in range(spec.replications)]
    rows: list = []
    failures: list = []

    def note(msg):
        if progress:
            progress(msg)

    if spec.workers == 1 or len(points) == 1:
        results = []
        for n, rep in points:
            try:
                results.append(_run_point((spec, n, rep)))
            except Exception as exc:  # crash isolation per point
                results.append(exc)
    else:
        workers = spec.workers or None
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_point, (spec, n, rep))
                       for n, rep in points]
            results = []
            for fut in futures:
                try:
                    results.append(fut.result())
                except Exception as exc:
                    results.append(exc)

    for (n, rep), result in zip(points, results):
        if isinstance(result, Exception):
            failures.append((n, rep, f"{type(result).__name__}: {result}"))
            note(f"point n={n} rep={rep} failed: {result}")
        else:
            rows.append(result)
            note(f"point n={n} rep={rep} done")

    if not rows:
        raise RuntimeError("all sweep points failed")

    medians: dict = {}
    for n in spec.n_values:
        sub = [m for m in rows if m.n == n]
        if not sub:
            continue
        medians[n] = {
            "throughput_per_node": float(np.median([m.throughput_per_node
                                                    for m in sub])),
            "xi_measured": float(np.median([m.xi_measured for m in sub])),
            "lambda_measured": float(np.median([m.lambda_measured
                                                for m in sub])),
            "min": {"throughput_per_node": min(m.throughput_per_node
                                               for m in sub)},
            "max": {"throughput_per_node": max(m.throughput_per_node
                                               for m in sub)},
        }

    fits: dict = {}
    for quantity in ("throughput_per_node", "xi_measured", "lambda_measured"):
        pts = [(n, medians[n][quantity]) for n in medians
               if math.isfinite(medians[n][quantity])
               and medians[n][quantity] > 0]
        if len(pts) >= 3:
            fits[quantity] = fit_exponent(pts)

    tau_model, g_factory = spec.models()
    verdict = classify_regime(tau_model, g_factory,
                              _extended_probes(spec.n_values))

    record = RunRecord(spec_hash=spec.digest(), rows=rows, fits=fits,
                       verdict=verdict, failures=failures,
                       started_at=started, finished_at=time.time(),
                       medians=medians)
    persist_run(spec, record)
    return record


def metrics_csv_row(m: Metrics) -> str:
    return ",".join([
        str(m.n), str(m.seed),
        repr(m.throughput_per_node), repr(m.xi_measured),
        repr(m.tau_measured), repr(m.active_fraction),
        repr(m.lambda_measured), repr(m.q_measured),
    ])


def persist_run(spec: ExperimentSpec, record: RunRecord) -> Path:
    """Append point rows to the sweep CSV and (re)write the JSON sidecar."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"sweep_{record.spec_hash}.csv"
    fresh = not csv_path.exists()
    with csv_path.open("a") as fh:
        if fresh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
        for m in record.rows:
            fh.write(metrics_csv_row(m) + "\n")

    def fit_dict(fit: ScalingFit) -> dict:
        return {"slope": fit.slope, "intercept": fit.intercept,
                "r_squared": fit.r_squared, "points": fit.points}

    meta = {
        "spec": spec.to_items(),
        "spec_hash": record.spec_hash,
        "generator": record.generator,
        "started_at": record.started_at,
        "finished_at": record.finished_at,
        "medians": {str(k): v for k, v in record.medians.items()},
        "fits": {k: fit_dict(v) for k, v in record.fits.items()},
        "verdict": record.verdict.to_dict() if record.verdict else None,
        "failures": record.failures,
    }
    (out / f"sweep_{record.spec_hash}.json").write_text(
        json.dumps(meta, indent=2))
    return csv_path
