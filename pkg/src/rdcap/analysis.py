"""Reference curves, regime classification, and log-log exponent fits.

The scaling claims under test are asymptotic; at desk scale they are
decided empirically, by the trend of tau(n) G(1/n) against the
interference curve 1/sqrt(n ln n) over a probe range of sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .config import TauModel
from .errors import DomainError
from .gmodel import GModel, g_eval

RDP_LIMITED = "rdp_limited"
INTERFERENCE_LIMITED = "interference_limited"
INDETERMINATE = "indeterminate"

# trend threshold for the empirical small-o test (reported with verdicts)
SLOPE_THRESHOLD = -0.1


@dataclass
class ScalingFit:
    """OLS fit of ln(value) against ln(n)."""

    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    points: list


@dataclass
class RegimeVerdict:
    regime: str
    lhs: list                 # tau(n) G(1/n) at the probes
    rhs: list                 # 1/sqrt(n ln n) at the probes
    n_probe: list
    ratio_slope: float
    ratio_slope_stderr: float
    threshold: float
    predicted_curve: Callable[[int], float]

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "n_probe": list(self.n_probe),
            "lhs": list(self.lhs),
            "rhs": list(self.rhs),
            "ratio_slope": self.ratio_slope,
            "ratio_slope_stderr": self.ratio_slope_stderr,
            "threshold": self.threshold,
        }


def dormancy_bound(w: float, tau: float, xi: float) -> float:
    """Throughput cap W tau / xi from time lost to route discovery."""
    if xi <= 0:
        raise DomainError("xi must be positive")
    return w * tau / xi


def interference_bound(w: float, n: int) -> float:
    """Throughput cap W / sqrt(n ln n) from simultaneous-transmission limits."""
    if n < 2:
        raise DomainError("n must be >= 2")
    return w / math.sqrt(n * math.log(n))


def fit_exponent(points) -> ScalingFit:
    """Least-squares power-law fit through (n, value) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DomainError("need at least 3 points to fit an exponent")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise DomainError("power-law fit needs positive coordinates")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    dof = len(pts) - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(ss_res / dof / sxx) if dof > 0 and sxx > 0 else 0.0
    return ScalingFit(slope=float(slope), intercept=float(intercept),
                      r_squared=r_squared, slope_stderr=stderr, points=pts)


def classify_regime(tau_model: TauModel,
                    gmodel: Union[GModel, Callable[[int], GModel]],
                    n_probe) -> RegimeVerdict:
    """Decide which throughput theorem applies over the probe range.

    Fits the log-log trend of [tau(n) G(1/n)] / [1/sqrt(n ln n)]; a slope
    below the threshold means discovery load shrinks faster than the
    interference limit (discovery-limited throughput).  `gmodel` may be a
    fixed model or a per-n factory for models whose shape scales with n.
    Verdict is "indeterminate" when the +-2 sigma slope band straddles
    the threshold.
    """
    probes = sorted(int(n) for n in n_probe)
    if len(probes) < 4 or probes[-1] < 100 * probes[0]:
        raise DomainError("need >= 4 probe sizes spanning >= 2 decades")
    model_at = gmodel if callable(gmodel) else (lambda n: gmodel)
    lhs = [tau_model.tau(n) * g_eval(model_at(n), 1.0 / n) for n in probes]
    rhs = [1.0 / math.sqrt(n * math.log(n)) for n in probes]
    fit = fit_exponent([(n, l / r) for n, l, r in zip(probes, lhs, rhs)])
    band = 2.0 * fit.slope_stderr
    if fit.slope + band < SLOPE_THRESHOLD:
        regime = RDP_LIMITED
    elif fit.slope - band >= SLOPE_THRESHOLD:
        regime = INTERFERENCE_LIMITED
    else:
        regime = INDETERMINATE

    if regime == RDP_LIMITED:
        def predicted(n: int, _t=tau_model, _m=model_at) -> float:
            return _t.tau(n) * g_eval(_m(n), 1.0 / n)
    else:
        def predicted(n: int) -> float:
            return 1.0 / math.sqrt(n * math.log(n))

    return RegimeVerdict(regime=regime, lhs=lhs, rhs=rhs, n_probe=probes,
                         ratio_slope=fit.slope,
                         ratio_slope_stderr=fit.slope_stderr,
                         threshold=SLOPE_THRESHOLD,
                         predicted_curve=predicted)


def check_theta(points, reference_curve) -> dict:
    """Ratio spread of measured points against an order-of-growth curve.

    `reference_curve` is either a callable n -> value or a list aligned
    with the points' n-grid.  Constant factors cancel: only the max/min
    spread of value/reference matters.
    """
    pts = list(points)
    if callable(reference_curve):
        refs = [reference_curve(n) for n, _ in pts]
    else:
        refs = list(reference_curve)
        if len(refs) != len(pts):
            raise DomainError("reference grid does not match points")
    ratios = []
    for (n, value), ref in zip(pts, refs):
        if ref <= 0:
            raise DomainError("reference curve must be positive")
        ratios.append(value / ref)
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else math.inf
    return {"ratios": ratios, "max_over_min": spread}
