"""Success-probability bounds, the arrival-rate fixed point, and dormancy.

All rates are per slot; durations are in slots.  The central relation is
the fixed point lambda = n nu / (1 + Q'(lambda) tau nu), where Q' is the
discovery success probability seen under the data/discovery time split.
"""

from __future__ import annotations

from typing import Callable

from .errors import DivergenceError, DomainError
from .gmodel import GModel, g_eval

LAMBDA_REL_TOL = 1e-9
_BISECT_STEPS = 200


def q_upper_bound(model: GModel, nbar_r: float, lam: float, n: int) -> float:
    """Upper bound G(nbar_r / (lambda (n-1))) on the success probability.

    The argument is clamped to [0, 1]: under light load the per-slot
    first-reception count can exceed the per-discovery reach budget.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if n < 2:
        raise DomainError("n must be >= 2")
    return g_eval(model, min(1.0, nbar_r / (lam * (n - 1))))


def q_lower_bound(model: GModel, nbar_r: float, lam: float, n: int) -> float:
    """Lower bound G(gamma nbar_r / (lambda n)) / 2 (needs the median/mean
    reach constant gamma of the model)."""
    if lam <= 0:
        raise DomainError("lambda must be positive")
    if n < 2:
        raise DomainError("n must be >= 2")
    return 0.5 * g_eval(model, min(1.0, model.gamma * nbar_r / (lam * n)))


def scheme_a_qprime(q_fn: Callable[[float], float], lam: float,
                    theta: float) -> float:
    """Success probability when a theta-fraction of slots carries discovery
    traffic: Q'(lambda) = Q(lambda / theta)."""
    if not 0 < theta < 1:
        raise DomainError("theta must be in (0, 1)")
    return q_fn(lam / theta)


def expected_attempts(q: float) -> float:
    """Mean number of discovery attempts until success: 1/q."""
    if q <= 0:
        raise DivergenceError("zero success probability: route never found")
    if q > 1:
        raise DomainError("success probability above 1")
    return 1.0 / q


def solve_lambda(n: int, nu: float, tau: float,
                 q_prime_fn: Callable[[float], float]) -> float:
    """Fixed point of F(lam) = n nu / (1 + Q'(lam) tau nu) by bisection.

    For nonincreasing Q' with values in [0, 1], F maps the bracket
    [n nu / (1 + tau nu), n nu] into itself and lam - F(lam) changes sign
    across it.  Monotonicity of Q' is spot-checked on the bracket.
    """
    if n < 1 or nu <= 0 or tau < 0:
        raise DomainError("need n >= 1, nu > 0, tau >= 0")
    lo = n * nu / (1.0 + tau * nu)
    hi = n * nu

    probes = [lo + (hi - lo) * i / 8 for i in range(9)]
    qs = [q_prime_fn(x) for x in probes]
    for q in qs:
        if not -1e-12 <= q <= 1 + 1e-12:
            raise DomainError(f"Q' value {q} outside [0, 1]")
    for a, b in zip(qs, qs[1:]):
        if b > a + 1e-9:
            raise DomainError("Q' must be nonincreasing in lambda")

    def residual(lam: float) -> float:
        return lam - n * nu / (1.0 + q_prime_fn(lam) * tau * nu)

    r_lo, r_hi = residual(lo), residual(hi)
    if r_lo > 0 and r_hi > 0:
        return lo
    if r_lo < 0 and r_hi < 0:
        return hi
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if residual(mid) <= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < LAMBDA_REL_TOL * n * nu:
            break
    return 0.5 * (lo + hi)


def xi_from_rates(nu: float, q_prime: float) -> float:
    """Mean dormancy: 1/Q' attempts, 1/nu slots apart -> xi = 1/(nu Q')."""
    if nu <= 0:
        raise DomainError("nu must be positive")
    if q_prime <= 0:
        raise DivergenceError("zero success probability: infinite dormancy")
    return 1.0 / (nu * q_prime)


def xi_reference(model: GModel, n: int) -> float:
    """Reference dormancy curve 1/G(1/n) (constants absorbed by fits)."""
    if n < 2:
        raise DomainError("n must be >= 2")
    g = g_eval(model, 1.0 / n)
    if g <= 0:
        raise DivergenceError("G(1/n) = 0")
    return 1.0 / g
