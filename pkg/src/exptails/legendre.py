"""Log moment generating functions and the Cramer rate function.

Per-unit summand: psi(theta) = log E exp(theta X).  Weighted-sum versions
(psi_S(theta) = sum_i psi(a_i theta)) feed the Chernoff tilt used by the
characteristic-function oracle and the importance sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    Distribution,
    InvalidInputError,
    LawKind,
    NumericFailureError,
    WeightVector,
    as_weights,
)

_THETA_TOL = 1e-12
_MAX_NEWTON_ITER = 200


@dataclass(frozen=True)
class LegendreResult:
    """Value and maximizer of sup_{theta>0} (t*theta - psi(theta))."""

    value: float
    theta_star: float
    converged: bool
    iterations: int


def log_mgf(d: Distribution, theta: float) -> float:
    """psi(theta) for one unit summand; +inf outside the MGF domain."""
    theta = float(theta)
    if math.isnan(theta):
        raise InvalidInputError("theta must be a number")
    if d.kind is LawKind.LAPLACE:
        if abs(theta) >= 1.0:
            return math.inf
        return -math.log1p(-theta * theta)
    if theta >= 1.0:
        return math.inf
    return -d.shape * math.log1p(-theta)


def log_mgf_prime(d: Distribution, theta: float) -> float:
    """psi'(theta) inside the MGF domain; +inf at and beyond the boundary."""
    theta = float(theta)
    if d.kind is LawKind.LAPLACE:
        if abs(theta) >= 1.0:
            return math.inf
        return 2.0 * theta / (1.0 - theta * theta)
    if theta >= 1.0:
        return math.inf
    return d.shape / (1.0 - theta)


def _log_mgf_double_prime(d: Distribution, theta: float) -> float:
    if d.kind is LawKind.LAPLACE:
        t2 = theta * theta
        return 2.0 * (1.0 + t2) / (1.0 - t2) ** 2
    return d.shape / (1.0 - theta) ** 2


def sum_log_mgf(d: Distribution, w: "WeightVector | Sequence[float]", theta: float) -> float:
    """psi_S(theta) = sum_i psi(a_i * theta) for S = sum_i a_i X_i."""
    w = as_weights(w)
    return math.fsum(log_mgf(d, a * theta) for a in w)


def sum_log_mgf_prime(d: Distribution, w: "WeightVector | Sequence[float]", theta: float) -> float:
    """d/dtheta psi_S(theta) = sum_i a_i psi'(a_i theta)."""
    w = as_weights(w)
    return math.fsum(a * log_mgf_prime(d, a * theta) for a in w)


def sum_log_mgf_double_prime(d: Distribution, w: "WeightVector | Sequence[float]", theta: float) -> float:
    w = as_weights(w)
    return math.fsum(a * a * _log_mgf_double_prime(d, a * theta) for a in w)


def _solve_psi_prime(d: Distribution, w: WeightVector, target: float) -> tuple[float, int]:
    """Solve sum_i a_i psi'(a_i theta) = target for theta in (0, 1/a_max).

    Safeguarded Newton: every step stays inside a shrinking bisection
    bracket.  The left derivative limit is the mean of S and the right limit
    is +inf, so a root exists whenever target > mean.
    """
    hi = (1.0 - 1e-12) / w.a_max
    lo = 0.0
    theta = min(0.5 / w.a_max, hi)
    for it in range(1, _MAX_NEWTON_ITER + 1):
        g = sum_log_mgf_prime(d, w, theta) - target
        if g > 0.0:
            hi = theta
        else:
            lo = theta
        step = g / sum_log_mgf_double_prime(d, w, theta)
        nxt = theta - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - theta) <= _THETA_TOL:
            return nxt, it
        theta = nxt
    raise NumericFailureError(
        f"tilt solve did not reach {_THETA_TOL} after {_MAX_NEWTON_ITER} iterations",
        achieved=theta,
    )


def chernoff_tilt(d: Distribution, w: "WeightVector | Sequence[float]", target: float) -> float:
    """Stationary tilt theta* with psi_S'(theta*) = target, target above E S."""
    w = as_weights(w)
    target = float(target)
    mean_s = d.mean * w.l1
    if not target > mean_s:
        raise InvalidInputError(f"tilt target {target} must exceed the sum mean {mean_s}")
    theta, _ = _solve_psi_prime(d, w, target)
    return theta


def rate_function(d: Distribution, t: float) -> LegendreResult:
    """Cramer rate I(t) = sup_{theta>0} (t*theta - psi(theta)) for one summand.

    Closed forms for exponential and gamma; numeric supremum for Laplace.
    ``t`` is in absolute units (t > mean of the summand).
    """
    t = float(t)
    mean = d.mean
    if not t > mean:
        raise InvalidInputError(f"rate_function needs t > {mean} (the summand mean), got {t}")
    if d.kind is LawKind.EXPONENTIAL:
        return LegendreResult(t - 1.0 - math.log(t), 1.0 - 1.0 / t, True, 0)
    if d.kind is LawKind.GAMMA:
        g = d.shape
        return LegendreResult(t - g - g * math.log(t / g), 1.0 - g / t, True, 0)
    theta, iters = _solve_psi_prime(d, WeightVector((1.0,)), t)
    value = t * theta - log_mgf(d, theta)
    return LegendreResult(value, theta, True, iters)
