"""Closed-form tail bounds for weighted sums.

Every bound is computed in log space first and exponentiated at the end, so
far-tail evaluations (exponents up to ~1e4) stay finite and comparable.
Bounds evaluated outside their theorem range (t at or below 1) return the
formula value with ``valid=False`` instead of raising, so curves can be
plotted through the trivial region.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    Distribution,
    InvalidInputError,
    LawKind,
    UnsupportedLawError,
    WeightStats,
    WeightVector,
    as_weights,
)
from .legendre import rate_function
from .special import h_closed, log_gamma_upper_tail

_SQRT2E = math.sqrt(2.0 * math.e)
MOMENT_CONSTANT_PAPER = _SQRT2E / (_SQRT2E + 1.0)
MOMENT_CONSTANT_PROOF = math.sqrt(2.0 / math.e) / (_SQRT2E + 1.0)


class BoundKind(str, enum.Enum):
    JANSON_UPPER = "janson_upper"
    JANSON_LOWER = "janson_lower"
    LAPLACE_UPPER = "laplace_upper"
    LAPLACE_LOWER = "laplace_lower"
    GENERIC_UPPER = "generic_upper"
    GENERIC_LOWER = "generic_lower"
    GAMMA_UPPER = "gamma_upper"
    GAMMA_LOWER = "gamma_lower"
    S_INEQ_UPPER = "s_ineq_upper"
    MOMENT_UPPER = "moment_upper"
    MOMENT_LOWER = "moment_lower"
    PZ_LOWER = "pz_lower"


@dataclass(frozen=True)
class BoundValue:
    """A bound evaluation: exp(log_value) with provenance and validity."""

    value: float
    log_value: float
    kind: BoundKind
    valid: bool


def _make(log_value: float, kind: BoundKind, valid: bool) -> BoundValue:
    value = math.exp(log_value) if log_value > -745.0 else 0.0
    return BoundValue(value=value, log_value=log_value, kind=kind, valid=valid)


def _check_t(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t <= 0.0:
        raise InvalidInputError(f"t must be a positive multiple of the scale, got {t!r}")
    return t


def janson_upper(t: float, stats: WeightStats) -> BoundValue:
    """Upper tail bound (1/t) exp(-alpha (t-1-log t)) for P(S >= t E S), exponential sums."""
    t = _check_t(t)
    alpha = stats.alpha_exp
    log_value = -math.log(t) - alpha * (t - 1.0 - math.log(t))
    return _make(log_value, BoundKind.JANSON_UPPER, valid=t > 1.0)


def janson_lower(t: float, stats: WeightStats) -> BoundValue:
    """Lower tail bound (1/(2 e alpha)) exp(-alpha (t-1)) for P(S >= t E S), exponential sums."""
    t = _check_t(t)
    alpha = stats.alpha_exp
    log_value = -math.log(2.0 * math.e * alpha) - alpha * (t - 1.0)
    return _make(log_value, BoundKind.JANSON_LOWER, valid=t > 1.0)


def laplace_upper(t: float, stats: WeightStats) -> BoundValue:
    """Upper bound exp(-(alpha^2/2) h(2t/alpha)) for P(S > t sqrt(Var S)), Laplace sums."""
    t = _check_t(t)
    alpha = stats.alpha_sym
    log_value = -0.5 * alpha * alpha * h_closed(2.0 * t / alpha)
    return _make(log_value, BoundKind.LAPLACE_UPPER, valid=True)


def laplace_lower(t: float, stats: WeightStats) -> BoundValue:
    """Lower bound (1/57) (alpha t)^(-1/2) exp(-alpha t) for P(S > t sqrt(Var S)), t >= 1."""
    t = _check_t(t)
    at = stats.alpha_sym * t
    log_value = -math.log(57.0) - 0.5 * math.log(at) - at
    return _make(log_value, BoundKind.LAPLACE_LOWER, valid=t >= 1.0)


def _require_nonnegative(d: Distribution, op: str) -> None:
    if not d.nonnegative:
        raise UnsupportedLawError(f"{op} applies to nonnegative summands, not {d.kind.value}")


def generic_upper(d: Distribution, w: "WeightVector | Sequence[float]", t: float) -> BoundValue:
    """Chernoff-type bound exp(-alpha I(mu t)) for P(S >= t E S), nonnegative laws.

    For t <= 1 the rate is 0 (the supremum over positive tilts collapses) and
    the bound degenerates to 1 with valid=False.
    """
    _require_nonnegative(d, "generic_upper")
    w = as_weights(w)
    t = _check_t(t)
    alpha = w.l1 / w.a_max
    rate = rate_function(d, d.mean * t).value if t > 1.0 else 0.0
    return _make(-alpha * rate, BoundKind.GENERIC_UPPER, valid=t > 1.0)


def _log_r_function(d: Distribution, v: float) -> float:
    if d.kind is LawKind.GAMMA and d.shape < 1.0:
        g = d.shape
        return -math.log(2.0) - math.lgamma(g) + min((g - 1.0) * math.log(v), 0.0) - v
    return -v


def r_function(d: Distribution, v: float) -> float:
    """Closed-form tail-shift ratio lower bound r(v) <= inf_u P(X > u+v)/P(X > u).

    Exponential and gamma(shape >= 1): exp(-v).  Gamma(shape < 1):
    (1/(2 Gamma(shape))) min(v^(shape-1), 1) exp(-v).
    """
    _require_nonnegative(d, "r_function")
    v = float(v)
    if not math.isfinite(v) or v <= 0.0:
        raise InvalidInputError(f"r_function needs v > 0, got {v!r}")
    return math.exp(_log_r_function(d, v))


def r_infimum_numeric(d: Distribution, v: float, u_cap: float | None = None) -> float:
    """Numeric inf_u P(X > u+v)/P(X > u) over u in (0, u_cap], in log space.

    Grid scan plus golden-section refinement around the best grid point.
    Always at least r_function(d, v) up to roundoff (that bound is valid for
    every u, so the infimum cannot drop below it).
    """
    _require_nonnegative(d, "r_infimum_numeric")
    v = float(v)
    if not math.isfinite(v) or v <= 0.0:
        raise InvalidInputError(f"r_infimum_numeric needs v > 0, got {v!r}")
    if d.kind is LawKind.EXPONENTIAL:
        return math.exp(-v)
    g = d.shape
    if u_cap is None:
        u_cap = max(100.0, 20.0 * (g + v))

    def log_ratio(u: float) -> float:
        return log_gamma_upper_tail(g, u + v) - log_gamma_upper_tail(g, u)

    n_grid = 200
    lo_u = 1e-6 * min(1.0, g)
    grid = [lo_u * (u_cap / lo_u) ** (i / (n_grid - 1)) for i in range(n_grid)]
    values = [log_ratio(u) for u in grid]
    best = min(range(n_grid), key=values.__getitem__)
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, n_grid - 1)]
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - golden * (hi - lo)
    e = lo + golden * (hi - lo)
    fc, fe = log_ratio(c), log_ratio(e)
    for _ in range(200):
        if hi - lo <= 1e-10 * (1.0 + hi):
            break
        if fc <= fe:
            hi, e, fe = e, c, fc
            c = hi - golden * (hi - lo)
            fc = log_ratio(c)
        else:
            lo, c, fc = c, e, fe
            e = lo + golden * (hi - lo)
            fe = log_ratio(e)
    return math.exp(min(values[best], fc, fe))


def generic_lower(
    d: Distribution,
    w: "WeightVector | Sequence[float]",
    t: float,
    p_ge_mean: float,
) -> BoundValue:
    """Lower bound P(S >= E S) * r((t-1) alpha mu) for P(S >= t E S), nonnegative laws.

    ``p_ge_mean`` is the caller's bound or exact value for P(S >= E S).  For
    t <= 1 the shift is clamped at 0 where r(0+) = 1 by continuity, and the
    result is flagged invalid.
    """
    _require_nonnegative(d, "generic_lower")
    w = as_weights(w)
    t = _check_t(t)
    p_ge_mean = float(p_ge_mean)
    if not 0.0 < p_ge_mean <= 1.0:
        raise InvalidInputError(f"p_ge_mean must be in (0, 1], got {p_ge_mean!r}")
    alpha = w.l1 / w.a_max
    v = (t - 1.0) * alpha * d.mean
    log_r = _log_r_function(d, v) if v > 0.0 else 0.0
    return _make(math.log(p_ge_mean) + log_r, BoundKind.GENERIC_LOWER, valid=t > 1.0)


def pz_bound(c: float) -> float:
    """Paley-Zygmund-type floor 1/(16^(1/3) max(c, 3)) on P(Z >= 0).

    ``c`` is the fourth-moment ratio E Z^4 / (E Z^2)^2 of the centered sum.
    """
    c = float(c)
    if not math.isfinite(c) or c < 1.0:
        raise InvalidInputError(f"fourth-moment ratio must be >= 1, got {c!r}")
    return 1.0 / (16.0 ** (1.0 / 3.0) * max(c, 3.0))


def s_inequality_upper(t: float, p_ge_mean: float) -> BoundValue:
    """Upper bound p^t = exp(-a t) with a = -log p for p = P(S >= E S), t >= 1.

    Flagged invalid when t < 1 or when p is outside the certified interval
    (1/24, 23/24).
    """
    t = _check_t(t)
    p_ge_mean = float(p_ge_mean)
    if not 0.0 < p_ge_mean < 1.0:
        raise InvalidInputError(f"p_ge_mean must be in (0, 1), got {p_ge_mean!r}")
    valid = t >= 1.0 and 1.0 / 24.0 < p_ge_mean < 23.0 / 24.0
    return _make(t * math.log(p_ge_mean), BoundKind.S_INEQ_UPPER, valid=valid)


def moment_bounds(
    p: float,
    w: "WeightVector | Sequence[float]",
    mode: str = "proof_derived",
) -> tuple[float, float]:
    """Two-sided bounds on the moment norm (E|S|^p)^(1/p) for Laplace sums.

    Returns (lower, upper) = (c * base, 4 sqrt(2) * base) with
    base = p*max(a) + sqrt(p)*l2(a).  mode="proof_derived" uses
    c = sqrt(2/e)/(sqrt(2e)+1) ~ 0.2574596, the constant the argument
    actually yields; mode="paper" uses c = sqrt(2e)/(sqrt(2e)+1) ~ 0.6998479,
    which already fails at p=2, n=1 and is kept only so that counterexample
    can be reproduced.
    """
    p = float(p)
    if not math.isfinite(p) or p < 2.0:
        raise InvalidInputError(f"moment_bounds needs p >= 2, got {p!r}")
    if mode == "proof_derived":
        c = MOMENT_CONSTANT_PROOF
    elif mode == "paper":
        c = MOMENT_CONSTANT_PAPER
    else:
        raise InvalidInputError(f"mode must be 'proof_derived' or 'paper', got {mode!r}")
    w = as_weights(w)
    base = p * w.a_max + math.sqrt(p) * w.l2
    return c * base, 4.0 * math.sqrt(2.0) * base
