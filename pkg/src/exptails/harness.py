"""Verification campaigns: sandwich certification and invariant spot checks.

``sandwich_report`` certifies lower <= exact <= upper on random instances,
using the exact oracles and falling back to importance sampling only when
both oracle routes fail (such rows keep a CI-width tolerance and are never
dropped).  ``property_suite`` re-runs the library's mathematical invariants
on random instances and reports witnesses for any failure.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    generic_lower,
    generic_upper,
    janson_lower,
    janson_upper,
    laplace_lower,
    laplace_upper,
    pz_bound,
)
from .core import (
    Distribution,
    InvalidInputError,
    LawKind,
    NumericFailureError,
    WeightVector,
    format_float,
    json_dumps,
    weight_stats,
)
from .montecarlo import is_tail
from .oracle import exact_tail, hypoexp_tail, laplace_tail, p_ge_mean
from .special import gaussian_tail, gaussian_tail_lower, h_closed

_ORACLE_TOL = 1e-12
_FALLBACK_SAMPLES = 200_000

CSV_COLUMNS = ("instance", "dist", "n", "t", "lower", "exact", "upper", "pass", "source")


@dataclass(frozen=True)
class SandwichConfig:
    """Campaign parameters; every row is a pure function of these."""

    distribution: Distribution
    instances: int = 50
    t_grid: tuple[float, ...] = (1.1, 1.5, 2.0, 3.0, 5.0, 10.0)
    seed: int = 0
    n_range: tuple[int, int] = (1, 8)
    weight_range: tuple[float, float] = (0.1, 10.0)

    def __post_init__(self) -> None:
        if self.instances < 0:
            raise InvalidInputError(f"instance count must be >= 0, got {self.instances}")
        for t in self.t_grid:
            if not (math.isfinite(t) and t > 1.0):
                raise InvalidInputError(f"t grid must lie in (1, inf), got {t!r}")
        lo, hi = self.n_range
        if not (1 <= lo <= hi):
            raise InvalidInputError(f"bad n range {self.n_range!r}")
        wlo, whi = self.weight_range
        if not (0.0 < wlo <= whi and math.isfinite(whi)):
            raise InvalidInputError(f"bad weight range {self.weight_range!r}")


@dataclass(frozen=True)
class SandwichRow:
    instance: int
    dist: str
    weights: tuple[float, ...]
    n: int
    t: float
    lower: float
    exact: float
    upper: float
    slack_low: float
    slack_high: float
    passed: bool
    source: str

    def as_dict(self) -> dict:
        return {
            "instance": self.instance,
            "dist": self.dist,
            "weights": list(self.weights),
            "n": self.n,
            "t": self.t,
            "lower": self.lower,
            "exact": self.exact,
            "upper": self.upper,
            "slack_low": self.slack_low,
            "slack_high": self.slack_high,
            "pass": self.passed,
            "source": self.source,
        }


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str
    witness: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "detail": self.detail,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class PropertySuiteReport:
    seed: int
    results: tuple[PropertyResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def random_instances(
    seed: int,
    count: int,
    n_range: tuple[int, int] = (1, 8),
    weight_range: tuple[float, float] = (0.1, 10.0),
) -> list[WeightVector]:
    """Seeded random weight vectors: n uniform, weights log-uniform."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed)))
    log_lo, log_hi = math.log(weight_range[0]), math.log(weight_range[1])
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        values = np.exp(rng.uniform(log_lo, log_hi, n))
        out.append(WeightVector(tuple(float(v) for v in values)))
    return out


def _fallback_seed(seed: int, instance: int, t_index: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(instance, t_index))
    return int(ss.generate_state(1, np.uint64)[0])


def sandwich_report(config: SandwichConfig) -> list[SandwichRow]:
    """One row per (instance, t): lower bound, exact tail, upper bound.

    Thresholds are t * sigma for Laplace sums and t * E S otherwise.  A row
    passes when lower <= exact + tol and exact <= upper + tol; tol is 1e-12
    for oracle rows and the CI width for importance-sampling fallback rows.
    """
    d = config.distribution
    rows: list[SandwichRow] = []
    # universal floor on P(S >= E S), the only unknown in the generic lower bound
    floor = pz_bound(3.0 * (1.0 + 2.0 / d.shape)) if d.kind is LawKind.GAMMA else None
    instances = random_instances(
        config.seed, config.instances, config.n_range, config.weight_range
    )
    for idx, w in enumerate(instances):
        stats = weight_stats(w, d)
        for t_index, t in enumerate(config.t_grid):
            if d.kind is LawKind.LAPLACE:
                threshold = t * stats.sigma
                lower = laplace_lower(t, stats).value
                upper = laplace_upper(t, stats).value
            elif d.kind is LawKind.EXPONENTIAL:
                threshold = t * stats.mean_s
                lower = janson_lower(t, stats).value
                upper = janson_upper(t, stats).value
            else:
                threshold = t * stats.mean_s
                lower = generic_lower(d, w, t, floor).value
                upper = generic_upper(d, w, t).value
            tol = _ORACLE_TOL
            try:
                exact, source = exact_tail(d, w, threshold)
            except NumericFailureError:
                est = is_tail(
                    d, w, threshold, _FALLBACK_SAMPLES,
                    _fallback_seed(config.seed, idx, t_index),
                )
                exact = est.p_hat
                source = "importance_sampling"
                tol = est.ci_high - est.ci_low
            passed = (lower <= exact + tol) and (exact <= upper + tol)
            rows.append(
                SandwichRow(
                    instance=idx,
                    dist=d.label(),
                    weights=w.values,
                    n=len(w),
                    t=float(t),
                    lower=lower,
                    exact=exact,
                    upper=upper,
                    slack_low=exact - lower,
                    slack_high=upper - exact,
                    passed=passed,
                    source=source,
                )
            )
    return rows


def rows_to_json(rows: list[SandwichRow], indent: int = 0) -> str:
    return json_dumps([r.as_dict() for r in rows], indent=indent)


def rows_to_csv(rows: list[SandwichRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(
            [
                r.instance,
                r.dist,
                r.n,
                format_float(r.t),
                format_float(r.lower),
                format_float(r.exact),
                format_float(r.upper),
                "true" if r.passed else "false",
                r.source,
            ]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# property suite
# ---------------------------------------------------------------------------


def _fmt_weights(w: WeightVector) -> str:
    return "(" + ", ".join(format_float(v) for v in w) + ")"


def _prop_squared_weight_floor(seed: int) -> PropertyResult:
    """P(sum a_i^2 Y_i >= sum a_i^2) >= 1/(16^(1/3) * 9) via the exact oracle."""
    floor = pz_bound(9.0)
    worst = math.inf
    witness = ""
    for w in random_instances(seed, 50):
        squared = WeightVector(tuple(v * v for v in w))
        p = hypoexp_tail(squared, squared.l1)
        if p < worst:
            worst = p
            witness = _fmt_weights(w)
    passed = worst >= floor
    return PropertyResult(
        name="squared_weight_floor",
        passed=passed,
        detail=f"min P = {worst:.6f} over 50 instances, floor {floor:.6f}",
        witness="" if passed else witness,
    )


def _prop_gaussian_tail_lower(_: int) -> PropertyResult:
    grid = np.geomspace(1e-2, 10.0, 100)
    bad = [float(u) for u in grid if gaussian_tail_lower(float(u)) > gaussian_tail(float(u))]
    return PropertyResult(
        name="gaussian_tail_lower",
        passed=not bad,
        detail=f"checked {len(grid)} grid points in [0.01, 10]",
        witness="" if not bad else f"u = {bad[0]!r}",
    )


def _prop_h_regimes(_: int) -> PropertyResult:
    """h(u) >= u^2/5 below sqrt(2) and h(u) >= u/4 above."""
    grid = np.geomspace(1e-3, 1e3, 200)
    bad = []
    for u in map(float, grid):
        value = h_closed(u)
        floor = u * u / 5.0 if u < math.sqrt(2.0) else u / 4.0
        if value < floor:
            bad.append(u)
    return PropertyResult(
        name="h_regimes",
        passed=not bad,
        detail="quadratic floor below sqrt(2), linear floor above, 200 points",
        witness="" if not bad else f"u = {bad[0]!r}",
    )


def _prop_decay_propagation(seed: int) -> PropertyResult:
    """P(S > u + v) >= exp(-v/a_max) P(S > u) for exponential sums."""
    failures = []
    instances = random_instances(seed, 10)
    for w in instances:
        mean_s = w.l1
        for u_mult in (0.5, 1.0, 2.0):
            for v_mult in (0.5, 1.0):
                u = u_mult * mean_s
                v = v_mult * w.a_max
                lhs = hypoexp_tail(w, u + v)
                rhs = math.exp(-v / w.a_max) * hypoexp_tail(w, u)
                if lhs < rhs * (1.0 - 1e-9) - 1e-15:
                    failures.append((w, u, v))
    passed = not failures
    witness = ""
    if failures:
        w, u, v = failures[0]
        witness = f"weights {_fmt_weights(w)}, u = {u!r}, v = {v!r}"
    return PropertyResult(
        name="decay_propagation",
        passed=passed,
        detail=f"{len(instances)} instances x 6 (u, v) pairs",
        witness=witness,
    )


def _prop_p_ge_mean_interval(seed: int) -> PropertyResult:
    lo, hi = 1.0 / 24.0, 23.0 / 24.0
    bad = []
    instances = random_instances(seed, 50)
    for w in instances:
        p = p_ge_mean(Distribution.exponential(), w)
        if not (lo < p < hi):
            bad.append((w, p))
    return PropertyResult(
        name="p_ge_mean_interval",
        passed=not bad,
        detail=f"P(S >= E S) in (1/24, 23/24) on {len(instances)} exponential instances",
        witness="" if not bad else f"weights {_fmt_weights(bad[0][0])}, p = {bad[0][1]!r}",
    )


def _prop_asymptotic_order(seed: int) -> PropertyResult:
    """-log P(S > t sigma) / (alpha t) stays within [0.9, 1.1] at t = 50."""
    t = 50.0
    bad = []
    instances = random_instances(seed, 10)
    for w in instances:
        stats = weight_stats(w, Distribution.laplace())
        tail = laplace_tail(w, t * stats.sigma)
        ratio = -math.log(tail) / (stats.alpha_sym * t)
        if not (0.9 <= ratio <= 1.1):
            bad.append((w, ratio))
    return PropertyResult(
        name="asymptotic_order",
        passed=not bad,
        detail=f"{len(instances)} Laplace instances at t = 50",
        witness="" if not bad else f"weights {_fmt_weights(bad[0][0])}, ratio = {bad[0][1]!r}",
    )


_PROPERTY_CHECKS = (
    _prop_squared_weight_floor,
    _prop_gaussian_tail_lower,
    _prop_h_regimes,
    _prop_decay_propagation,
    _prop_p_ge_mean_interval,
    _prop_asymptotic_order,
)


def property_suite(seed: int) -> PropertySuiteReport:
    """Re-run the library's mathematical invariants on seeded random instances."""
    results = tuple(check(seed) for check in _PROPERTY_CHECKS)
    return PropertySuiteReport(seed=seed, results=results)
