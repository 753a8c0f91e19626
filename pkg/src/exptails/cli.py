"""Command-line front end: bound curves, exact tails, simulation, verification.

Subcommands emit JSON or CSV; numeric payloads are serialized with 17
significant digits so the same argv always produces the same bytes (the
timestamp lives in an ignorable metadata header).  Exit codes: 0 success,
1 usage error, 2 failing verification rows, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

from .bounds import (
    generic_lower,
    generic_upper,
    janson_lower,
    janson_upper,
    laplace_lower,
    laplace_upper,
    moment_bounds,
    s_inequality_upper,
)
from .core import (
    Distribution,
    InvalidInputError,
    LawKind,
    NumericFailureError,
    WeightStats,
    WeightVector,
    format_float,
    json_dumps,
    parse_weights,
    weight_stats,
)
from .harness import (
    SandwichConfig,
    property_suite,
    rows_to_csv,
    sandwich_report,
)
from .montecarlo import is_tail, mc_tail
from .oracle import exact_tail, laplace_abs_moment, p_ge_mean

_DISTS = ("exponential", "gamma", "laplace")

_COLUMNS = {
    "bounds": ("t", "threshold", "kind", "value", "log_value", "valid"),
    "exact": ("t", "threshold", "tail", "source"),
    "simulate": (
        "t", "threshold", "p_hat", "stderr", "ci_low", "ci_high",
        "n", "method", "seed", "tilt_theta",
    ),
    "moments": ("p", "lower", "exact", "upper", "mode"),
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; the JSON meta header carries it verbatim."""

    subcommand: str
    dist: str
    shape: "float | None" = None
    weights: "tuple[float, ...] | None" = None
    t: "tuple[float, ...] | None" = None
    threshold: "tuple[float, ...] | None" = None
    p: "tuple[float, ...] | None" = None
    mode: "str | None" = None
    samples: "int | None" = None
    method: "str | None" = None
    instances: "int | None" = None
    seed: int = 0
    fmt: str = "json"
    out: "str | None" = None

    def as_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "dist": self.dist,
            "shape": self.shape,
            "weights": None if self.weights is None else list(self.weights),
            "t": None if self.t is None else list(self.t),
            "threshold": None if self.threshold is None else list(self.threshold),
            "p": None if self.p is None else list(self.p),
            "mode": self.mode,
            "samples": self.samples,
            "method": self.method,
            "instances": self.instances,
            "seed": self.seed,
            "format": self.fmt,
            "out": self.out,
        }


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this front end uses 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_float_list(text: str, what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(piece) for piece in text.split(",") if piece.strip())
    except ValueError as exc:
        raise InvalidInputError(f"invalid {what} list {text!r}: {exc}") from exc
    if not values:
        raise InvalidInputError(f"empty {what} list")
    for v in values:
        if not math.isfinite(v):
            raise InvalidInputError(f"{what} values must be finite, got {v!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exptails", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add_common(p: argparse.ArgumentParser, with_weights: bool = True) -> None:
        p.add_argument("--dist", required=True, choices=_DISTS)
        p.add_argument("--shape", type=float, default=None,
                       help="gamma shape parameter (gamma only)")
        if with_weights:
            p.add_argument("--weights", required=True,
                           help="comma-separated positive weights, e.g. 2,1")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    def add_threshold_group(p: argparse.ArgumentParser) -> None:
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--t", help="thresholds in units of sigma (Laplace) or E S")
        group.add_argument("--threshold", help="thresholds in absolute units")

    p_bounds = sub.add_parser("bounds", help="bound curves over a threshold grid")
    add_common(p_bounds)
    add_threshold_group(p_bounds)

    p_exact = sub.add_parser("exact", help="exact oracle tails")
    add_common(p_exact)
    add_threshold_group(p_exact)

    p_sim = sub.add_parser("simulate", help="Monte Carlo tail estimates")
    add_common(p_sim)
    add_threshold_group(p_sim)
    p_sim.add_argument("--samples", type=int, default=100_000)
    p_sim.add_argument("--method", choices=("plain", "tilted"), default="plain")

    p_mom = sub.add_parser("moments", help="moment-norm bounds and exact values")
    add_common(p_mom)
    p_mom.add_argument("--p", default="2,3,4,6,8", help="comma-separated moment orders")
    p_mom.add_argument("--mode", choices=("proof_derived", "paper"), default="proof_derived")

    p_verify = sub.add_parser("verify", help="sandwich certification + property suite")
    add_common(p_verify, with_weights=False)
    p_verify.add_argument("--instances", type=int, default=50)
    p_verify.add_argument("--t", default=None,
                          help="override the sandwich t grid (must lie in (1, inf))")

    return parser


def _make_distribution(args: argparse.Namespace) -> Distribution:
    if args.dist == "gamma":
        if args.shape is None:
            raise InvalidInputError("--shape is required for --dist gamma")
        return Distribution.gamma(args.shape)
    if args.shape is not None:
        raise InvalidInputError("--shape applies only to --dist gamma")
    if args.dist == "laplace":
        return Distribution.laplace()
    return Distribution.exponential()


def _unit(d: Distribution, stats: WeightStats) -> float:
    """Absolute size of one threshold unit: sigma for Laplace, E S otherwise."""
    return stats.sigma if d.kind is LawKind.LAPLACE else stats.mean_s


def _resolve_thresholds(
    args: argparse.Namespace, d: Distribution, stats: WeightStats
) -> tuple["tuple[float, ...] | None", "tuple[float, ...] | None", list[tuple[float, float]]]:
    """(t option, threshold option, [(relative, absolute)] pairs)."""
    unit = _unit(d, stats)
    if args.t is not None:
        rel = _parse_float_list(args.t, "--t")
        return rel, None, [(t, t * unit) for t in rel]
    raw = _parse_float_list(args.threshold, "--threshold")
    return None, raw, [(x / unit, x) for x in raw]


def _bound_rows(d: Distribution, w: WeightVector, pairs: list[tuple[float, float]]) -> list[dict]:
    stats = weight_stats(w, d)
    rows: list[dict] = []
    p_mean = None if d.kind is LawKind.LAPLACE else p_ge_mean(d, w)
    for t, threshold in pairs:
        if d.kind is LawKind.LAPLACE:
            bounds = [laplace_lower(t, stats), laplace_upper(t, stats)]
        else:
            bounds = [
                generic_lower(d, w, t, p_mean),
                generic_upper(d, w, t),
                s_inequality_upper(t, p_mean),
            ]
            if d.kind is LawKind.EXPONENTIAL:
                bounds = [janson_lower(t, stats), janson_upper(t, stats)] + bounds
        for b in bounds:
            rows.append(
                {
                    "t": t,
                    "threshold": threshold,
                    "kind": b.kind.value,
                    "value": b.value,
                    "log_value": b.log_value,
                    "valid": b.valid,
                }
            )
    return rows


def _exact_rows(d: Distribution, w: WeightVector, pairs: list[tuple[float, float]]) -> list[dict]:
    rows = []
    for t, threshold in pairs:
        tail, source = exact_tail(d, w, threshold)
        rows.append({"t": t, "threshold": threshold, "tail": tail, "source": source})
    return rows


def _simulate_rows(
    d: Distribution,
    w: WeightVector,
    pairs: list[tuple[float, float]],
    args: argparse.Namespace,
) -> list[dict]:
    rows = []
    for t, threshold in pairs:
        if args.method == "tilted":
            est = is_tail(d, w, threshold, args.samples, args.seed)
        else:
            est = mc_tail(d, w, threshold, args.samples, args.seed)
        rows.append(
            {
                "t": t,
                "threshold": threshold,
                "p_hat": est.p_hat,
                "stderr": est.stderr,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "n": est.n,
                "method": est.method,
                "seed": est.seed,
                "tilt_theta": est.tilt_theta,
            }
        )
    return rows


def _moment_rows(d: Distribution, w: WeightVector, args: argparse.Namespace) -> list[dict]:
    if d.kind is not LawKind.LAPLACE:
        raise InvalidInputError("moments requires --dist laplace")
    orders = _parse_float_list(args.p, "--p")
    rows = []
    for p in orders:
        lower, upper = moment_bounds(p, w, mode=args.mode)
        exact = laplace_abs_moment(w, p) ** (1.0 / p)
        rows.append({"p": p, "lower": lower, "exact": exact, "upper": upper, "mode": args.mode})
    return rows


def _table_csv(columns: tuple[str, ...], rows: list[dict], header_lines: list[str]) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _meta(config: RunConfig) -> dict:
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return {"config": config.as_dict(), "generated_at": stamp}


def _emit(text: str, out: "str | None") -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        dist=args.dist,
        shape=args.shape,
        weights=parse_weights(args.weights).values if getattr(args, "weights", None) else None,
        t=_parse_float_list(args.t, "--t") if getattr(args, "t", None) else None,
        threshold=(
            _parse_float_list(args.threshold, "--threshold")
            if getattr(args, "threshold", None)
            else None
        ),
        p=_parse_float_list(args.p, "--p") if getattr(args, "p", None) else None,
        mode=getattr(args, "mode", None),
        samples=getattr(args, "samples", None),
        method=getattr(args, "method", None),
        instances=getattr(args, "instances", None),
        seed=args.seed,
        fmt=args.fmt,
        out=args.out,
    )


def _run_table_subcommand(args: argparse.Namespace, config: RunConfig) -> int:
    d = _make_distribution(args)
    w = parse_weights(args.weights)
    if args.subcommand == "moments":
        rows = _moment_rows(d, w, args)
    else:
        stats = weight_stats(w, d)
        _, _, pairs = _resolve_thresholds(args, d, stats)
        if args.subcommand == "bounds":
            rows = _bound_rows(d, w, pairs)
        elif args.subcommand == "exact":
            rows = _exact_rows(d, w, pairs)
        else:
            rows = _simulate_rows(d, w, pairs, args)
    if args.fmt == "json":
        text = json_dumps({"meta": _meta(config), "rows": rows}, indent=2) + "\n"
    else:
        meta = _meta(config)
        header = [
            f"generated_at={meta['generated_at']}",
            f"config={json_dumps(meta['config'])}",
        ]
        text = _table_csv(_COLUMNS[args.subcommand], rows, header)
    _emit(text, args.out)
    return 0


def _run_verify(args: argparse.Namespace, config: RunConfig) -> int:
    d = _make_distribution(args)
    kwargs = {}
    if args.t is not None:
        kwargs["t_grid"] = _parse_float_list(args.t, "--t")
    sandwich_config = SandwichConfig(
        distribution=d, instances=args.instances, seed=args.seed, **kwargs
    )
    rows = sandwich_report(sandwich_config)
    suite = property_suite(args.seed)
    all_pass = all(r.passed for r in rows) and suite.passed
    if args.fmt == "json":
        payload = {
            "meta": _meta(config),
            "sandwich": [r.as_dict() for r in rows],
            "properties": [r.as_dict() for r in suite.results],
            "pass": all_pass,
        }
        text = json_dumps(payload, indent=2) + "\n"
    else:
        meta = _meta(config)
        buf = io.StringIO()
        buf.write(f"# generated_at={meta['generated_at']}\n")
        buf.write(f"# config={json_dumps(meta['config'])}\n")
        for r in suite.results:
            status = "true" if r.passed else "false"
            buf.write(f"# property {r.name} pass={status}\n")
        buf.write(f"# suite_pass={'true' if all_pass else 'false'}\n")
        buf.write(rows_to_csv(rows))
        text = buf.getvalue()
    _emit(text, args.out)
    failing = sum(1 for r in rows if not r.passed)
    prop_fail = sum(1 for r in suite.results if not r.passed)
    print(
        f"verify: {len(rows)} rows ({failing} failing), "
        f"{len(suite.results)} properties ({prop_fail} failing)",
        file=sys.stderr,
    )
    return 0 if all_pass else 2


def run(argv: "list[str] | None" = None) -> int:
    """Parse argv, execute the subcommand, return the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config_from_args(args)
        if args.subcommand == "verify":
            return _run_verify(args, config)
        return _run_table_subcommand(args, config)
    except InvalidInputError as exc:
        print(f"exptails: error: {exc}", file=sys.stderr)
        return 1
    except NumericFailureError as exc:
        print(f"exptails: numeric failure: {exc}", file=sys.stderr)
        return 3


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
