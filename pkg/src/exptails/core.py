"""Shared domain types: summand laws, weight vectors, derived weight statistics.

Everything downstream works on a sum S = sum_i a_i X_i with positive weights
a_i and i.i.d. unit summands X_i that are exponential(1), gamma(shape), or
standard Laplace.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence


class InvalidInputError(ValueError):
    """An argument is outside the operation's domain."""


class UnsupportedLawError(InvalidInputError):
    """The operation does not apply to the given summand law."""


class NumericFailureError(RuntimeError):
    """An iterative routine could not reach its accuracy target.

    ``achieved`` carries the best estimate (value or error bound) reached so
    callers can decide whether to fall back.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class MixtureUnavailableError(NumericFailureError):
    """A partial-fraction mixture is too ill-conditioned (or too large) to trust."""


class LawKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class Distribution:
    """Law of one unit summand.

    ``shape`` is the gamma shape parameter and must be 1 for the other kinds
    (exponential is gamma with shape 1; Laplace has no shape).
    """

    kind: LawKind
    shape: float = 1.0

    def __post_init__(self):
        kind = LawKind(self.kind)
        object.__setattr__(self, "kind", kind)
        shape = float(self.shape)
        if not math.isfinite(shape) or shape <= 0:
            raise InvalidInputError(f"shape must be positive and finite, got {self.shape!r}")
        if kind is not LawKind.GAMMA and shape != 1.0:
            raise InvalidInputError(f"shape only applies to gamma, got shape={shape} for {kind.value}")
        object.__setattr__(self, "shape", shape)

    @classmethod
    def exponential(cls) -> "Distribution":
        return cls(LawKind.EXPONENTIAL)

    @classmethod
    def gamma(cls, shape: float) -> "Distribution":
        return cls(LawKind.GAMMA, shape)

    @classmethod
    def laplace(cls) -> "Distribution":
        return cls(LawKind.LAPLACE)

    @property
    def mean(self) -> float:
        """E X of one unit summand."""
        if self.kind is LawKind.LAPLACE:
            return 0.0
        return self.shape if self.kind is LawKind.GAMMA else 1.0

    @property
    def variance(self) -> float:
        """Var X of one unit summand."""
        if self.kind is LawKind.LAPLACE:
            return 2.0
        return self.shape if self.kind is LawKind.GAMMA else 1.0

    @property
    def nonnegative(self) -> bool:
        return self.kind is not LawKind.LAPLACE

    def label(self) -> str:
        """Short text form, e.g. 'gamma(0.5)' or 'laplace'."""
        if self.kind is LawKind.GAMMA:
            return f"gamma({self.shape:g})"
        return self.kind.value


@dataclass(frozen=True)
class WeightVector:
    """Positive finite weights (a_1, ..., a_n)."""

    values: tuple[float, ...]

    def __post_init__(self):
        try:
            vals = tuple(float(v) for v in self.values)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"weights must be numbers: {exc}") from exc
        if not vals:
            raise InvalidInputError("weight vector must not be empty")
        for v in vals:
            if not math.isfinite(v) or v <= 0.0:
                raise InvalidInputError(f"weights must be positive and finite, got {v!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    @property
    def a_max(self) -> float:
        return max(self.values)

    @property
    def l1(self) -> float:
        return math.fsum(self.values)

    @property
    def l2(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values))


def as_weights(w: "WeightVector | Sequence[float]") -> WeightVector:
    """Coerce a sequence of numbers to a validated WeightVector."""
    if isinstance(w, WeightVector):
        return w
    return WeightVector(tuple(w))


def parse_weights(text: str) -> WeightVector:
    """Parse weights from a comma-separated string or a JSON array.

    Accepts "2,1", " 2, 1 " and "[2, 1]".
    """
    stripped = text.strip()
    if not stripped:
        raise InvalidInputError("empty weight list")
    if stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"invalid JSON weight array: {exc}") from exc
        if not isinstance(data, list):
            raise InvalidInputError(f"expected a JSON array of numbers, got {type(data).__name__}")
        return as_weights(data)
    try:
        parts = [float(p) for p in stripped.split(",") if p.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"invalid weight list {text!r}: {exc}") from exc
    return as_weights(parts)


@dataclass(frozen=True)
class WeightStats:
    """Norms and effective-dimension ratios of a weight vector under a law.

    ``alpha_exp`` = l1/a_max drives the one-sided (exponential/gamma) bounds;
    ``alpha_sym`` = sqrt(2)*l2/a_max drives the symmetric (Laplace) bounds and
    equals sigma/a_max under the Laplace law.
    """

    n: int
    a_max: float
    l1: float
    l2: float
    sigma: float
    alpha_exp: float
    alpha_sym: float
    mean_s: float


def weight_stats(w: "WeightVector | Sequence[float]", d: Distribution) -> WeightStats:
    """Compute WeightStats for the sum of d-distributed summands scaled by w."""
    w = as_weights(w)
    a_max = w.a_max
    l1 = w.l1
    l2 = w.l2
    return WeightStats(
        n=len(w),
        a_max=a_max,
        l1=l1,
        l2=l2,
        sigma=math.sqrt(d.variance) * l2,
        alpha_exp=l1 / a_max,
        alpha_sym=math.sqrt(2.0) * l2 / a_max,
        mean_s=d.mean * l1,
    )


def format_float(x: float) -> str:
    """Serialize a float with 17 significant digits (lossless round-trip)."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInputError(f"cannot serialize non-finite value {x!r}")
    return "%.17g" % x


def json_dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats rendered by format_float.

    The stdlib encoder hardcodes repr() for floats; this walker keeps dict
    insertion order and defers string escaping to the stdlib.
    """
    pieces: list[str] = []
    _json_walk(obj, pieces, indent, 0)
    return "".join(pieces)


def _json_walk(obj, pieces: list[str], indent: int, depth: int) -> None:
    pad = "\n" + " " * (indent * (depth + 1)) if indent else ""
    close_pad = "\n" + " " * (indent * depth) if indent else ""
    if obj is None:
        pieces.append("null")
    elif isinstance(obj, bool):
        pieces.append("true" if obj else "false")
    elif isinstance(obj, int):
        pieces.append(str(obj))
    elif isinstance(obj, float):
        pieces.append(format_float(obj))
    elif isinstance(obj, str):
        pieces.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                pieces.append(",")
            pieces.append(pad)
            pieces.append(json.dumps(str(key)))
            pieces.append(": " if indent else ":")
            _json_walk(value, pieces, indent, depth + 1)
        pieces.append(close_pad)
        pieces.append("}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            pieces.append("[]")
            return
        pieces.append("[")
        for i, value in enumerate(obj):
            if i:
                pieces.append(",")
            pieces.append(pad)
            _json_walk(value, pieces, indent, depth + 1)
        pieces.append(close_pad)
        pieces.append("]")
    else:
        raise InvalidInputError(f"cannot serialize {type(obj).__name__} to JSON")
