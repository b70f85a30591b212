"""BER curves: points, confidence intervals, slope fits and CSV/JSON files."""

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import jsonschema
from scipy import stats

from .base import Source, UsageError

CSV_COLUMNS = ("ebn0_db", "user", "ber", "ci_lo", "ci_hi", "bit_errors", "bits_sent", "source")

CURVE_SCHEMA = {
    "type": "object",
    "required": ["points"],
    "properties": {
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(CSV_COLUMNS),
                "additionalProperties": False,
                "properties": {
                    "ebn0_db": {"type": "number"},
                    "user": {"type": "integer", "minimum": 1},
                    "ber": {"type": "number", "minimum": 0},
                    "ci_lo": {"type": ["number", "null"]},
                    "ci_hi": {"type": ["number", "null"]},
                    "bit_errors": {"type": ["integer", "null"], "minimum": 0},
                    "bits_sent": {"type": ["integer", "null"], "minimum": 1},
                    "source": {"enum": [s.value for s in Source]},
                },
            },
        }
    },
}


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion errors/trials."""
    if trials < 1:
        raise UsageError(f"trials must be at least 1, got {trials}")
    if not 0 <= errors <= trials:
        raise UsageError(f"errors must lie in 0..{trials}, got {errors}")
    if not 0 < confidence < 1:
        raise UsageError(f"confidence must lie in (0, 1), got {confidence}")
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = errors / trials
    denominator = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denominator
    margin = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denominator
    lo = 0.0 if errors == 0 else max(0.0, center - margin)
    hi = 1.0 if errors == trials else min(1.0, center + margin)
    return lo, hi


@dataclass(kw_only=True, frozen=True)
class BerPoint:
    """One (Eb/N0, user) entry. Bound points carry no counts or interval."""

    ebn0_db: float
    user: int
    ber: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    bit_errors: int | None = None
    bits_sent: int | None = None
    source: Source = Source.SIMULATED

    def __post_init__(self):
        object.__setattr__(self, "source", Source(self.source))
        if self.user < 1:
            raise UsageError(f"user numbers start at 1, got {self.user}")
        if self.source == Source.SIMULATED:
            if self.bit_errors is None or self.bits_sent is None:
                raise UsageError("simulated points need bit_errors and bits_sent")
            if not 0 <= self.bit_errors <= self.bits_sent:
                raise UsageError(
                    f"bit_errors {self.bit_errors} outside 0..bits_sent={self.bits_sent}"
                )

    @classmethod
    def simulated(cls, *, ebn0_db: float, user: int, bit_errors: int, bits_sent: int) -> "BerPoint":
        lo, hi = wilson_interval(bit_errors, bits_sent)
        return cls(
            ebn0_db=float(ebn0_db),
            user=user,
            ber=bit_errors / bits_sent,
            ci_lo=lo,
            ci_hi=hi,
            bit_errors=int(bit_errors),
            bits_sent=int(bits_sent),
            source=Source.SIMULATED,
        )


@dataclass(kw_only=True, frozen=True)
class BerCurve:
    points: tuple[BerPoint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def users(self) -> tuple[int, ...]:
        return tuple(sorted({p.user for p in self.points}))

    def select(self, *, user: int | None = None, source: Source | None = None) -> list[BerPoint]:
        """Points of one user and/or source, in Eb/N0 order."""
        chosen = [
            p
            for p in self.points
            if (user is None or p.user == user) and (source is None or p.source == source)
        ]
        return sorted(chosen, key=lambda p: p.ebn0_db)

    def merge(self, other: "BerCurve") -> "BerCurve":
        """Points of both curves ordered by (Eb/N0, source, user)."""
        order = {source: rank for rank, source in enumerate(Source)}
        merged = sorted(
            self.points + other.points, key=lambda p: (p.ebn0_db, order[p.source], p.user)
        )
        return BerCurve(points=tuple(merged))


def fit_diversity_slope(
    curve: BerCurve,
    user: int,
    window: tuple[float, float],
    source: Source | None = None,
) -> float:
    """
    Decades of BER per decade of SNR between the two window points:
    (log10 ber2 - log10 ber1) / ((ebn0_2 - ebn0_1) / 10).

    A curve holding several sources (e.g. a compare run) needs an explicit source.
    """
    start, stop = window
    if start == stop:
        raise UsageError("the slope window needs two distinct Eb/N0 points")
    selected = curve.select(user=user, source=source)
    sources = {p.source for p in selected if p.ebn0_db in (start, stop)}
    if len(sources) > 1:
        raise UsageError(
            f"user {user} has {' and '.join(sorted(s.value for s in sources))} points "
            "in the slope window; pass a source"
        )
    points = {p.ebn0_db: p for p in selected}
    missing = [x for x in (start, stop) if x not in points]
    if missing:
        raise UsageError(
            f"user {user} has no point at {', '.join(f'{x:g}' for x in missing)} dB"
        )
    first, second = points[start], points[stop]
    for point in (first, second):
        if point.ber <= 0:
            raise UsageError(
                f"user {user} has zero errors at {point.ebn0_db:g} dB; "
                "raise --max-symbols or --min-errors to extend the simulation"
            )
    return (math.log10(second.ber) - math.log10(first.ber)) / ((stop - start) / 10)


def _format_float(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def curve_to_csv(curve: BerCurve) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in curve.points:
        writer.writerow(
            [
                _format_float(p.ebn0_db),
                p.user,
                _format_float(p.ber),
                _format_float(p.ci_lo),
                _format_float(p.ci_hi),
                "" if p.bit_errors is None else p.bit_errors,
                "" if p.bits_sent is None else p.bits_sent,
                p.source.value,
            ]
        )
    return buffer.getvalue()


def curve_to_json(curve: BerCurve) -> str:
    document = {"points": [{**asdict(p), "source": p.source.value} for p in curve.points]}
    jsonschema.validate(document, CURVE_SCHEMA)
    return json.dumps(document, indent=2) + "\n"


def render_curve(curve: BerCurve, fmt: str) -> str:
    if fmt == "csv":
        return curve_to_csv(curve)
    if fmt == "json":
        return curve_to_json(curve)
    raise UsageError(f"unknown output format {fmt!r}; use csv or json")


def write_text_atomic(path: str | os.PathLike, text: str) -> None:
    """Writes through a temporary file in the target directory, so a failure leaves nothing behind."""
    path = Path(path)
    handle, temporary = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(handle, "w", newline="") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except BaseException:
        Path(temporary).unlink(missing_ok=True)
        raise


def emit_curve(curve: BerCurve, fmt: str, path: str | os.PathLike) -> None:
    """Writes the curve as CSV or JSON; the text always ends with a newline."""
    write_text_atomic(path, render_curve(curve, fmt))


def _optional(text: str, kind):
    return None if text == "" else kind(text)


def curve_from_csv(text: str) -> BerCurve:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise UsageError(f"CSV header must be {','.join(CSV_COLUMNS)}")
    points = [
        BerPoint(
            ebn0_db=float(row["ebn0_db"]),
            user=int(row["user"]),
            ber=float(row["ber"]),
            ci_lo=_optional(row["ci_lo"], float),
            ci_hi=_optional(row["ci_hi"], float),
            bit_errors=_optional(row["bit_errors"], int),
            bits_sent=_optional(row["bits_sent"], int),
            source=Source(row["source"]),
        )
        for row in reader
    ]
    return BerCurve(points=tuple(points))


def curve_from_json(text: str) -> BerCurve:
    document = json.loads(text)
    try:
        jsonschema.validate(document, CURVE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid curve document: {exc.message}") from None
    return BerCurve(points=tuple(BerPoint(**p) for p in document["points"]))


def load_curve(path: str | os.PathLike) -> BerCurve:
    """Reads a curve written by emit_curve; the format follows the file suffix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return curve_from_json(text)
    return curve_from_csv(text)
