"""Small helpers for the delimiter-separated outputs every stage writes."""
from __future__ import annotations

import csv
import io
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence


def round_half_up(value, places: int = 3) -> str:
    """Decimal string of ``value`` rounded half away from zero.

    Works on the exact rational, so 0.0125 rounds to 0.013 regardless of
    binary floating point.
    """
    x = Fraction(value)
    scale = 10**places
    sign = "-" if x < 0 else ""
    q = (abs(x) * scale + Fraction(1, 2)).__floor__()
    whole, frac = divmod(q, scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


def fraction_text(value) -> str:
    """Exact rational as ``num/den`` (or an integer when den is 1)."""
    x = Fraction(value)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(header, rows), encoding="utf-8")
    return path


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
