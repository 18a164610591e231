"""CSV ingestion and the stable output schemas."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TRACE_HEADER = ("t", "lower", "upper", "beta_star", "gap", "covered")
SERIES_HEADER = ("t", "y")


class DataError(ValueError):
    pass


def ingest_csv(path) -> np.ndarray:
    """Read column ``y`` (and optionally ``t``, which must strictly increase)."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    with fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "y" not in cols:
            raise DataError(f"{path}: missing column 'y' (header: {cols})")
        has_t = "t" in cols
        ys, last_t = [], None
        for lineno, row in enumerate(reader, start=2):
            try:
                v = float(row["y"])
            except (TypeError, ValueError):
                raise DataError(f"{path}: row {lineno}: non-numeric y value {row['y']!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {lineno}: non-finite y value {row['y']!r}")
            if has_t:
                try:
                    t = float(row["t"])
                except (TypeError, ValueError):
                    raise DataError(f"{path}: row {lineno}: non-numeric t value {row['t']!r}") from None
                if last_t is not None and not t > last_t:
                    raise DataError(f"{path}: row {lineno}: t={row['t']} is not increasing")
                last_t = t
            ys.append(v)
    if not ys:
        raise DataError(f"{path}: no data rows")
    return np.asarray(ys, dtype=float)


def fmt(v) -> str:
    """Shortest round-trip text for floats so outputs replay byte-for-byte."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([fmt(v) for v in r])


def write_series(path, y, t0: int = 1) -> None:
    write_rows(path, SERIES_HEADER, ((t0 + i, v) for i, v in enumerate(y)))


def write_trace(path, results) -> None:
    write_rows(path, TRACE_HEADER, ((r.t, r.lower, r.upper, r.beta_star, r.gap, r.covered) for r in results))
