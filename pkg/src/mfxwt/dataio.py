"""Price CSV ingestion, return construction and artifact writers."""
from __future__ import annotations

import csv
import datetime as dt
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateDate, EmptyIntersection, NonPositivePrice, ParseError, ShapeMismatch


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple
    closes: np.ndarray
    symbol: str = ""

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSeries:
    dates: tuple
    values: np.ndarray
    kind: str = "returns"
    symbol: str = ""

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True)
class AlignedPair:
    dates: tuple
    x: np.ndarray
    y: np.ndarray
    dropped_x: int
    dropped_y: int


def parse_date(text):
    text = text.strip()
    try:
        return dt.date.fromisoformat(text[:10])
    except ValueError:
        raise ValueError(f"unrecognised date {text!r}") from None


def _find_column(header, name):
    lowered = [h.strip().lower() for h in header]
    try:
        return lowered.index(name.lower())
    except ValueError:
        raise ParseError(f"column {name!r} not found in header {header}", 1) from None


def load_price_csv(path, date_col="Date", close_col="Close", symbol=None):
    """Read a dated close-price table, sorted ascending by date."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        di = _find_column(header, date_col)
        ci = _find_column(header, close_col)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                date = parse_date(row[di])
                close = float(row[ci])
            except (IndexError, ValueError) as exc:
                raise ParseError(str(exc) or "malformed row", lineno) from None
            if not np.isfinite(close) or close <= 0:
                raise NonPositivePrice(f"line {lineno}: close price {row[ci]!r} is not positive")
            rows.append((date, close))
    if not rows:
        raise ParseError("no data rows", 2)
    rows.sort(key=lambda r: r[0])
    dates = tuple(r[0] for r in rows)
    for a, b in zip(dates, dates[1:]):
        if a == b:
            raise DuplicateDate(f"date {a.isoformat()} appears more than once")
    closes = np.array([r[1] for r in rows])
    return PriceSeries(dates, closes, symbol or os.path.splitext(os.path.basename(str(path)))[0])


def to_returns(prices, kind="returns"):
    """Log returns ``ln I(t) - ln I(t-1)``; ``kind="volatility"`` takes their magnitude."""
    if kind not in ("returns", "volatility"):
        raise ValueError(f"unknown return kind {kind!r}")
    r = np.diff(np.log(prices.closes))
    if kind == "volatility":
        r = np.abs(r)
    return ReturnSeries(prices.dates[1:], r, kind, prices.symbol)


def align_pair(a, b):
    """Inner join of two dated series (prices or returns) on their dates."""
    va = a.closes if isinstance(a, PriceSeries) else a.values
    vb = b.closes if isinstance(b, PriceSeries) else b.values
    common = sorted(set(a.dates) & set(b.dates))
    if not common:
        raise EmptyIntersection("the two series share no dates")
    ia = {d: i for i, d in enumerate(a.dates)}
    ib = {d: i for i, d in enumerate(b.dates)}
    x = va[[ia[d] for d in common]]
    y = vb[[ib[d] for d in common]]
    return AlignedPair(tuple(common), x, y, len(a.dates) - len(common), len(b.dates) - len(common))


def aligned_returns(pa, pb, kind="returns"):
    """Align on prices first, then difference.

    A day missing from one index therefore yields a single two-day return
    rather than a misaligned pair.
    """
    pair = align_pair(pa, pb)
    xa = to_returns(PriceSeries(pair.dates, pair.x, pa.symbol), kind)
    xb = to_returns(PriceSeries(pair.dates, pair.y, pb.symbol), kind)
    return AlignedPair(xa.dates, xa.values, xb.values, pair.dropped_x, pair.dropped_y)


def load_values_csv(path, column=None):
    """One numeric column (by name, or ``value``, or the first) of a headed CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if column is not None:
            idx = _find_column(header, column)
        elif "value" in [h.strip().lower() for h in header]:
            idx = _find_column(header, "value")
        else:
            idx = 0
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                out.append(float(row[idx]))
            except (IndexError, ValueError):
                raise ParseError(f"non-numeric value {row!r}", lineno) from None
    return np.array(out)


def has_column(path, name):
    with open(path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh), [])
    return name.lower() in [h.strip().lower() for h in header]


# ------------------------------------------------------------------ writers

def fmt(v):
    return format(float(v), ".17g")


def atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (dt.date,)):
        return obj.isoformat()
    return obj


def dumps_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    atomic_write_text(path, dumps_json(obj))


def columns_csv(columns):
    """CSV text from an ordered mapping of column name -> sequence."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    if len({c.size for c in cols}) > 1:
        raise ShapeMismatch("columns differ in length")
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def surface_long_csv(p_values, q_values, values):
    """Long-format ``p,q,value`` rows in row-major order."""
    values = np.asarray(values)
    lines = ["p,q,value"]
    for a, p in enumerate(p_values):
        for b, q in enumerate(q_values):
            lines.append(f"{fmt(p)},{fmt(q)},{fmt(values[a, b])}")
    return "\n".join(lines) + "\n"


def read_surface_long_csv(path):
    """Inverse of :func:`surface_long_csv`; returns ``(p_values, q_values, values)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["p", "q", "value"]:
            raise ParseError(f"unexpected header {header}", 1)
        rows = [(float(p), float(q), float(v)) for p, q, v in reader]
    ps = sorted({r[0] for r in rows})
    qs = sorted({r[1] for r in rows})
    out = np.full((len(ps), len(qs)), np.nan)
    pi = {p: i for i, p in enumerate(ps)}
    qi = {q: i for i, q in enumerate(qs)}
    for p, q, v in rows:
        out[pi[p], qi[q]] = v
    return np.array(ps), np.array(qs), out
