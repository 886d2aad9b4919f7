"""Read and write daily capitalization panels as CSV.

The format is one row per (date, stock): ``date,stock_id,cap,dlret`` with
ISO dates.  A stock's delisting return goes on its last row before it
disappears; an empty field means the return was not reported.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import os
from dataclasses import replace

from .errors import DuplicateStockDay, MalformedRow, NonPositiveCap
from .market import Delisting, MarketPath, from_panel

__all__ = ["DlretPolicy", "load_csv", "write_csv", "apply_policy"]

HEADER = ("date", "stock_id", "cap", "dlret")


class DlretPolicy(enum.Enum):
    """How to fill delisting returns that were not reported."""

    CONSERVATIVE = "conservative"  # total loss
    OPTIMISTIC = "optimistic"  # position paid out at the last price
    AS_GIVEN = "as-given"  # leave missing; the engine then charges nothing

    @property
    def fill(self):
        return {"conservative": -1.0, "optimistic": 0.0}.get(self.value)

    @classmethod
    def coerce(cls, value) -> "DlretPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("_", "-").lower())
        except ValueError:
            choices = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown dlret policy {value!r}; choose from {choices}") from None


def apply_policy(path: MarketPath, policy) -> MarketPath:
    """Fill missing delisting returns according to ``policy``."""
    fill = DlretPolicy.coerce(policy).fill
    if fill is None:
        return path
    return path.with_delistings(
        replace(d, dlret=fill) if d.dlret is None else d for d in path.delistings
    )


def _parse_row(row, lineno):
    try:
        date = dt.date.fromisoformat(row["date"].strip())
    except (ValueError, AttributeError):
        raise MalformedRow(f"bad date {row.get('date')!r}", lineno) from None
    sid = (row.get("stock_id") or "").strip()
    if not sid:
        raise MalformedRow("empty stock_id", lineno)
    try:
        cap = float(row["cap"])
    except (TypeError, ValueError):
        raise MalformedRow(f"bad cap {row.get('cap')!r}", lineno) from None
    if not cap > 0 or cap == float("inf"):
        raise NonPositiveCap(f"line {lineno}: cap {cap} for {sid!r} on {date}")
    raw = (row.get("dlret") or "").strip()
    dlret = None
    if raw:
        try:
            dlret = float(raw)
        except ValueError:
            raise MalformedRow(f"bad dlret {raw!r}", lineno) from None
        if not dlret >= -1:
            raise MalformedRow(f"dlret {dlret} below -1", lineno)
    return date, sid, cap, dlret


def _read_rows(fh):
    reader = csv.DictReader(fh)
    fields = [f.strip() for f in (reader.fieldnames or [])]
    if fields[:3] != list(HEADER[:3]) or not set(fields) <= set(HEADER):
        raise MalformedRow(f"expected header date,stock_id,cap[,dlret], got {','.join(fields)}", 1)
    reader.fieldnames = fields
    for row in reader:
        if None in row:
            raise MalformedRow("too many fields", reader.line_num)
        if any(row.get(k) is None for k in HEADER[:3]):
            raise MalformedRow("too few fields", reader.line_num)
        yield reader.line_num, row


def load_csv(source, policy="conservative") -> MarketPath:
    """Load a panel into a :class:`MarketPath`.

    Parameters
    ----------
    source : path or text file object
    policy : DlretPolicy or str
        Applied to delistings whose return is not reported.

    Notes
    -----
    Within a day stocks are ordered by their first appearance in the file.
    A stock missing on a date after being present the date before produces
    a delisting on that date.  Days whose set of stocks changes are resets,
    even if the count stays the same.
    """
    policy = DlretPolicy.coerce(policy)
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_csv(fh, policy)

    by_date: dict[dt.date, dict[str, tuple[float, float | None, int]]] = {}
    order: dict[str, int] = {}
    for lineno, row in _read_rows(source):
        date, sid, cap, dlret = _parse_row(row, lineno)
        day = by_date.setdefault(date, {})
        if sid in day:
            raise DuplicateStockDay(f"{sid!r} appears twice on {date}", lineno)
        day[sid] = (cap, dlret, lineno)
        order.setdefault(sid, len(order))
    if not by_date:
        raise MalformedRow("no data rows")

    dates = sorted(by_date)
    caps, ids = [], []
    for date in dates:
        day = by_date[date]
        row_ids = sorted(day, key=order.__getitem__)
        ids.append(row_ids)
        caps.append([day[s][0] for s in row_ids])

    delistings = []
    for j in range(1, len(dates)):
        prev, cur = by_date[dates[j - 1]], by_date[dates[j]]
        for sid in ids[j - 1]:
            _, dlret, lineno = prev[sid]
            if sid not in cur:
                delistings.append(Delisting(j, sid, dlret))
            elif dlret is not None:
                raise MalformedRow(f"dlret given for {sid!r}, which is still listed on {dates[j]}", lineno)

    path = from_panel(caps, delistings=delistings, ids=ids, labels=[d.isoformat() for d in dates])
    return apply_policy(path, policy)


def _day_labels(path, base_date):
    if path.labels is not None:
        return list(path.labels)
    base = dt.date.fromisoformat(str(base_date))
    return [(base + dt.timedelta(days=j)).isoformat() for j in range(path.n_days)]


def write_csv(path: MarketPath, dest, base_date="2000-01-01") -> None:
    """Write ``path`` in the panel format read by :func:`load_csv`.

    Days are labelled with ``path.labels`` when present, otherwise with
    consecutive calendar dates from ``base_date``.  Numbers are written at
    full precision so a reload reproduces the path exactly.
    """
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_csv(path, fh, base_date)
        return
    labels = _day_labels(path, base_date)
    dl = {(d.day - 1, d.stock_id): d.dlret for d in path.delistings}
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(HEADER)
    for j, (label, row_ids, row_caps) in enumerate(zip(labels, path.ids, path.caps)):
        for sid, cap in zip(row_ids, row_caps):
            ret = dl.get((j, sid))
            writer.writerow((label, sid, repr(float(cap)), "" if ret is None else repr(ret)))


def dumps(path: MarketPath, base_date="2000-01-01") -> str:
    buf = io.StringIO()
    write_csv(path, buf, base_date)
    return buf.getvalue()
