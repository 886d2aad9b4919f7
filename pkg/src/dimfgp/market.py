"""Discrete-time market paths whose dimension changes over time.

A path is a sequence of trading days, each carrying a vector of strictly
positive capitalizations.  Days on which the set of listed stocks changes
are *resets*; the stretch between two resets is an *epoch* with constant
dimension and stable stock identities.  Epoch ``k`` (1-based) covers the
days ``[start, stop)`` and the dimensional jump into epoch ``k >= 2`` is the
day-step ``(start - 1, start]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import BadParameter, EmptyDay, NonPositiveCap

__all__ = [
    "Delisting",
    "Epoch",
    "MarketPath",
    "from_panel",
    "weights_at",
    "sigma",
    "sigma_product",
]


@dataclass(frozen=True)
class Delisting:
    """A stock present on ``day - 1`` and absent on ``day``.

    ``dlret`` is the delisting return in ``[-1, inf)``; ``None`` means it was
    not reported.
    """

    day: int
    stock_id: str
    dlret: float | None = None


@dataclass(frozen=True)
class Epoch:
    k: int
    n: int
    start: int
    stop: int

    def __len__(self):
        return self.stop - self.start


@dataclass(frozen=True)
class MarketPath:
    caps: tuple[np.ndarray, ...]
    ids: tuple[tuple[str, ...], ...]
    resets: tuple[int, ...]
    epochs: tuple[Epoch, ...]
    delistings: tuple[Delisting, ...] = ()
    labels: tuple[str, ...] | None = None
    _totals: np.ndarray = field(default=None, repr=False, compare=False)
    _epoch_index: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n_days(self) -> int:
        return len(self.caps)

    @property
    def days(self) -> range:
        return range(len(self.caps))

    def dimension(self, day: int) -> int:
        return len(self.caps[day])

    def total(self, day: int) -> float:
        return float(self._totals[day])

    @property
    def totals(self) -> np.ndarray:
        return self._totals

    def is_reset(self, day: int) -> bool:
        return day > 0 and self.epoch_of(day).start == day

    def epoch_of(self, day: int) -> Epoch:
        if not 0 <= day < self.n_days:
            raise IndexError(f"day {day} outside path of {self.n_days} days")
        return self.epochs[self._epoch_index[day]]

    def block(self, epoch: Epoch) -> np.ndarray:
        """Capitalizations of one epoch stacked as a ``(days, n)`` array."""
        return np.vstack(self.caps[epoch.start:epoch.stop])

    def delistings_on(self, day: int) -> list[Delisting]:
        return [d for d in self.delistings if d.day == day]

    def with_delistings(self, delistings: Iterable[Delisting]) -> "MarketPath":
        return replace(self, delistings=tuple(delistings))


def _as_caps(vec, day):
    arr = np.array(vec, dtype=float).reshape(-1)
    if arr.size == 0:
        raise EmptyDay(f"day {day} has no stocks")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise NonPositiveCap(f"day {day} has a non-positive or non-finite capitalization")
    arr.setflags(write=False)
    return arr


def from_panel(
    caps_by_day: Sequence[Sequence[float]],
    delistings: Iterable[Delisting] | None = None,
    ids: Sequence[Sequence[str]] | None = None,
    labels: Sequence[str] | None = None,
) -> MarketPath:
    """Build a :class:`MarketPath` from per-day capitalization vectors.

    Without ``ids`` every day gets positional identities, so resets are
    exactly the days whose vector length differs from the previous day.
    With ``ids``, a day is also a reset when the identity tuple changes
    (entries and exits on the same day with no net change in dimension).
    """
    if len(caps_by_day) < 2:
        raise BadParameter("a market path needs at least two days")
    caps = tuple(_as_caps(v, j) for j, v in enumerate(caps_by_day))

    if ids is None:
        id_rows = tuple(tuple(str(i) for i in range(len(c))) for c in caps)
    else:
        if len(ids) != len(caps):
            raise BadParameter("ids must have one row per day")
        id_rows = tuple(tuple(str(s) for s in row) for row in ids)
        for j, (row, c) in enumerate(zip(id_rows, caps)):
            if len(row) != len(c):
                raise BadParameter(f"day {j}: {len(row)} ids for {len(c)} caps")
            if len(set(row)) != len(row):
                raise BadParameter(f"day {j}: duplicate stock ids")

    resets = [0]
    for j in range(1, len(caps)):
        if len(caps[j]) != len(caps[j - 1]) or id_rows[j] != id_rows[j - 1]:
            resets.append(j)
    bounds = resets + [len(caps)]
    epochs = tuple(
        Epoch(k=k + 1, n=len(caps[bounds[k]]), start=bounds[k], stop=bounds[k + 1])
        for k in range(len(resets))
    )

    checked = []
    for d in delistings or ():
        sid = str(d.stock_id)
        if not 1 <= d.day < len(caps):
            raise BadParameter(f"delisting day {d.day} outside the path")
        if d.day not in resets:
            raise BadParameter(f"delisting of {sid!r} on day {d.day}, which is not a reset")
        if sid not in id_rows[d.day - 1] or sid in id_rows[d.day]:
            raise BadParameter(f"{sid!r} does not leave the market on day {d.day}")
        if d.dlret is not None and (math.isnan(d.dlret) or d.dlret < -1):
            raise BadParameter(f"delisting return {d.dlret} below -1")
        checked.append(Delisting(int(d.day), sid, None if d.dlret is None else float(d.dlret)))
    checked.sort(key=lambda d: (d.day, id_rows[d.day - 1].index(d.stock_id)))

    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(caps):
            raise BadParameter("labels must have one entry per day")

    totals = np.array([c.sum() for c in caps])
    totals.setflags(write=False)
    epoch_index = np.repeat(np.arange(len(epochs)), [len(e) for e in epochs])
    epoch_index.setflags(write=False)
    return MarketPath(
        caps=caps,
        ids=id_rows,
        resets=tuple(resets),
        epochs=epochs,
        delistings=tuple(checked),
        labels=labels,
        _totals=totals,
        _epoch_index=epoch_index,
    )


def weights_at(path: MarketPath, day: int) -> np.ndarray:
    """Market weights (capitalization over total) on ``day``."""
    c = path.caps[day]
    return c / c.sum()


def sigma(path: MarketPath, k: int) -> float:
    """Total-capitalization ratio across the jump that opens epoch ``k``.

    ``sigma(path, 1) == 1``: the first epoch starts at day 0 with no jump.
    For ``k >= 2`` this is total(start - 1) / total(start).
    """
    if not 1 <= k <= len(path.epochs):
        raise BadParameter(f"epoch {k} does not exist (path has {len(path.epochs)})")
    if k == 1:
        return 1.0
    start = path.epochs[k - 1].start
    return path.total(start - 1) / path.total(start)


def sigma_product(path: MarketPath, i: int, k: int) -> float:
    """Product of ``sigma`` over epochs ``i..k`` inclusive; 1 when ``i > k``."""
    out = 1.0
    for ell in range(i, k + 1):
        out *= sigma(path, ell)
    return out
