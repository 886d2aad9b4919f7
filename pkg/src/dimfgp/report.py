"""Series CSV files and stacked decomposition plots."""

from __future__ import annotations

import csv
import os

import numpy as np

from .engine import SERIES_COLUMNS, DecompositionSeries
from .errors import MalformedRow

__all__ = ["write_series", "read_series", "plot_decomposition", "COLOURS"]

COLOURS = {
    "log_g": "green",
    "eg": "blue",
    "c_tm": "gold",
    "c_g": "orange",
    "dlret": "red",
    "log_v": "black",
    "log_u": "purple",
}
LABELS = {
    "log_g": "log G",
    "eg": "excess growth",
    "c_tm": "total-market correction",
    "c_g": "generator correction",
    "dlret": "delisting returns",
    "log_v": "log V (vs total market)",
    "log_u": "log U (vs self-financing market)",
}
# drawn twice (solid and dashed) when the delisting policy matters
POLICY_SENSITIVE = ("dlret", "log_v", "log_u")


def write_series(series: DecompositionSeries, dest) -> None:
    """Write one row per day; floats keep all 17 significant digits."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            return write_series(series, fh)
    header = ["day", *SERIES_COLUMNS]
    if series.baseline:
        header.append("baseline")
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(header)
    cols = [series.column(c) for c in SERIES_COLUMNS]
    for j, day in enumerate(series.days):
        row = [int(day), *(repr(float(c[j])) for c in cols)]
        if series.baseline:
            row.append(series.baseline)
        w.writerow(row)


def read_series(source, family: str = "") -> DecompositionSeries:
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_series(fh, family)
    reader = csv.reader(source)
    header = next(reader, None)
    expected = ["day", *SERIES_COLUMNS]
    if header is None or header[: len(expected)] != expected:
        raise MalformedRow(f"not a series file: header {header}", 1)
    has_baseline = len(header) > len(expected)
    rows = list(reader)
    try:
        data = np.array([[float(x) for x in r[: len(expected)]] for r in rows], dtype=float)
    except ValueError as exc:
        raise MalformedRow(str(exc)) from None
    data = data.reshape(len(rows), len(expected))
    baseline = rows[0][-1] if has_baseline and rows else None
    fields = {name: data[:, i + 1] for i, name in enumerate(SERIES_COLUMNS)}
    return DecompositionSeries(
        days=data[:, 0].astype(int), family=family, baseline=baseline, **fields
    )


def plot_decomposition(series, dest, optimistic=None, title=None, x=None):
    """Save the seven decomposition lines to ``dest`` (format from suffix, SVG usually).

    Parameters
    ----------
    series : DecompositionSeries
        Drawn solid.  When ``optimistic`` is given this should be the
        conservative run.
    optimistic : DecompositionSeries, optional
        Same strategy with missing delisting returns set to 0; its
        delisting, log V and log U lines are drawn dashed.
    x : array-like, optional
        Horizontal coordinates (defaults to day numbers).
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = series.days if x is None else np.asarray(x)
    rc = {
        "figure.figsize": (7.5, 4.2),
        "axes.linewidth": 0.6,
        "font.size": 9,
        "legend.fontsize": 7,
        "svg.hashsalt": "dimfgp",  # stable ids, so reruns give identical files
    }
    with plt.rc_context(rc):
        fig, ax = plt.subplots()
        for name in SERIES_COLUMNS:
            ax.plot(x, series.column(name), color=COLOURS[name], lw=1.0, label=LABELS[name])
            if optimistic is not None and name in POLICY_SENSITIVE:
                ax.plot(x, optimistic.column(name), color=COLOURS[name], lw=1.0, ls="--")
        if optimistic is not None:
            ax.plot([], [], color="0.4", lw=1.0, ls="--", label="missing delisting returns = 0")
        ax.axhline(0.0, color="0.6", lw=0.5)
        ax.set_xlabel("day")
        ax.set_ylabel("log relative wealth")
        if title:
            ax.set_title(title)
        ax.legend(loc="best", frameon=False, ncol=2)
        fig.tight_layout()
        fig.savefig(dest, metadata={"Date": None})
        plt.close(fig)
