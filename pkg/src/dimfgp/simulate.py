"""Synthetic capitalization paths with births, deaths, splits and mergers.

Between events every stock follows an independent lognormal daily step.
At most one dimensional event happens per day; on an event day the
surviving stocks keep yesterday's capitalization, so the event is the only
thing that moves the total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadParameter, DegenerateConfig
from .market import Delisting, MarketPath, from_panel

__all__ = ["SimConfig", "simulate", "MODELS"]

MODELS = ("birth-death", "split-merge", "combined")

Rate = float | Callable[[int], float]


def _rate(r: Rate, n: int) -> float:
    val = float(r(n)) if callable(r) else float(r)
    if not (val >= 0 and math.isfinite(val)):
        raise BadParameter(f"event rates must be finite and non-negative, got {val} at n={n}")
    return val


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a simulated market.

    ``birth_rate`` and ``death_rate`` are per-day intensities; either may be
    a callable of the current dimension.  An event with intensity ``r``
    fires on a given day with probability ``1 - exp(-r)``.
    """

    model: str = "birth-death"
    horizon: int = 250
    n0: int = 10
    birth_rate: Rate = 0.0
    death_rate: Rate = 0.0
    split_threshold: float = 1.0
    merge_rate: float = 0.0
    vol: float = 0.01
    drift: float = 0.0
    initial_cap: float = 1.0
    entrant_scale: float = 1.0  # entrant cap = scale * median cap
    split_range: tuple[float, float] = (0.3, 0.7)
    dlret_missing_prob: float = 0.0
    seed: int | None = 0
    # shock_fn(rng, n) -> n standard shocks; hook for correlated dynamics
    shock_fn: Callable | None = None

    def validate(self):
        if self.model not in MODELS:
            raise BadParameter(f"model must be one of {MODELS}, got {self.model!r}")
        if self.horizon < 2:
            raise BadParameter("horizon must be at least 2 days")
        if self.n0 < 1:
            raise DegenerateConfig("initial dimension must be at least 1")
        if not self.vol > 0:
            raise BadParameter("volatility must be positive")
        if not 0 < self.split_threshold <= 1:
            raise BadParameter("split threshold must lie in (0, 1]")
        if self.merge_rate < 0:
            raise BadParameter("merge rate must be non-negative")
        if not 0 <= self.dlret_missing_prob <= 1:
            raise BadParameter("dlret_missing_prob must be a probability")
        lo, hi = self.split_range
        if not 0 < lo <= hi < 1:
            raise BadParameter("split proportions must lie inside (0, 1)")
        if not (self.initial_cap > 0 and self.entrant_scale > 0):
            raise BadParameter("capitalizations must be positive")
        return self


def simulate(config: SimConfig) -> MarketPath:
    """Draw one market path; identical configs give identical paths."""
    cfg = config.validate()
    rng = np.random.default_rng(cfg.seed)
    splits = cfg.model in ("split-merge", "combined")
    births = cfg.model in ("birth-death", "combined")

    caps = np.full(cfg.n0, float(cfg.initial_cap))
    ids = [str(i) for i in range(cfg.n0)]
    next_id = cfg.n0
    caps_by_day = [caps.copy()]
    ids_by_day = [tuple(ids)]
    delistings = []

    for day in range(1, cfg.horizon):
        n = len(caps)
        event = None
        if splits and caps.max() / caps.sum() > cfg.split_threshold:
            event = "split"
        else:
            lam = _rate(cfg.birth_rate, n) if births else 0.0
            mu = _rate(cfg.death_rate, n) if births else 0.0
            nu = cfg.merge_rate if (splits and n >= 3) else 0.0
            total = lam + mu + nu
            if total > 0 and rng.random() < -math.expm1(-total):
                event = rng.choice(["birth", "death", "merge"], p=[lam / total, mu / total, nu / total])

        if event is None:
            z = cfg.shock_fn(rng, n) if cfg.shock_fn else rng.standard_normal(n)
            caps = caps * np.exp(cfg.drift + cfg.vol * np.asarray(z, dtype=float))
        elif event == "split":
            i = int(np.argmax(caps))
            rho = rng.uniform(*cfg.split_range)
            parent = caps[i]
            caps = np.append(caps, (1.0 - rho) * parent)
            caps[i] = rho * parent
            ids.append(str(next_id))
            next_id += 1
        elif event == "birth":
            caps = np.append(caps, cfg.entrant_scale * np.median(caps))
            ids.append(str(next_id))
            next_id += 1
        elif event == "death":
            if n == 1:
                raise DegenerateConfig(f"the last stock would die on day {day}")
            i = int(rng.integers(n))
            dlret = None if rng.random() < cfg.dlret_missing_prob else 0.0
            delistings.append(Delisting(day, ids[i], dlret))
            caps = np.delete(caps, i)
            del ids[i]
        else:  # merge two stocks other than the largest
            others = np.delete(np.arange(n), int(np.argmax(caps)))
            a, b = sorted(rng.choice(others, size=2, replace=False))
            caps = caps.copy()
            caps[a] += caps[b]
            delistings.append(Delisting(day, ids[b], 0.0))
            caps = np.delete(caps, b)
            del ids[b]

        caps_by_day.append(caps.copy())
        ids_by_day.append(tuple(ids))

    return from_panel(caps_by_day, delistings=delistings, ids=ids_by_day)
