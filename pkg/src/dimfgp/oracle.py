"""Share-level bookkeeping of a trading strategy.

This is deliberately naive: each day it converts target weights to share
counts, marks them to market, and carries wealth across resets by hand.
The decomposition engines are checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, TotalLoss
from .market import MarketPath

__all__ = ["TradingState", "share_oracle", "relative_wealth"]


@dataclass(frozen=True)
class TradingState:
    """Holdings and wealth at the close of ``day``.

    ``shares`` are the holdings carried over the step ending on ``day``, so
    on a reset day they refer to the stocks of the previous day.  On day 0
    the strategy holds one share of every stock (the whole market).
    """

    day: int
    shares: np.ndarray
    wealth: float
    relative_wealth: float


def share_oracle(
    path: MarketPath,
    weights_fn: Callable[[int, TradingState], np.ndarray],
    dlret_on: bool = False,
    atol: float = 1e-9,
) -> list[TradingState]:
    """Run a strategy share by share.

    Parameters
    ----------
    path : MarketPath
    weights_fn : callable
        ``weights_fn(day, state)`` returns the weights held over the step
        ending on ``day``, given the state at the close of ``day - 1``.  They
        must match the dimension of day ``day - 1``.
    dlret_on : bool
        Pay out delisted positions at ``1 + dlret`` times their last value
        instead of at their last value.

    Returns
    -------
    list of TradingState, one per day.
    """
    caps = path.caps
    w0 = path.total(0)
    resets = set(path.resets[1:])
    states = [TradingState(0, np.ones(len(caps[0])), w0, 1.0)]
    for day in range(1, path.n_days):
        prev = states[-1]
        prices = caps[day - 1]
        pi = np.asarray(weights_fn(day, prev), dtype=float)
        if pi.shape != prices.shape:
            raise DimensionMismatch(f"day {day}: got {pi.shape[0]} weights for {len(prices)} stocks")
        if abs(pi.sum() - 1.0) > atol:
            raise ValueError(f"day {day}: weights sum to {pi.sum()}, not 1")
        shares = pi * prev.wealth / prices

        if day not in resets:
            wealth = float(shares @ caps[day])
        else:
            # prices frozen over the jump; exits paid at their last value
            wealth = float(shares @ prices)
            if dlret_on:
                old_ids = path.ids[day - 1]
                for d in path.delistings_on(day):
                    if d.dlret is not None:
                        i = old_ids.index(d.stock_id)
                        wealth += shares[i] * prices[i] * d.dlret
            if wealth <= 0:
                raise TotalLoss(f"wealth wiped out by delistings on day {day}")
        states.append(TradingState(day, shares, wealth, wealth / path.total(day)))
    return states


def relative_wealth(states) -> np.ndarray:
    return np.array([s.relative_wealth for s in states])
