"""Rank-based generation and portfolios in the top-m open market.

Weights are ranked in descending order with ties going to the smaller
index.  A family evaluated on ranked weights trades each stock through the
derivative at that stock's rank on the previous day.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import DecompositionSeries, _decompose, portfolio_weights
from .errors import BadParameter, FamilyNotOpenMarketAdmissible
from .generators import GeneratingFamily, TopMSum
from .market import MarketPath

__all__ = [
    "RankView",
    "rank_view",
    "ranked_multiplicative_decomposition",
    "ranked_portfolio_weights",
    "top_m_weights",
    "open_market_decomposition",
]


@dataclass(frozen=True)
class RankView:
    """Ranks of one weight vector.

    Attributes
    ----------
    perm : ndarray of int
        ``perm[i]`` is the 1-based rank of stock ``i``.
    sorted : ndarray
        The weights in descending order.
    counts : ndarray of int
        ``counts[l]`` is how many stocks share the value at rank ``l + 1``
        before ties are broken.
    """

    perm: np.ndarray
    sorted: np.ndarray
    counts: np.ndarray

    @property
    def order(self) -> np.ndarray:
        """Stock indices from largest to smallest."""
        return np.argsort(self.perm, kind="stable")


def _order(x):
    # stable sort on -x: equal values keep index order, so the smaller index ranks higher
    return np.argsort(-x, axis=-1, kind="stable")


def rank_view(x, tie_rule: str = "lexicographic") -> RankView:
    if tie_rule != "lexicographic":
        raise BadParameter(f"only the lexicographic tie rule is supported, not {tie_rule!r}")
    x = np.asarray(x, dtype=float)
    order = _order(x)
    perm = np.empty(len(x), dtype=int)
    perm[order] = np.arange(1, len(x) + 1)
    srt = x[order]
    _, inverse, counts = np.unique(srt, return_inverse=True, return_counts=True)
    return RankView(perm=perm, sorted=srt, counts=counts[inverse])


def _ranked(fam, mu):
    order = _order(mu)
    srt = np.take_along_axis(mu, order, axis=-1)
    theta = np.empty_like(mu)
    np.put_along_axis(theta, order, fam.gradient(srt), axis=-1)
    return fam.value(srt), theta


def ranked_multiplicative_decomposition(
    path: MarketPath, fam: GeneratingFamily, dlret_on: bool = False
) -> DecompositionSeries:
    """Multiplicative decomposition for a family evaluated on ranked weights.

    Works for any family, rank-only or not.  For symmetric families it
    agrees with :func:`dimfgp.engine.multiplicative_decomposition`.
    """
    return _decompose(path, fam, dlret_on, _ranked)


def ranked_portfolio_weights(fam: GeneratingFamily, path: MarketPath, day: int) -> np.ndarray:
    """Weights over the step ending on ``day``, set from the ranks on ``day - 1``."""
    return portfolio_weights(fam, path, day, _evaluate=_ranked)


def top_m_weights(path: MarketPath, day: int, m: int) -> np.ndarray:
    """Capitalization weights within the ``m`` largest stocks on ``day``."""
    if int(m) != m or m < 1:
        raise BadParameter(f"m must be a positive integer, got {m}")
    caps = path.caps[day]
    top = _order(caps)[: int(m)]
    w = np.zeros(len(caps))
    w[top] = caps[top] / caps[top].sum()
    return w


def _check_admissible(path, fam, m):
    if m >= max(e.n for e in path.epochs):
        return
    problems = []
    if not fam.balanced:
        problems.append("it is not balanced")
    if fam.support is None or fam.support > m:
        problems.append(f"it depends on more than the top {m} ranks")
    if problems:
        raise FamilyNotOpenMarketAdmissible(
            f"{fam.spec} cannot trade in the top-{m} open market: " + " and ".join(problems)
        )


def open_market_decomposition(
    path: MarketPath, fam: GeneratingFamily, m: int, dlret_on: bool = False
) -> DecompositionSeries:
    """Log relative wealth of a ranked strategy against the top-m market portfolio.

    Each term is the family's ranked term minus the same term for
    ``top_m_sum(m)``.  The total-market correction cancels, so ``c_tm`` is
    zero and ``log_v`` and ``log_u`` both hold the relative wealth.
    """
    if int(m) != m or m < 1:
        raise BadParameter(f"m must be a positive integer, got {m}")
    m = int(m)
    _check_admissible(path, fam, m)
    own = ranked_multiplicative_decomposition(path, fam, dlret_on)
    base = ranked_multiplicative_decomposition(path, TopMSum(m), dlret_on)
    log_g = own.log_g - base.log_g
    eg = own.eg - base.eg
    c_g = own.c_g - base.c_g
    dlret = own.dlret - base.dlret
    log_u = log_g + eg + c_g + dlret
    return DecompositionSeries(
        days=own.days,
        log_g=log_g,
        eg=eg,
        c_tm=np.zeros_like(log_g),
        c_g=c_g,
        dlret=dlret,
        log_v=log_u,
        log_u=log_u.copy(),
        family=fam.spec,
        baseline=f"top_m:{m}",
    )
