"""Additive and multiplicative functional generation across dimension changes.

Within an epoch the generated strategy trades on the day-steps
``(q - 1, q]``.  The jump into a new epoch is the day-step
``(start - 1, start]``: prices are frozen over it, wealth carries across
unchanged (less any delisting losses), and the new-epoch weights take over
from the jump day on.  All cumulative series start at zero on day 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonPositiveG, RankOnlyFamily, TotalLoss
from .generators import GeneratingFamily, Market
from .market import MarketPath, sigma

__all__ = [
    "DecompositionSeries",
    "AdditiveSeries",
    "multiplicative_decomposition",
    "additive_decomposition",
    "portfolio_weights",
    "additive_portfolio_weights",
    "self_financing_market",
]

# evaluate(fam, mu) -> (G, theta): generator values (days,) and the integrand
# (days, n) applied over the step that starts on each day.
Evaluator = Callable[[GeneratingFamily, np.ndarray], "tuple[np.ndarray, np.ndarray]"]

SERIES_COLUMNS = ("log_g", "eg", "c_tm", "c_g", "dlret", "log_v", "log_u")


@dataclass
class DecompositionSeries:
    """Per-day terms of the log relative wealth of a generated strategy.

    ``log_v = log_g + eg + c_tm + c_g + dlret`` and ``log_u = log_v - c_tm``.
    """

    days: np.ndarray
    log_g: np.ndarray
    eg: np.ndarray
    c_tm: np.ndarray
    c_g: np.ndarray
    dlret: np.ndarray
    log_v: np.ndarray
    log_u: np.ndarray
    family: str = ""
    baseline: str | None = None

    def __len__(self):
        return len(self.days)

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def identity_residual(self) -> float:
        """Largest violation of the two defining identities."""
        total = self.log_g + self.eg + self.c_tm + self.c_g + self.dlret
        r1 = np.max(np.abs(self.log_v - total))
        r2 = np.max(np.abs(self.log_u - (self.log_v - self.c_tm)))
        return float(max(r1, r2))


@dataclass
class AdditiveSeries:
    days: np.ndarray
    g: np.ndarray
    eg_add: np.ndarray
    c_add: np.ndarray
    v: np.ndarray
    u: np.ndarray = field(default=None)
    family: str = ""

    def identity_residual(self) -> float:
        return float(np.max(np.abs(self.v - (self.g + self.eg_add + self.c_add))))


def _plain(fam, mu):
    return fam.value_and_gradient(mu)


def _block_weights(path: MarketPath, epoch) -> np.ndarray:
    block = path.block(epoch)
    return block / block.sum(axis=1, keepdims=True)


def _checked(G, fam, epoch):
    G = np.asarray(G, dtype=float)
    if np.any(~(G > 0)):
        raise NonPositiveG(f"{fam.spec} is not positive on epoch {epoch.k} (dimension {epoch.n})")
    return G


def _weights_from(G, theta, mu, balanced=False):
    """Multiplicative portfolio from generator value and integrand at ``mu``.

    For balanced families ``G = theta . mu`` and this is ``theta * mu / G``;
    that form is used directly so zero derivatives give exactly zero weight.
    """
    if balanced:
        return theta * mu / G
    return mu * (theta + G - np.dot(theta, mu)) / G


def _dlret_increment(path, day, pi_prev, ids_prev):
    gain = 0.0
    for d in path.delistings_on(day):
        if d.dlret is None:
            continue
        gain += pi_prev[ids_prev.index(d.stock_id)] * d.dlret
    if 1.0 + gain <= 0.0:
        raise TotalLoss(f"delistings on day {day} wipe out the portfolio")
    return math.log1p(gain)


def _decompose(path: MarketPath, fam: GeneratingFamily, dlret_on: bool, evaluate: Evaluator):
    J = path.n_days
    logG = np.empty(J)
    eg_inc = np.zeros(J)
    ctm_inc = np.zeros(J)
    cg_inc = np.zeros(J)
    dl_inc = np.zeros(J)

    prev = None  # (G, theta, mu, family) on the last day of the previous epoch
    for epoch in path.epochs:
        f = fam.for_epoch(epoch.k)
        mu = _block_weights(path, epoch)
        G, theta = evaluate(f, mu)
        G = _checked(G, f, epoch)
        s, e = epoch.start, epoch.stop
        logG[s:e] = np.log(G)

        if len(epoch) > 1:
            step = np.einsum("ij,ij->i", theta[:-1], mu[1:] - mu[:-1])
            ratio = (G[:-1] - G[1:] + step) / G[1:]
            if np.any(ratio <= -1.0):
                raise NonPositiveG(f"{f.spec}: generated wealth reached zero in epoch {epoch.k}")
            eg_inc[s + 1 : e] = np.log1p(ratio)

        if prev is not None:
            G_old, theta_old, mu_old, f_old = prev
            ctm_inc[s] = math.log(path.total(s - 1)) - math.log(path.total(s))
            cg_inc[s] = math.log(G_old) - math.log(G[0])
            if dlret_on:
                pi_old = _weights_from(G_old, theta_old, mu_old, f_old.balanced)
                dl_inc[s] = _dlret_increment(path, s, pi_old, path.ids[s - 1])
        prev = (G[-1], theta[-1], mu[-1], f)

    log_g = logG - logG[0]
    eg = np.cumsum(eg_inc)
    c_tm = np.cumsum(ctm_inc)
    c_g = np.cumsum(cg_inc)
    dlret = np.cumsum(dl_inc)
    log_v = log_g + eg + c_tm + c_g + dlret
    return DecompositionSeries(
        days=np.arange(J),
        log_g=log_g,
        eg=eg,
        c_tm=c_tm,
        c_g=c_g,
        dlret=dlret,
        log_v=log_v,
        log_u=log_v - c_tm,
        family=fam.spec,
    )


def multiplicative_decomposition(
    path: MarketPath, fam: GeneratingFamily, dlret_on: bool = False
) -> DecompositionSeries:
    """Decompose the log relative wealth of the multiplicatively generated strategy.

    Parameters
    ----------
    path : MarketPath
    fam : GeneratingFamily
        Must not be rank-only; see :mod:`dimfgp.ranks` for those.
    dlret_on : bool
        Charge delisting returns to the positions held in delisted stocks.
        Missing returns contribute nothing; resolve them first with
        :func:`dimfgp.ingest.apply_policy`.

    Returns
    -------
    DecompositionSeries
        Generating-function term, excess growth, the two jump corrections,
        the delisting term, and log relative wealth against the total market
        (``log_v``) and the self-financing market portfolio (``log_u``).
    """
    if fam.rank_only:
        raise RankOnlyFamily(f"{fam.spec} is rank-only; use the rank engine")
    return _decompose(path, fam, dlret_on, _plain)


def self_financing_market(path: MarketPath) -> DecompositionSeries:
    """Relative wealth of the self-financing market portfolio (log_v = C_TM).

    Built straight from the total-capitalization ratios, so every other term
    is exactly zero.  The market family run through
    :func:`multiplicative_decomposition` agrees up to rounding.
    """
    J = path.n_days
    inc = np.zeros(J)
    for ep in path.epochs[1:]:
        inc[ep.start] = math.log(path.total(ep.start - 1)) - math.log(path.total(ep.start))
    c_tm = np.cumsum(inc)
    zero = np.zeros(J)
    return DecompositionSeries(
        days=np.arange(J),
        log_g=zero,
        eg=zero.copy(),
        c_tm=c_tm,
        c_g=zero.copy(),
        dlret=zero.copy(),
        log_v=c_tm.copy(),
        log_u=zero.copy(),
        family=Market().spec,
    )


def _step_inputs(fam, path, day, evaluate):
    if not 1 <= day < path.n_days:
        raise IndexError(f"weights are defined for days 1..{path.n_days - 1}, got {day}")
    epoch = path.epoch_of(day - 1)
    f = fam.for_epoch(epoch.k)
    mu = path.caps[day - 1] / path.total(day - 1)
    G, theta = evaluate(f, mu)
    if not G > 0:
        raise NonPositiveG(f"{f.spec} is not positive on day {day - 1}")
    return float(G), theta, mu, f


def portfolio_weights(
    fam: GeneratingFamily, path: MarketPath, day: int, _evaluate: Evaluator = _plain
) -> np.ndarray:
    """Weights the multiplicative strategy holds over the step ending on ``day``.

    They are set from the previous day's market weights, so on a reset day
    the vector has the dimension of the epoch being left.
    """
    if fam.rank_only and _evaluate is _plain:
        raise RankOnlyFamily(f"{fam.spec} is rank-only; use the rank engine")
    G, theta, mu, f = _step_inputs(fam, path, day, _evaluate)
    return _weights_from(G, theta, mu, f.balanced)


def additive_portfolio_weights(
    fam: GeneratingFamily, path: MarketPath, day: int, relative_wealth: float
) -> np.ndarray:
    """Weights of the additively generated strategy over the step ending on ``day``.

    ``relative_wealth`` is the strategy's own relative wealth on ``day - 1``
    (normalized to 1 on day 0); additive weights depend on it.
    """
    if fam.rank_only:
        raise RankOnlyFamily(f"{fam.spec} is rank-only; use the rank engine")
    _, grad, mu, _ = _step_inputs(fam, path, day, _plain)
    theta = grad / _initial_value(fam, path)
    return mu * (theta - np.dot(theta, mu) + relative_wealth) / relative_wealth


def _initial_value(fam, path):
    g0 = float(fam.for_epoch(1).value(path.caps[0] / path.total(0)))
    if not g0 > 0:
        raise NonPositiveG(f"{fam.spec} is not positive on day 0")
    return g0


def additive_decomposition(path: MarketPath, fam: GeneratingFamily) -> AdditiveSeries:
    """Relative wealth of the additively generated strategy and its three terms.

    The generator is normalized so that it equals 1 on day 0.  At each jump
    the excess growth and correction accrued so far are rescaled by the
    total-capitalization ratio, and the correction picks up
    ``sigma * G_old(before) - G_new(after)``.  ``u`` is the relative wealth
    against the self-financing market portfolio; it has no decomposition.
    """
    if fam.rank_only:
        raise RankOnlyFamily(f"{fam.spec} is rank-only; use the rank engine")
    J = path.n_days
    scale = _initial_value(fam, path)
    g = np.empty(J)
    eg = np.empty(J)
    c = np.empty(J)
    sf_market = np.empty(J)

    carried_eg = 0.0
    carried_c = 0.0
    sf = 1.0
    last_gamma = 0.0
    for epoch in path.epochs:
        f = fam.for_epoch(epoch.k)
        mu = _block_weights(path, epoch)
        G = _checked(f.value(mu), f, epoch) / scale
        grad = f.gradient(mu) / scale
        s, e = epoch.start, epoch.stop

        if epoch.k > 1:
            sig = sigma(path, epoch.k)
            sf *= sig
            carried_eg = sig * (carried_eg + last_gamma)
            carried_c = sig * carried_c + sig * g[s - 1] - G[0]

        gamma = np.zeros(len(epoch))
        if len(epoch) > 1:
            breg = G[1:] - G[:-1] - np.einsum("ij,ij->i", grad[:-1], mu[1:] - mu[:-1])
            gamma[1:] = np.cumsum(-breg)
        g[s:e] = G
        eg[s:e] = carried_eg + gamma
        c[s:e] = carried_c
        sf_market[s:e] = sf
        last_gamma = gamma[-1]

    v = g + eg + c
    return AdditiveSeries(
        days=np.arange(J), g=g, eg_add=eg, c_add=c, v=v, u=v / sf_market, family=fam.spec
    )
