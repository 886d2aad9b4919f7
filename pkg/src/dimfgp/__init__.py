"""Functionally generated portfolios in markets whose number of stocks changes."""

__version__ = "0.1.0"

from .engine import (
    AdditiveSeries,
    DecompositionSeries,
    additive_decomposition,
    additive_portfolio_weights,
    multiplicative_decomposition,
    portfolio_weights,
    self_financing_market,
)
from .errors import *  # noqa: F401,F403
from .generators import (
    DiversityTopM,
    Diversity,
    Entropy,
    Equal,
    GeneratingFamily,
    Market,
    PerEpochFamily,
    TopMSum,
    balance_residual,
    bregman,
    builtin,
    parse_family,
)
from .ingest import DlretPolicy, apply_policy, load_csv, write_csv
from .market import Delisting, Epoch, MarketPath, from_panel, sigma, sigma_product, weights_at
from .oracle import TradingState, relative_wealth, share_oracle
from .ranks import (
    RankView,
    open_market_decomposition,
    rank_view,
    ranked_multiplicative_decomposition,
    ranked_portfolio_weights,
    top_m_weights,
)
from .report import plot_decomposition, read_series, write_series
from .simulate import SimConfig, simulate
