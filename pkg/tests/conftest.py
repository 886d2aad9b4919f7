import functools
import math

import numpy as np
import pytest

from dimfgp import SimConfig, from_panel, simulate

# Acceptance market: 100 stocks, 2000 days, births/deaths/splits/mergers.
# Every seed 0..19 gives 62-93 resets.
ACCEPTANCE_SIM = dict(
    model="combined",
    horizon=2000,
    n0=100,
    birth_rate=0.015,
    death_rate=0.015,
    split_threshold=0.05,
    merge_rate=0.005,
    vol=0.02,
    dlret_missing_prob=0.5,
)
SEEDS = range(20)


@functools.lru_cache(maxsize=None)
def sim_path(seed, **overrides):
    return simulate(SimConfig(seed=seed, **{**ACCEPTANCE_SIM, **overrides}))


@functools.lru_cache(maxsize=None)
def small_path(seed):
    """A quick 30-stock market with plenty of resets, for unit tests."""
    return simulate(
        SimConfig(
            model="combined",
            horizon=300,
            n0=30,
            birth_rate=0.05,
            death_rate=0.05,
            split_threshold=0.12,
            merge_rate=0.02,
            vol=0.03,
            dlret_missing_prob=0.5,
            seed=seed,
        )
    )


@pytest.fixture
def p0():
    # two stocks, an entrant on day 2, then a day of trading
    return from_panel([(2.0, 2.0), (3.0, 1.0), (3.0, 1.0, 1.0), (4.0, 2.0, 2.0)])


@pytest.fixture
def log08():
    return math.log(0.8)


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
