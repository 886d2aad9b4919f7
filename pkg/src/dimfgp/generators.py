"""Dimension-indexed families of portfolio generating functions.

Every family evaluates on the last axis of its input, so a single call can
handle one weight vector of shape ``(n,)`` or a whole epoch of shape
``(days, n)``.  The dimension is read off the input.

Rank-only families (``top_m_sum`` and ``diversity_top_m``) expect their input
already sorted in descending order; the unranked engine refuses them.
"""

from __future__ import annotations

import re
from typing import Mapping

import numpy as np

from .errors import BadParameter, DimensionMismatch, OutsideDomain

__all__ = [
    "GeneratingFamily",
    "Market",
    "Diversity",
    "Equal",
    "Entropy",
    "TopMSum",
    "DiversityTopM",
    "PerEpochFamily",
    "builtin",
    "parse_family",
    "bregman",
    "balance_residual",
]


def _positive(x):
    x = np.asarray(x, dtype=float)
    if not x.min() > 0:
        raise OutsideDomain("generating function evaluated at a non-positive weight")
    return x


class GeneratingFamily:
    """Base class: ``value`` and ``gradient`` of ``G^{n}`` for every dimension n."""

    name = "family"
    symmetric = False
    concave = False
    balanced = False
    rank_only = False
    #: only the first ``support`` sorted coordinates matter (None: all of them)
    support: int | None = None

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def value_and_gradient(self, x):
        return self.value(x), self.gradient(x)

    @property
    def params(self) -> dict:
        return {}

    def for_epoch(self, k: int) -> "GeneratingFamily":
        return self

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        args = ",".join(f"{key}={val:g}" for key, val in self.params.items())
        return f"{self.name}:{args}"

    @property
    def slug(self) -> str:
        """Filesystem-friendly label, e.g. ``diversity_p0.25``."""
        parts = [self.name] + [f"{k}{v:g}" for k, v in self.params.items()]
        return "_".join(parts)

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec}>"

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((type(self).__name__, tuple(self.params.items())))


class Market(GeneratingFamily):
    """G(x) = sum(x); generates the self-financing market portfolio."""

    name = "market"
    symmetric = concave = balanced = True

    def value(self, x):
        return np.sum(x, axis=-1)

    def gradient(self, x):
        return np.ones_like(np.asarray(x, dtype=float))


class Diversity(GeneratingFamily):
    name = "diversity"
    symmetric = concave = balanced = True

    def __init__(self, p: float):
        if not 0 < p <= 1:
            raise BadParameter(f"diversity parameter p must lie in (0, 1], got {p}")
        self.p = float(p)

    @property
    def params(self):
        return {"p": self.p}

    def value(self, x):
        x = _positive(x)
        return np.sum(x**self.p, axis=-1) ** (1.0 / self.p)

    def gradient(self, x):
        x = _positive(x)
        xp = x**self.p
        s = xp.sum(axis=-1, keepdims=True)
        return xp / x * s ** (1.0 / self.p - 1.0)

    def value_and_gradient(self, x):
        x = _positive(x)
        xp = x**self.p
        s = xp.sum(axis=-1, keepdims=True)
        g = s ** (1.0 / self.p)
        return g[..., 0], xp / x * (g / s)


class Equal(GeneratingFamily):
    """Geometric mean of the weights; generates the equal-weighted portfolio."""

    name = "equal"
    symmetric = concave = balanced = True

    def value(self, x):
        x = _positive(x)
        return np.exp(np.mean(np.log(x), axis=-1))

    def gradient(self, x):
        x = _positive(x)
        g = np.exp(np.mean(np.log(x), axis=-1, keepdims=True))
        return g / (x.shape[-1] * x)

    def value_and_gradient(self, x):
        x = _positive(x)
        g = np.exp(np.mean(np.log(x), axis=-1, keepdims=True))
        return g[..., 0], g / (x.shape[-1] * x)


class Entropy(GeneratingFamily):
    name = "entropy"
    symmetric = concave = True
    balanced = False

    def value(self, x):
        x = _positive(x)
        return -np.sum(x * np.log(x), axis=-1)

    def gradient(self, x):
        x = _positive(x)
        return -np.log(x) - 1.0

    def value_and_gradient(self, x):
        x = _positive(x)
        lx = np.log(x)
        return -np.sum(x * lx, axis=-1), -lx - 1.0


class TopMSum(GeneratingFamily):
    """Sum of the ``m`` largest weights; input must be sorted descending."""

    name = "top_m"
    concave = balanced = True
    rank_only = True

    def __init__(self, m: int):
        if int(m) != m or m < 1:
            raise BadParameter(f"top_m needs an integer m >= 1, got {m}")
        self.m = int(m)
        self.support = self.m

    @property
    def params(self):
        return {"m": self.m}

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.sum(x[..., : self.m], axis=-1)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[..., : self.m] = 1.0
        return g


class DiversityTopM(GeneratingFamily):
    """Diversity function of the ``m`` largest weights (sorted input)."""

    name = "diversity_top_m"
    concave = balanced = True
    rank_only = True

    def __init__(self, p: float, m: int):
        if not 0 < p <= 1:
            raise BadParameter(f"diversity parameter p must lie in (0, 1], got {p}")
        if int(m) != m or m < 1:
            raise BadParameter(f"diversity_top_m needs an integer m >= 1, got {m}")
        self.p = float(p)
        self.m = int(m)
        self.support = self.m

    @property
    def params(self):
        return {"p": self.p, "m": self.m}

    def value(self, x):
        head = _positive(np.asarray(x, dtype=float)[..., : self.m])
        return np.sum(head**self.p, axis=-1) ** (1.0 / self.p)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        head = _positive(x[..., : self.m])
        s = np.sum(head**self.p, axis=-1, keepdims=True)
        g = np.zeros_like(x)
        g[..., : self.m] = head ** (self.p - 1.0) * s ** (1.0 / self.p - 1.0)
        return g


class PerEpochFamily(GeneratingFamily):
    """Use a different family in selected epochs, ``default`` elsewhere.

    The engine asks every family for ``for_epoch(k)``; ordinary families
    return themselves.
    """

    def __init__(self, default: GeneratingFamily, overrides: Mapping[int, GeneratingFamily]):
        self.default = default
        self.overrides = dict(overrides)
        members = [default, *self.overrides.values()]
        self.name = "per_epoch"
        self.symmetric = all(f.symmetric for f in members)
        self.concave = all(f.concave for f in members)
        self.balanced = all(f.balanced for f in members)
        self.rank_only = any(f.rank_only for f in members)
        supports = [f.support for f in members]
        self.support = None if None in supports else max(supports)

    def for_epoch(self, k):
        return self.overrides.get(k, self.default)

    def value(self, x):
        return self.default.value(x)

    def gradient(self, x):
        return self.default.gradient(x)

    def value_and_gradient(self, x):
        return self.default.value_and_gradient(x)

    @property
    def spec(self):
        return f"per_epoch({self.default.spec};{len(self.overrides)} overrides)"

    @property
    def slug(self):
        return f"per_epoch_{self.default.slug}"

    def __eq__(self, other):
        return (
            isinstance(other, PerEpochFamily)
            and self.default == other.default
            and self.overrides == other.overrides
        )

    def __hash__(self):
        return hash((self.default, tuple(sorted(self.overrides))))


_BUILDERS = {
    "market": (Market, ()),
    "equal": (Equal, ()),
    "entropy": (Entropy, ()),
    "diversity": (Diversity, ("p",)),
    "top_m": (TopMSum, ("m",)),
    "top_m_sum": (TopMSum, ("m",)),
    "diversity_top_m": (DiversityTopM, ("p", "m")),
}


def builtin(name: str, **params) -> GeneratingFamily:
    """Construct a shipped family by name, e.g. ``builtin("diversity", p=0.5)``."""
    try:
        cls, expected = _BUILDERS[name]
    except KeyError:
        raise BadParameter(f"unknown generating family {name!r}") from None
    missing = [k for k in expected if k not in params]
    extra = [k for k in params if k not in expected]
    if missing or extra:
        raise BadParameter(
            f"family {name!r} takes parameters {list(expected)}; got {sorted(params)}"
        )
    return cls(**params)


_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?::\s*(.*))?$")


def parse_family(spec: str) -> GeneratingFamily:
    """Parse ``name[:key=value[,key=value...]]``, e.g. ``diversity:p=0.25``."""
    match = _SPEC_RE.match(spec)
    if not match:
        raise BadParameter(f"cannot parse family spec {spec!r}")
    name, rest = match.groups()
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, raw = item.partition("=")
            if not sep:
                raise BadParameter(f"bad parameter {item!r} in family spec {spec!r}")
            try:
                val = float(raw)
            except ValueError:
                raise BadParameter(f"bad value {raw!r} in family spec {spec!r}") from None
            params[key.strip()] = int(val) if key.strip() == "m" and val == int(val) else val
    return builtin(name, **params)


def bregman(fam: GeneratingFamily, x, y) -> float:
    """G(x) - G(y) - <grad G(y), x - y>; nonpositive for concave G."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"cannot compare weights of shapes {x.shape} and {y.shape}")
    return float(fam.value(x) - fam.value(y) - np.dot(fam.gradient(y), x - y))


def balance_residual(fam: GeneratingFamily, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(x, fam.gradient(x)) - fam.value(x))
