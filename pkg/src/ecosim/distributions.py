"""Integer distributions driving request shape and agent creation.

A DistributionSpec describes how request lengths, task sizes and agent
description sizes are drawn.  Three kinds are supported on an inclusive
integer support [lo, hi]:

* ``uniform``   every value equiprobable
* ``gaussian``  N(mu, sigma) rounded half-up and clamped to the support
* ``powerlaw``  P(v) proportional to v**-alpha

``expected_probabilities`` returns the exact per-value probabilities of
the corresponding sampler (clamping mass included), which is what the
chi-squared reports test observed histograms against.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .errors import InvalidInputError
from .rng import DeterministicRng

KINDS = ("uniform", "gaussian", "powerlaw")


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    lo: int
    hi: int
    mu: Optional[float] = None
    sigma: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown distribution kind {self.kind!r}")
        if not isinstance(self.lo, int) or not isinstance(self.hi, int):
            raise InvalidInputError("support bounds must be integers")
        if self.lo < 1:
            raise InvalidInputError("support must start at >= 1")
        if self.lo > self.hi:
            raise InvalidInputError("lo must not exceed hi")
        if self.kind == "gaussian":
            if self.mu is None or self.sigma is None:
                raise InvalidInputError("gaussian needs mu and sigma")
            if self.sigma <= 0:
                raise InvalidInputError("sigma must be positive")
        if self.kind == "powerlaw":
            if self.alpha is None:
                raise InvalidInputError("powerlaw needs alpha")
            if self.alpha <= 0:
                raise InvalidInputError("alpha must be positive")

    @property
    def support_size(self) -> int:
        return self.hi - self.lo + 1

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "lo": self.lo, "hi": self.hi}
        if self.kind == "gaussian":
            out["mu"] = self.mu
            out["sigma"] = self.sigma
        if self.kind == "powerlaw":
            out["alpha"] = self.alpha
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        if not isinstance(data, dict):
            raise InvalidInputError("distribution spec must be an object")
        allowed = {"kind", "lo", "hi", "mu", "sigma", "alpha"}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidInputError(
                f"unknown distribution keys: {sorted(unknown)}")
        if "kind" not in data or "lo" not in data or "hi" not in data:
            raise InvalidInputError("distribution spec needs kind, lo, hi")
        return cls(kind=data["kind"], lo=data["lo"], hi=data["hi"],
                   mu=data.get("mu"), sigma=data.get("sigma"),
                   alpha=data.get("alpha"))


def uniform(lo: int, hi: int) -> DistributionSpec:
    return DistributionSpec("uniform", lo, hi)


def gaussian(lo: int, hi: int, mu: float = None, sigma: float = None) -> DistributionSpec:
    """Gaussian spec; mu defaults to the midpoint, sigma to range/6."""
    if mu is None:
        mu = (lo + hi) / 2.0
    if sigma is None:
        sigma = (hi - lo) / 6.0
    return DistributionSpec("gaussian", lo, hi, mu=mu, sigma=sigma)


def powerlaw(lo: int, hi: int, alpha: float = 2.0) -> DistributionSpec:
    return DistributionSpec("powerlaw", lo, hi, alpha=alpha)


@lru_cache(maxsize=None)
def _powerlaw_cdf(lo: int, hi: int, alpha: float) -> tuple[float, ...]:
    weights = [v ** -alpha for v in range(lo, hi + 1)]
    total = sum(weights)
    acc, cdf = 0.0, []
    for w in weights:
        acc += w
        cdf.append(acc / total)
    cdf[-1] = 1.0
    return tuple(cdf)


def sample(spec: DistributionSpec, rng: DeterministicRng) -> int:
    """Draw one integer from spec's support."""
    if spec.kind == "uniform":
        return spec.lo + rng.randbelow(spec.support_size)
    if spec.kind == "gaussian":
        v = math.floor(rng.gauss(spec.mu, spec.sigma) + 0.5)  # round half-up
        return min(spec.hi, max(spec.lo, v))
    # powerlaw: inverse-CDF lookup on the precomputed table
    cdf = _powerlaw_cdf(spec.lo, spec.hi, spec.alpha)
    return spec.lo + bisect.bisect_right(cdf, rng.random())


def _phi(x: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def expected_probabilities(spec: DistributionSpec) -> list[float]:
    """Exact sampler probabilities for each value lo..hi (sums to 1).

    For the gaussian kind the bin for value v covers the real interval
    [v-0.5, v+0.5) under round-half-up, and the boundary bins absorb the
    tails that clamping folds back into the support.
    """
    n = spec.support_size
    if spec.kind == "uniform":
        return [1.0 / n] * n
    if spec.kind == "powerlaw":
        weights = [v ** -spec.alpha for v in range(spec.lo, spec.hi + 1)]
        total = sum(weights)
        return [w / total for w in weights]
    probs = []
    for v in range(spec.lo, spec.hi + 1):
        lo_edge = -math.inf if v == spec.lo else (v - 0.5 - spec.mu) / spec.sigma
        hi_edge = math.inf if v == spec.hi else (v + 0.5 - spec.mu) / spec.sigma
        lo_cdf = 0.0 if lo_edge == -math.inf else _phi(lo_edge)
        hi_cdf = 1.0 if hi_edge == math.inf else _phi(hi_edge)
        probs.append(hi_cdf - lo_cdf)
    return probs
