"""Closed-form succession rules: posterior means after an observation.

Each rule computes the mean of an inverted channel in closed form:

* Beta prior with a binomial channel (counts of heads),
* Dirichlet prior with a multinomial channel (multiset draws),
* Dirichlet prior with the bivariate binomial channel (heads pairs),
* Poisson prior on the toss count with a binomial or bivariate binomial
  channel (imperfect detection of emitted particles).

Beta and Dirichlet parameters are restricted to positive integers, which
keeps every result an exact rational.  The Poisson rules are float valued
and each comes with :func:`truncated_dagger_mean`, an independent
brute-force check that inverts the channel over a truncated toss range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .binomials import Coin, fiber
from .kernel import (
    DegenerateObservation,
    Dist,
    Multiset,
    OutOfRange,
    WrongSpace,
    flrn,
)

TWO_BY_TWO = ((0, 0), (0, 1), (1, 0), (1, 1))

POISSON_TAIL_TOL = 1e-9
_DEGENERATE_FLOOR = 1e-300


# ---------------------------------------------------------------------------
# Beta / binomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BetaParams:
    """Positive-integer Beta parameters (successes + 1, failures + 1)."""

    alpha: int
    beta: int

    def __post_init__(self):
        for name, v in (("alpha", self.alpha), ("beta", self.beta)):
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise OutOfRange(f"{name} must be a positive integer, got {v!r}")

    def mean(self) -> Fraction:
        return Fraction(self.alpha, self.alpha + self.beta)


def beta_update(params: BetaParams, tosses: int, heads_seen: int) -> BetaParams:
    """Conjugate update after seeing ``heads_seen`` heads in ``tosses``."""
    if not 0 <= heads_seen <= tosses:
        raise OutOfRange(f"need 0 <= heads <= tosses, got {heads_seen}/{tosses}")
    return BetaParams(params.alpha + heads_seen, params.beta + tosses - heads_seen)


def beta_succession_mean(params: BetaParams, tosses: int, heads_seen: int) -> Fraction:
    """Posterior mean bias: ``(alpha + n) / (alpha + beta + K)``."""
    return beta_update(params, tosses, heads_seen).mean()


# ---------------------------------------------------------------------------
# Dirichlet / multinomial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletParams:
    """A full-support multiset of pseudo-counts over its base set."""

    psi: Multiset

    def __post_init__(self):
        if not self.psi:
            raise OutOfRange("Dirichlet parameter multiset must be non-empty")

    def base(self) -> tuple:
        return self.psi.support()

    def mean(self) -> Dist:
        return flrn(self.psi)


def dirichlet_update(params: DirichletParams, draw: Multiset) -> DirichletParams:
    """Conjugate update: add the observed draw to the pseudo-counts."""
    base = set(params.base())
    outside = [p for p in draw.support() if p not in base]
    if outside:
        raise WrongSpace(f"draw points {outside!r} are outside the parameter base")
    return DirichletParams(params.psi + draw)


def dirichlet_succession_mean(params: DirichletParams, draw: Multiset) -> Dist:
    """Posterior mean urn after a multiset draw: ``Flrn(psi + draw)``."""
    return dirichlet_update(params, draw).mean()


def _check_two_by_two(params: DirichletParams) -> None:
    if params.base() != TWO_BY_TWO or any(params.psi(p) < 1 for p in TWO_BY_TWO):
        raise WrongSpace("parameters must have full support on {0,1} x {0,1}")


def bivbin_dirichlet_mean(
    params: DirichletParams, tosses: int, n1: int, n2: int
) -> Dist:
    """Posterior mean two-coin after observing heads ``(n1, n2)``:
    ``Flrn`` of the sum of ``psi + phi`` over the fiber of ``(n1, n2)``."""
    _check_two_by_two(params)
    draws = fiber(tosses, n1, n2)
    total = Multiset()
    for phi in draws:
        total = total + params.psi + phi
    return flrn(total)


def _rising(a: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= a + i
    return out


def dirichlet_multinomial_pmf(params: DirichletParams, phi: Multiset) -> Fraction:
    """Probability of the draw ``phi`` with the urn integrated out.

    With integer pseudo-counts the Gamma ratios collapse to rising
    factorials, so the value is an exact rational.
    """
    coeff = Fraction(math.factorial(phi.size))
    for _, m in phi.items():
        coeff /= math.factorial(m)
    num = 1
    for x, m in phi.items():
        num *= _rising(params.psi(x), m)
    return coeff * Fraction(num, _rising(params.psi.size, phi.size))


def bivbin_dirichlet_mean_oracle(
    params: DirichletParams, tosses: int, n1: int, n2: int
) -> Dist:
    """Exact posterior mean two-coin, weighting each fiber draw by its
    Dirichlet-multinomial probability (independent of the closed form)."""
    _check_two_by_two(params)
    weights = []
    means = []
    for phi in fiber(tosses, n1, n2):
        weights.append(dirichlet_multinomial_pmf(params, phi))
        means.append(flrn(params.psi + phi))
    total = sum(weights)
    if total == 0:
        raise DegenerateObservation(f"observation ({n1}, {n2}) has zero mass")
    acc = {p: Fraction(0) for p in TWO_BY_TWO}
    for w, mean in zip(weights, means):
        for p in TWO_BY_TWO:
            acc[p] += w * mean(p)
    return Dist({p: v / total for p, v in acc.items()})


# ---------------------------------------------------------------------------
# Poisson priors
# ---------------------------------------------------------------------------


def poisson_pmf(rate: float, k: int) -> float:
    """``e^(-rate) * rate^k / k!``, computed in log space."""
    if rate < 0:
        raise OutOfRange(f"rate must be >= 0, got {rate!r}")
    if k < 0:
        return 0.0
    if rate == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(rate) - rate - math.lgamma(k + 1))


def default_truncation(rate: float) -> int:
    """A toss-count cutoff leaving Poisson tail mass below the tolerance."""
    return max(60, math.ceil(rate + 12.0 * math.sqrt(rate) + 12.0))


@dataclass(frozen=True)
class PoissonParams:
    """Poisson rate plus the explicit truncation used by the brute-force
    inversion; the truncated mass must be at least ``1 - 1e-9``."""

    rate: float
    truncation: int

    def __post_init__(self):
        if self.rate < 0:
            raise OutOfRange(f"rate must be >= 0, got {self.rate!r}")
        if self.truncation < 0:
            raise OutOfRange(f"truncation must be >= 0, got {self.truncation!r}")
        mass = sum(poisson_pmf(self.rate, k) for k in range(self.truncation + 1))
        if mass < 1.0 - POISSON_TAIL_TOL:
            raise OutOfRange(
                f"truncation {self.truncation} keeps only {mass!r} of the prior mass"
            )

    @classmethod
    def with_default_truncation(cls, rate: float) -> "PoissonParams":
        return cls(rate, default_truncation(rate))


def binomial_poisson_mean(detect_prob: float, rate: float, detected: int) -> float:
    """Expected emitted count after detecting ``detected`` particles through
    a detector of efficiency ``detect_prob``: ``n + (1 - r) * rate``."""
    if not 0.0 <= detect_prob <= 1.0:
        raise OutOfRange(f"detection probability {detect_prob!r} outside [0, 1]")
    if rate < 0:
        raise OutOfRange(f"rate must be >= 0, got {rate!r}")
    if detected < 0:
        raise OutOfRange(f"detected count must be >= 0, got {detected}")
    return detected + (1.0 - detect_prob) * rate


def bivbin_poisson_mean(coin: Coin, rate: float, n1: int, n2: int) -> float:
    """Expected toss count given per-coordinate heads ``(n1, n2)`` of a
    two-coin, with a Poisson prior on the toss count.

    For ``n1 <= n2`` the closed form is

        n2 + g(0,0)*rate + (sum_i ppp(i)*i) / (sum_i ppp(i)),
        ppp(i) = pois[g(0,1)*rate](n2-n1+i)
               * pois[g(1,0)*rate](i) * pois[g(1,1)*rate](n1-i),

    summing ``i`` from 0 to ``n1``; for ``n2 < n1`` the coordinates (and the
    off-diagonal coin entries) swap roles.
    """
    if coin.n_dim != 2:
        raise OutOfRange(f"requires a two-coin, got dimension {coin.n_dim}")
    if rate < 0:
        raise OutOfRange(f"rate must be >= 0, got {rate!r}")
    if n1 < 0 or n2 < 0:
        raise OutOfRange(f"observed heads must be >= 0, got ({n1}, {n2})")
    g = coin.dist
    g00, g01, g10, g11 = (float(g(p)) for p in TWO_BY_TWO)
    if n2 < n1:
        n1, n2 = n2, n1
        g01, g10 = g10, g01

    def ppp(i: int) -> float:
        return (
            poisson_pmf(g01 * rate, n2 - n1 + i)
            * poisson_pmf(g10 * rate, i)
            * poisson_pmf(g11 * rate, n1 - i)
        )

    weights = [ppp(i) for i in range(n1 + 1)]
    denom = sum(weights)
    if denom <= 0.0:
        raise DegenerateObservation(
            f"observation ({n1}, {n2}) is impossible under this coin and rate"
        )
    shift = sum(i * w for i, w in enumerate(weights)) / denom
    return n2 + g00 * rate + shift


def truncated_dagger_mean(
    channel_for: Callable[[int], Callable], prior: PoissonParams, observation
) -> float:
    """Brute-force posterior mean toss count over the truncated prior.

    ``channel_for(K)`` must return something callable on observation points
    (a distribution works).  This inverts the channel directly,

        sum_K K * pois(K) * channel_for(K)(obs) / sum_K pois(K) * channel_for(K)(obs),

    and is the independent check for the closed-form Poisson rules.
    """
    num = 0.0
    den = 0.0
    for k in range(prior.truncation + 1):
        w = poisson_pmf(prior.rate, k) * float(channel_for(k)(observation))
        num += k * w
        den += w
    if den < _DEGENERATE_FLOOR:
        raise DegenerateObservation(
            f"observation {observation!r} has ~zero truncated mass"
        )
    return num / den
