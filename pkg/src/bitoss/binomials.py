"""Flip, binomial, multinomial, and multivariate binomial distributions.

A *coin* of dimension N is a distribution on ``{0,1}^N`` (bare bits for
N = 1, bit tuples for N >= 2); it may be entwined, i.e. different from the
product of its marginals.  Tossing it K times and counting, per coordinate,
how many tosses came up 1 yields a distribution on the ``{0,...,K}^N`` count
grid: the multivariate binomial.  It is computed here two ways,

* functorially, by pushing the multinomial of the coin forward along the
  marginal heads function, for any dimension; and
* directly, for N = 2, by summing multinomial terms over the closed-form
  fiber of each grid cell, which avoids enumerating all draws.

Both paths agree exactly in rational mode.  ``recover_coin`` inverts the
construction from the grid's mean and covariance alone, using that the grid
moments are K times the coin moments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .kernel import (
    Dist,
    FLOAT,
    Multiset,
    OutOfRange,
    RATIONAL,
    WrongSpace,
    coerce_scalar,
    dist_map,
    enumerate_msets,
    moments,
    mset_coefficient,
    zero,
)

log = logging.getLogger(__name__)

# Exact enumeration over {0,1}^N grows doubly fast in N; three dimensions is
# the supported default.
MAX_DIMENSION = 3

RECOVER_FLOAT_TOL = 1e-9


def bit_points(n_dim: int) -> tuple:
    if n_dim == 1:
        return (0, 1)
    return tuple(product((0, 1), repeat=n_dim))


def grid_points(size: int, n_dim: int) -> tuple:
    if n_dim == 1:
        return tuple(range(size + 1))
    return tuple(product(range(size + 1), repeat=n_dim))


@dataclass(frozen=True)
class Coin:
    """A distribution on the faces ``{0,1}^N`` of an N-coin."""

    n_dim: int
    dist: Dist

    def __post_init__(self):
        if self.n_dim < 1:
            raise OutOfRange(f"dimension must be >= 1, got {self.n_dim}")
        if self.n_dim > MAX_DIMENSION:
            raise OutOfRange(
                f"dimension {self.n_dim} exceeds the supported maximum {MAX_DIMENSION}"
            )
        faces = set(bit_points(self.n_dim))
        bad = [p for p in self.dist.support() if p not in faces]
        if bad:
            raise WrongSpace(f"points {bad!r} are not {self.n_dim}-bit faces")

    def heads_probability(self, coord: int):
        """Marginal probability of a 1 in the given coordinate (0-based)."""
        if not 0 <= coord < self.n_dim:
            raise OutOfRange(f"coordinate {coord} out of range for N={self.n_dim}")
        if self.n_dim == 1:
            return self.dist(1)
        total = zero(self.dist.mode)
        for p, v in self.dist.items():
            if p[coord] == 1:
                total += v
        return total


@dataclass(frozen=True)
class GridDist:
    """A distribution on the count grid ``{0,...,K}^N`` after K tosses."""

    tosses: int
    n_dim: int
    dist: Dist

    def __post_init__(self):
        if self.tosses < 0:
            raise OutOfRange(f"toss count must be >= 0, got {self.tosses}")
        if self.n_dim < 1:
            raise OutOfRange(f"dimension must be >= 1, got {self.n_dim}")
        grid = set(grid_points(self.tosses, self.n_dim))
        bad = [p for p in self.dist.support() if p not in grid]
        if bad:
            raise WrongSpace(
                f"points {bad!r} fall outside the {self.tosses + 1}^{self.n_dim} grid"
            )


def two_coin(p00, p01, p10, p11) -> Coin:
    """Convenience constructor for a two-coin from its four face weights."""
    return Coin(2, Dist({(0, 0): p00, (0, 1): p01, (1, 0): p10, (1, 1): p11}))


def _check_probability(r):
    if isinstance(r, float):
        if not 0.0 <= r <= 1.0:
            raise OutOfRange(f"probability {r!r} outside [0, 1]")
        return r
    r = coerce_scalar(r, RATIONAL)
    if not 0 <= r <= 1:
        raise OutOfRange(f"probability {r!r} outside [0, 1]")
    return r


def flip(r) -> Coin:
    """Single biased coin: probability ``r`` of 1 and ``1 - r`` of 0."""
    r = _check_probability(r)
    one = Fraction(1) if not isinstance(r, float) else 1.0
    return Coin(1, Dist({1: r, 0: one - r}))


def binomial(tosses: int, r) -> Dist:
    """Number of 1s in ``tosses`` flips of a coin with bias ``r``."""
    if tosses < 0:
        raise OutOfRange(f"toss count must be >= 0, got {tosses}")
    r = _check_probability(r)
    one = Fraction(1) if not isinstance(r, float) else 1.0
    return Dist(
        {n: math.comb(tosses, n) * r**n * (one - r) ** (tosses - n) for n in range(tosses + 1)}
    )


def multinomial_term(omega: Dist, phi: Multiset):
    """Probability of the draw ``phi`` from the urn ``omega``."""
    term = coerce_scalar(mset_coefficient(phi), omega.mode)
    for x, m in phi.items():
        term *= omega(x) ** m
    return term


def multinomial(draws: int, omega: Dist, cap: int | None = None) -> Dist:
    """Distribution of size-``draws`` multiset draws, with replacement,
    from the urn ``omega``."""
    if draws < 0:
        raise OutOfRange(f"draw size must be >= 0, got {draws}")
    acc = {}
    for phi in enumerate_msets(omega.support(), draws, cap=cap):
        p = multinomial_term(omega, phi)
        if p > 0:
            acc[phi] = p
    return Dist(acc, mode=omega.mode)


def heads(phi: Multiset, n_dim: int | None = None):
    """Count the 1s per coordinate of a multiset over coin faces.

    Returns an N-tuple for multisets over ``{0,1}^N`` with N >= 2, and a bare
    count for multisets over ``{0,1}`` (so one-dimensional grids coincide
    with binomial supports).  The dimension is inferred from the support
    unless given; the empty multiset needs it explicitly.
    """
    support = phi.support()
    if not support:
        if n_dim is None:
            raise WrongSpace("the empty multiset needs an explicit dimension")
        return 0 if n_dim == 1 else (0,) * n_dim
    first = support[0]
    if n_dim is not None:
        inferred = len(first) if isinstance(first, tuple) else 1
        if inferred != n_dim:
            raise WrongSpace(f"points {support!r} are not {n_dim}-bit faces")
    if isinstance(first, tuple):
        n_dim = len(first)
        ok = all(
            isinstance(p, tuple) and len(p) == n_dim and set(p) <= {0, 1} for p in support
        )
        if not ok or n_dim < 2:
            raise WrongSpace(f"expected points in {{0,1}}^N, got {support!r}")
        counts = [0] * n_dim
        for p, m in phi.items():
            for i, bit in enumerate(p):
                if bit:
                    counts[i] += m
        return tuple(counts)
    if not set(support) <= {0, 1}:
        raise WrongSpace(f"expected points in {{0,1}}, got {support!r}")
    return phi(1)


def fiber(tosses: int, n1: int, n2: int) -> list[Multiset]:
    """All size-``tosses`` multisets over ``{0,1}^2`` with heads ``(n1, n2)``.

    Produced by the closed form: with ``n1 <= n2`` the multisets are

        ``(K-n2-i)|0,0> + (n2-n1+i)|0,1> + i|1,0> + (n1-i)|1,1>``

    for ``0 <= i <= min(n1, K-n2)``, and symmetrically (swapping the roles
    of ``|0,1>`` and ``|1,0>``) when ``n2 < n1``.  Zero multiplicities are
    dropped.
    """
    if not (0 <= n1 <= tosses and 0 <= n2 <= tosses):
        raise OutOfRange(f"heads ({n1}, {n2}) out of range for {tosses} tosses")
    out = []
    if n1 <= n2:
        for i in range(min(n1, tosses - n2) + 1):
            out.append(
                Multiset(
                    {
                        (0, 0): tosses - n2 - i,
                        (0, 1): n2 - n1 + i,
                        (1, 0): i,
                        (1, 1): n1 - i,
                    }
                )
            )
    else:
        for i in range(min(n2, tosses - n1) + 1):
            out.append(
                Multiset(
                    {
                        (0, 0): tosses - n1 - i,
                        (0, 1): i,
                        (1, 0): n1 - n2 + i,
                        (1, 1): n2 - i,
                    }
                )
            )
    return out


def mvbin_functorial(tosses: int, coin: Coin, cap: int | None = None) -> GridDist:
    """Multivariate binomial as a pushforward: enumerate all draws of the
    coin and map each through the marginal heads function."""
    grid = dist_map(
        lambda phi: heads(phi, coin.n_dim), multinomial(tosses, coin.dist, cap=cap)
    )
    return GridDist(tosses, coin.n_dim, grid)


def bivbin_cell(tosses: int, coin: Coin, n1: int, n2: int):
    """Single grid-cell probability of the bivariate binomial, via the fiber.

    Points outside the ``{0,...,K}^2`` grid have probability zero, matching
    distribution-call semantics.
    """
    if coin.n_dim != 2:
        raise OutOfRange(f"requires a two-coin, got dimension {coin.n_dim}")
    total = zero(coin.dist.mode)
    if not (0 <= n1 <= tosses and 0 <= n2 <= tosses):
        return total
    for phi in fiber(tosses, n1, n2):
        total += multinomial_term(coin.dist, phi)
    return total


def bivbin_direct(tosses: int, coin: Coin) -> GridDist:
    """Bivariate binomial built cell by cell from the fiber closed form.

    Agrees exactly with :func:`mvbin_functorial` but never materializes the
    full multinomial.
    """
    if coin.n_dim != 2:
        raise OutOfRange(f"requires a two-coin, got dimension {coin.n_dim}")
    acc = {}
    for n1 in range(tosses + 1):
        for n2 in range(tosses + 1):
            p = bivbin_cell(tosses, coin, n1, n2)
            if p > 0:
                acc[(n1, n2)] = p
    return GridDist(tosses, 2, Dist(acc, mode=coin.dist.mode))


def bivbin_tails(tosses: int, coin: Coin) -> GridDist:
    """Tail-counting variant of the bivariate binomial.

    Cell ``(k, l)`` is the probability of ``k`` zeros in the first coordinate
    and ``l`` zeros in the second, i.e. the heads construction applied to the
    coin with both bits flipped:

        sum_i K! / (i! (k-i)! (l-i)! (K-k-l+i)!)
              * g(0,0)^i * g(0,1)^(k-i) * g(1,0)^(l-i) * g(1,1)^(K-k-l+i)

    with ``i`` ranging over ``max(0, k+l-K) .. min(k, l)``.
    """
    if coin.n_dim != 2:
        raise OutOfRange(f"requires a two-coin, got dimension {coin.n_dim}")
    g = coin.dist
    acc = {}
    for k in range(tosses + 1):
        for l in range(tosses + 1):
            cell = zero(g.mode)
            for i in range(max(0, k + l - tosses), min(k, l) + 1):
                coeff = (
                    math.factorial(tosses)
                    // (
                        math.factorial(i)
                        * math.factorial(k - i)
                        * math.factorial(l - i)
                        * math.factorial(tosses - k - l + i)
                    )
                )
                cell += (
                    coerce_scalar(coeff, g.mode)
                    * g((0, 0)) ** i
                    * g((0, 1)) ** (k - i)
                    * g((1, 0)) ** (l - i)
                    * g((1, 1)) ** (tosses - k - l + i)
                )
            if cell > 0:
                acc[(k, l)] = cell
    return GridDist(tosses, 2, Dist(acc, mode=g.mode))


def bivbin(tosses: int, coin: Coin, cap: int | None = None) -> GridDist:
    """Multivariate binomial, choosing the fiber fast path for two-coins."""
    if coin.n_dim == 2:
        return bivbin_direct(tosses, coin)
    return mvbin_functorial(tosses, coin, cap=cap)


def recover_coin(grid, tosses: int, *, infeasible: str = "error") -> Coin:
    """Invert a bivariate binomial: read the two-coin off grid moments.

    The grid's mean and covariance are ``tosses`` times the coin's, so with
    mean ``(m1, m2)`` and cross covariance ``c``:

        g(1,1) = c/K + m1*m2/K^2,   g(1,0) = m1/K - g(1,1),
        g(0,1) = m2/K - g(1,1),     g(0,0) = 1 - the rest.

    For inputs that are exactly bivariate binomials this is an exact round
    trip in rational mode.  Otherwise the derived entries may leave [0, 1]:
    with ``infeasible="error"`` anything beyond the float tolerance raises
    :class:`OutOfRange`; with ``infeasible="clamp"`` entries are clamped into
    [0, 1] and renormalized (logged), which is what EM's projection needs.
    """
    if infeasible not in ("error", "clamp"):
        raise OutOfRange(f"infeasible must be 'error' or 'clamp', got {infeasible!r}")
    if tosses < 1:
        raise OutOfRange(f"toss count must be >= 1, got {tosses}")
    dist = grid.dist if isinstance(grid, GridDist) else grid
    if isinstance(grid, GridDist) and grid.n_dim != 2:
        raise OutOfRange(f"requires a two-dimensional grid, got N={grid.n_dim}")
    stats = moments(dist)
    if len(stats.mean) != 2:
        raise WrongSpace("grid points must be pairs of counts")
    m1, m2 = stats.mean
    g11 = stats.cov[0][1] / tosses + (m1 * m2) / (tosses * tosses)
    g10 = m1 / tosses - g11
    g01 = m2 / tosses - g11
    g00 = 1 - g11 - g10 - g01
    entries = {(0, 0): g00, (0, 1): g01, (1, 0): g10, (1, 1): g11}
    tol = RECOVER_FLOAT_TOL if dist.mode == FLOAT else 0
    out_of_band = [p for p, v in entries.items() if v < -tol or v > 1 + tol]
    if out_of_band and infeasible == "error":
        raise OutOfRange(
            f"derived entries {entries!r} are not a two-coin (infeasible moments)"
        )
    clamped = {p: min(max(v, zero(dist.mode)), 1) for p, v in entries.items()}
    if out_of_band:  # only reachable with infeasible="clamp"
        log.info("recover_coin clamped infeasible entries: %r", entries)
    if dist.mode == FLOAT:
        # rounding and in-band clamping can leave the sum slightly off one
        return Coin(2, Dist.from_weights(clamped, mode=FLOAT))
    return Coin(2, Dist(clamped, mode=RATIONAL))
