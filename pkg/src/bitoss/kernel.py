"""Multisets, finite distributions, and their algebra.

Values live on arbitrary finite point sets.  A point is a small integer
(one-dimensional spaces such as coin faces or toss counts), a tuple of small
integers (product spaces such as ``{0,1}^N`` or count grids), an opaque
hashable label (``"R"``, ``"G"``, ...), or a :class:`Multiset` (draws are
points of multinomial distributions).  Points of one space must be mutually
orderable; every iteration, serialization, and sampling order is the sorted
point order, so results are deterministic.

Probabilities come in two modes that are never mixed silently:

* ``"rational"``, exact `fractions.Fraction` values (always lowest terms,
  positive denominator), for identity and closure checks;
* ``"float"``, IEEE-754 doubles, for EM, KL divergence, and Poisson work.

Operations that combine two distributions require equal modes and raise
:class:`ModeMismatch` otherwise.
"""

from __future__ import annotations

import math
import os
from bisect import bisect_right
from fractions import Fraction
from typing import Callable, Iterable, Mapping, NamedTuple

RATIONAL = "rational"
FLOAT = "float"

FLOAT_NORM_TOL = 1e-9
DEFAULT_MSET_CAP = 10_000_000
MSET_CAP_ENV = "BITOSS_MSET_CAP"


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class BitossError(Exception):
    """Base class for all domain errors raised by this package."""


class EmptyMultiset(BitossError):
    """An operation needing a non-empty multiset received the empty one."""


class ResourceLimit(BitossError):
    """An enumeration would exceed the configured multiset cap."""


class WrongSpace(BitossError):
    """A value lives on a different point set than the operation requires."""


class SupportMismatch(BitossError):
    """A support inclusion precondition fails (e.g. KL with q(x) = 0)."""


class DomainMismatch(BitossError):
    """A channel was applied to a point outside its domain."""


class NotFullSupport(BitossError):
    """A pushforward lacks full support where an inversion requires it."""


class OutOfRange(BitossError):
    """A numeric parameter is outside its admissible range."""


class DegenerateObservation(BitossError):
    """An observation has zero probability under the model."""


class ModeMismatch(BitossError):
    """Exact-rational and float values were combined in one operation."""


class NotNormalized(BitossError):
    """Probabilities do not sum to one (exactly, or within float tolerance)."""


# ---------------------------------------------------------------------------
# Scalar helpers (mode discipline)
# ---------------------------------------------------------------------------


def mode_of(value) -> str:
    """Return the numeric mode of a scalar probability value."""
    if isinstance(value, bool):
        raise OutOfRange(f"bool is not a probability: {value!r}")
    if isinstance(value, (int, Fraction)):
        return RATIONAL
    if isinstance(value, float):
        return FLOAT
    raise OutOfRange(f"not a supported scalar: {value!r}")


def coerce_scalar(value, mode: str):
    """Coerce ``value`` into ``mode``, rejecting cross-mode values.

    Plain ``int`` is mode-agnostic and converts either way; `Fraction` only
    enters rational mode and `float` only float mode.
    """
    if isinstance(value, bool) or not isinstance(value, (int, Fraction, float)):
        raise OutOfRange(f"not a supported scalar: {value!r}")
    if mode == RATIONAL:
        if isinstance(value, float):
            raise ModeMismatch(f"float {value!r} in rational-mode computation")
        return Fraction(value)
    if mode == FLOAT:
        if isinstance(value, Fraction):
            raise ModeMismatch(f"Fraction {value!r} in float-mode computation")
        return float(value)
    raise OutOfRange(f"unknown mode {mode!r}")


def zero(mode: str):
    return Fraction(0) if mode == RATIONAL else 0.0


def require_modes_equal(a: "Dist", b: "Dist") -> str:
    if a.mode != b.mode:
        raise ModeMismatch(f"cannot combine {a.mode} with {b.mode} distributions")
    return a.mode


# ---------------------------------------------------------------------------
# Multiset
# ---------------------------------------------------------------------------


class Multiset:
    """An immutable finite multiset: points with positive integer counts.

    Supports are kept sorted, zero multiplicities are never stored, and
    ``+`` is the commutative monoid addition with :data:`EMPTY_MSET` as unit.
    Multisets are hashable and totally ordered (by their sorted entry
    tuples), so they can themselves serve as points of a distribution.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping | Iterable[tuple[object, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        acc: dict = {}
        for point, mult in items:
            if isinstance(mult, bool) or not isinstance(mult, int):
                raise OutOfRange(f"multiplicity must be an int, got {mult!r}")
            if mult < 0:
                raise OutOfRange(f"negative multiplicity {mult} for {point!r}")
            if mult:
                acc[point] = acc.get(point, 0) + mult
        object.__setattr__(self, "_entries", tuple(sorted(acc.items())))

    @classmethod
    def from_elements(cls, elements: Iterable) -> "Multiset":
        """Count an iterable of points into a multiset."""
        acc: dict = {}
        for x in elements:
            acc[x] = acc.get(x, 0) + 1
        return cls(acc)

    @property
    def size(self) -> int:
        """Total number of elements, counting multiplicity."""
        return sum(m for _, m in self._entries)

    def support(self) -> tuple:
        return tuple(p for p, _ in self._entries)

    def items(self) -> tuple:
        return self._entries

    def __call__(self, point) -> int:
        for p, m in self._entries:
            if p == point:
                return m
        return 0

    def __add__(self, other: "Multiset") -> "Multiset":
        if not isinstance(other, Multiset):
            return NotImplemented
        acc = dict(self._entries)
        for p, m in other._entries:
            acc[p] = acc.get(p, 0) + m
        return Multiset(acc)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Multiset) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __lt__(self, other: "Multiset") -> bool:
        if not isinstance(other, Multiset):
            return NotImplemented
        return self._entries < other._entries

    def __le__(self, other: "Multiset") -> bool:
        if not isinstance(other, Multiset):
            return NotImplemented
        return self._entries <= other._entries

    def __repr__(self) -> str:
        if not self._entries:
            return "Multiset()"
        return " + ".join(f"{m}|{p}>" for p, m in self._entries)


EMPTY_MSET = Multiset()


# ---------------------------------------------------------------------------
# Dist
# ---------------------------------------------------------------------------


class Dist:
    """An immutable finite probability distribution.

    Stored entries all have strictly positive probability, so the support is
    exactly the stored key set.  Construction validates normalization:
    exactly one in rational mode, within ``FLOAT_NORM_TOL`` in float mode.
    """

    __slots__ = ("_entries", "_mode")

    def __init__(self, entries: Mapping | Iterable[tuple[object, object]], mode: str | None = None):
        items = list(entries.items() if isinstance(entries, Mapping) else entries)
        if mode is None:
            mode = FLOAT if any(isinstance(v, float) for _, v in items) else RATIONAL
        acc: dict = {}
        for point, prob in items:
            prob = coerce_scalar(prob, mode)
            if prob < 0:
                raise OutOfRange(f"negative probability {prob} at {point!r}")
            if prob > 0:
                acc[point] = acc.get(point, zero(mode)) + prob
        if not acc:
            raise NotNormalized("a distribution needs positive total mass")
        total = sum(acc.values())
        if mode == RATIONAL:
            if total != 1:
                raise NotNormalized(f"rational probabilities sum to {total}, not 1")
        elif abs(total - 1.0) > FLOAT_NORM_TOL:
            raise NotNormalized(f"float probabilities sum to {total!r}")
        object.__setattr__(self, "_entries", tuple(sorted(acc.items())))
        object.__setattr__(self, "_mode", mode)

    @classmethod
    def from_weights(cls, weights: Mapping | Iterable[tuple[object, object]], mode: str | None = None) -> "Dist":
        """Normalize nonnegative weights into a distribution."""
        items = list(weights.items() if isinstance(weights, Mapping) else weights)
        if mode is None:
            mode = FLOAT if any(isinstance(v, float) for _, v in items) else RATIONAL
        coerced = [(p, coerce_scalar(w, mode)) for p, w in items]
        total = sum(w for _, w in coerced)
        if total <= 0:
            raise NotNormalized("weights need positive total mass")
        return cls([(p, w / total) for p, w in coerced], mode=mode)

    @classmethod
    def point_mass(cls, point, mode: str = RATIONAL) -> "Dist":
        return cls({point: Fraction(1) if mode == RATIONAL else 1.0}, mode=mode)

    @property
    def mode(self) -> str:
        return self._mode

    def support(self) -> tuple:
        return tuple(p for p, _ in self._entries)

    def items(self) -> tuple:
        return self._entries

    def __call__(self, point):
        for p, v in self._entries:
            if p == point:
                return v
        return zero(self._mode)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dist)
            and self._mode == other._mode
            and self._entries == other._entries
        )

    def __hash__(self) -> int:
        return hash((self._mode, self._entries))

    def __repr__(self) -> str:
        body = " + ".join(f"{v}|{p}>" for p, v in self._entries)
        return f"Dist[{self._mode}]({body})"


def to_float(omega: Dist) -> Dist:
    """Convert a distribution to float mode (identity on float inputs)."""
    if omega.mode == FLOAT:
        return omega
    return Dist({p: float(v) for p, v in omega.items()}, mode=FLOAT)


# ---------------------------------------------------------------------------
# Multiset operations
# ---------------------------------------------------------------------------


def mset_map(f: Callable, phi: Multiset) -> Multiset:
    """Push a multiset forward along a function on points.

    ``mset_map(f, phi)(y)`` sums the multiplicities of all preimages of
    ``y``; size is preserved and the map is a monoid homomorphism.
    """
    acc: dict = {}
    for p, m in phi.items():
        q = f(p)
        acc[q] = acc.get(q, 0) + m
    return Multiset(acc)


def flrn(phi: Multiset) -> Dist:
    """Frequentist learning: normalize counts into a rational distribution."""
    total = phi.size
    if total == 0:
        raise EmptyMultiset("cannot normalize the empty multiset")
    return Dist({p: Fraction(m, total) for p, m in phi.items()}, mode=RATIONAL)


def mset_cap() -> int:
    """Current enumeration cap (``BITOSS_MSET_CAP`` overrides the default)."""
    raw = os.environ.get(MSET_CAP_ENV)
    if raw is None:
        return DEFAULT_MSET_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise OutOfRange(f"{MSET_CAP_ENV} must be an integer, got {raw!r}") from exc


def count_msets(n_points: int, size: int) -> int:
    """Number of size-``size`` multisets over ``n_points`` points."""
    return math.comb(size + n_points - 1, n_points - 1)


def enumerate_msets(base: Iterable, size: int, cap: int | None = None) -> list[Multiset]:
    """All multisets of the given size over ``base``, in lexicographic order.

    The order is lexicographic on the nondecreasing element sequence of each
    multiset (``[2|0>, 1|0>+1|1>, 2|1>]`` for two points, size two).  Raises
    :class:`ResourceLimit` when the stars-and-bars count exceeds the cap.
    """
    points = sorted(set(base))
    if not points:
        raise EmptyMultiset("base must be non-empty")
    if size < 0:
        raise OutOfRange(f"size must be nonnegative, got {size}")
    limit = mset_cap() if cap is None else cap
    n = count_msets(len(points), size)
    if n > limit:
        raise ResourceLimit(f"{n} multisets of size {size} exceed the cap {limit}")
    out: list[Multiset] = []
    counts = [0] * len(points)

    def fill(idx: int, remaining: int) -> None:
        if idx == len(points) - 1:
            counts[idx] = remaining
            out.append(Multiset((points[i], counts[i]) for i in range(len(points))))
            return
        for k in range(remaining, -1, -1):
            counts[idx] = k
            fill(idx + 1, remaining - k)

    fill(0, size)
    return out


def mset_coefficient(phi: Multiset) -> int:
    """Multinomial coefficient of a draw: ``size! / prod(mult!)``, exactly."""
    num = math.factorial(phi.size)
    for _, m in phi.items():
        num //= math.factorial(m)
    return num


# ---------------------------------------------------------------------------
# Dist operations
# ---------------------------------------------------------------------------


def dist_map(f: Callable, omega: Dist) -> Dist:
    """Push a distribution forward along a function on points."""
    acc: dict = {}
    for p, v in omega.items():
        q = f(p)
        acc[q] = acc.get(q, zero(omega.mode)) + v
    return Dist(acc, mode=omega.mode)


def _is_int_point(p) -> bool:
    if isinstance(p, bool):
        return False
    if isinstance(p, int):
        return True
    return isinstance(p, tuple) and all(isinstance(c, int) and not isinstance(c, bool) for c in p)


def pair_points(x, y):
    """Canonical point pairing for tensors.

    Integer points and integer tuples concatenate (a bare integer counts as a
    1-tuple), so products of coin or count spaces stay flat integer tuples;
    anything else pairs into a plain 2-tuple.
    """
    if _is_int_point(x) and _is_int_point(y):
        xt = x if isinstance(x, tuple) else (x,)
        yt = y if isinstance(y, tuple) else (y,)
        return xt + yt
    return (x, y)


def tensor(omega: Dist, rho: Dist) -> Dist:
    """Parallel product distribution on paired points."""
    mode = require_modes_equal(omega, rho)
    acc = {}
    for x, vx in omega.items():
        for y, vy in rho.items():
            acc[pair_points(x, y)] = vx * vy
    return Dist(acc, mode=mode)


TWO_BY_TWO = ((0, 0), (0, 1), (1, 0), (1, 1))


def is_entwined(tau: Dist) -> bool:
    """Whether a distribution on ``{0,1} x {0,1}`` differs from the product
    of its marginals, decided by the cross-product criterion
    ``tau(0,0)*tau(1,1) != tau(0,1)*tau(1,0)`` (exact per mode)."""
    if any(p not in TWO_BY_TWO for p in tau.support()):
        raise WrongSpace(f"support {tau.support()} is not within 2x2")
    return tau((0, 0)) * tau((1, 1)) != tau((0, 1)) * tau((1, 0))


def monoid_add(x, y):
    """Default commutative-monoid addition on points.

    Integers add, integer tuples add componentwise, multisets add as
    multisets.
    """
    if isinstance(x, Multiset) and isinstance(y, Multiset):
        return x + y
    if isinstance(x, tuple) and isinstance(y, tuple):
        if len(x) != len(y):
            raise WrongSpace(f"cannot add tuples of lengths {len(x)} and {len(y)}")
        return tuple(a + b for a, b in zip(x, y))
    if isinstance(x, int) and isinstance(y, int):
        return x + y
    raise WrongSpace(f"no monoid addition for {x!r} and {y!r}")


def convolve(omega: Dist, rho: Dist, add: Callable | None = None) -> Dist:
    """Distribution of the sum of independent draws.

    Equals the pushforward of the tensor along the monoid addition; it is
    commutative and associative, with unit the point mass at the monoid zero.
    """
    mode = require_modes_equal(omega, rho)
    plus = monoid_add if add is None else add
    acc: dict = {}
    for x, vx in omega.items():
        for y, vy in rho.items():
            s = plus(x, y)
            acc[s] = acc.get(s, zero(mode)) + vx * vy
    return Dist(acc, mode=mode)


def validity(omega: Dist, observable: Callable):
    """Expected value of an observable: ``sum omega(x) * observable(x)``.

    Observable values must match the distribution's mode (ints are allowed
    in either mode).
    """
    total = zero(omega.mode)
    for p, v in omega.items():
        total += v * coerce_scalar(observable(p), omega.mode)
    return total


def point_coords(p) -> tuple:
    """View a point as a tuple of numeric coordinates (bare ints as 1-tuples)."""
    if isinstance(p, tuple):
        return p
    if isinstance(p, int) and not isinstance(p, bool):
        return (p,)
    raise WrongSpace(f"point {p!r} has no numeric coordinates")


class Moments(NamedTuple):
    mean: tuple
    var: tuple
    cov: tuple  # square matrix as nested tuples; cov[i][i] == var[i]


def moments(omega: Dist) -> Moments:
    """Mean vector, variance vector, and covariance matrix of a distribution
    on numeric points, via validities of coordinate projections."""
    coords = [point_coords(p) for p in omega.support()]
    dim = len(coords[0])
    if any(len(c) != dim for c in coords):
        raise WrongSpace("points have inconsistent dimensions")
    probs = [v for _, v in omega.items()]
    mean = tuple(sum(v * c[i] for v, c in zip(probs, coords)) for i in range(dim))
    second = [
        [sum(v * c[i] * c[j] for v, c in zip(probs, coords)) for j in range(dim)]
        for i in range(dim)
    ]
    cov = tuple(
        tuple(second[i][j] - mean[i] * mean[j] for j in range(dim)) for i in range(dim)
    )
    var = tuple(cov[i][i] for i in range(dim))
    return Moments(mean=mean, var=var, cov=cov)


def kl_divergence(p: Dist, q: Dist) -> float:
    """Kullback-Leibler divergence ``sum p(x) ln(p(x)/q(x))`` as a float.

    Requires ``support(p) <= support(q)``; raises :class:`SupportMismatch`
    otherwise.  Tiny negative rounding residues are clamped to zero.
    """
    total = 0.0
    for x, px in p.items():
        qx = float(q(x))
        if qx <= 0.0:
            raise SupportMismatch(f"q has zero mass at {x!r} where p is positive")
        total += float(px) * math.log(float(px) / qx)
    return total if total > 0.0 else 0.0


# ---------------------------------------------------------------------------
# Deterministic sampling
# ---------------------------------------------------------------------------

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    # splitmix64 output function (Steele, Lea, Flood 2014)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def counter_rng(seed: int, index: int) -> int:
    """The package's fixed counter-based generator.

    Draw ``index`` under ``seed`` is ``splitmix64(seed + (index+1)*GOLDEN)``
    where ``GOLDEN`` is 0x9E3779B97F4A7C15; all arithmetic is mod 2^64.  The
    draw is a uniform 64-bit integer, used as the numerator of a dyadic
    uniform on [0, 1).
    """
    return _mix64((seed + (index + 1) * _GOLDEN) & _MASK64)


def sample(omega: Dist, n: int, seed: int) -> Multiset:
    """Draw ``n`` points i.i.d. from ``omega``, deterministically.

    Each draw feeds a counter-based 64-bit value (:func:`counter_rng`) as a
    dyadic uniform into the inverse CDF over the sorted point order, so the
    result depends only on the distribution's entries, ``n``, and ``seed``.
    Rational-mode thresholds are compared exactly.
    """
    if n < 0:
        raise OutOfRange(f"sample size must be nonnegative, got {n}")
    points = []
    cum = []
    running = zero(omega.mode)
    for p, v in omega.items():
        running += v
        points.append(p)
        cum.append(running)
    acc: dict = {}
    denom = 1 << 64
    for i in range(n):
        u = counter_rng(seed, i)
        if omega.mode == RATIONAL:
            idx = bisect_right(cum, Fraction(u, denom))
        else:
            idx = bisect_right(cum, u / denom)
        if idx >= len(points):  # float cumulative may fall just short of 1
            idx = len(points) - 1
        acc[points[idx]] = acc.get(points[idx], 0) + 1
    return Multiset(acc)
