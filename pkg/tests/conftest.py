import random
from fractions import Fraction

import pytest
from hypothesis import settings
import hypothesis.strategies as st

from bitoss.binomials import Coin, two_coin
from bitoss.kernel import Dist, Multiset

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

TWO_BY_TWO = ((0, 0), (0, 1), (1, 0), (1, 1))

# The worked two-coin used throughout: entwined, with simple fractions.
EXAMPLE_COIN = two_coin(
    Fraction(3, 8), Fraction(5, 12), Fraction(1, 12), Fraction(1, 8)
)

# The two-component generator pair for the mixture experiments.
MIXTURE_COINS = (
    EXAMPLE_COIN,
    two_coin(Fraction(1, 10), Fraction(1, 10), Fraction(1, 5), Fraction(3, 5)),
)
MIXTURE_WEIGHTS = (Fraction(1, 3), Fraction(2, 3))


@pytest.fixture
def example_coin() -> Coin:
    return EXAMPLE_COIN


def random_rational_dist(rng: random.Random, points, max_weight: int = 30) -> Dist:
    """Full-support rational distribution with small random weights."""
    weights = {p: rng.randint(1, max_weight) for p in points}
    return Dist.from_weights(weights)


def random_rational_coin(rng: random.Random, n_dim: int = 2) -> Coin:
    if n_dim == 1:
        return Coin(1, random_rational_dist(rng, (0, 1)))
    from bitoss.binomials import bit_points

    return Coin(n_dim, random_rational_dist(rng, bit_points(n_dim)))


def rational_dists(points, min_weight: int = 0, max_weight: int = 12):
    """Hypothesis strategy for rational distributions over fixed points."""
    points = list(points)
    return (
        st.lists(
            st.integers(min_weight, max_weight),
            min_size=len(points),
            max_size=len(points),
        )
        .filter(lambda w: sum(w) > 0)
        .map(lambda w: Dist.from_weights(dict(zip(points, w))))
    )


def multisets(points, max_mult: int = 5):
    """Hypothesis strategy for multisets over fixed points."""
    points = list(points)
    return st.lists(
        st.integers(0, max_mult), min_size=len(points), max_size=len(points)
    ).map(lambda m: Multiset(dict(zip(points, m))))
