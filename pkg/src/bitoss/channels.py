"""Channels (point-indexed families of distributions) and Bayesian inversion.

A channel assigns to every domain point a distribution on a common codomain;
it is a conditional probability table stored extensionally so it can be
serialized and inverted.  The two operations are pushforward of a prior
along a channel and the dagger (Bayesian inversion), whose domain is the
support of the pushforward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .kernel import (
    Dist,
    DomainMismatch,
    ModeMismatch,
    NotFullSupport,
    zero,
)


@dataclass(frozen=True)
class Channel:
    """A finite map from domain points to distributions.

    The domain order is the deterministic iteration order.  All kernel
    distributions must share one numeric mode.
    """

    domain: tuple
    kernel: Mapping

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "kernel", dict(self.kernel))
        missing = [x for x in self.domain if x not in self.kernel]
        if missing:
            raise DomainMismatch(f"no kernel distribution for {missing!r}")
        modes = {self.kernel[x].mode for x in self.domain}
        if len(modes) > 1:
            raise ModeMismatch(f"kernel distributions mix modes {sorted(modes)}")

    @classmethod
    def from_function(cls, domain: Iterable, fn) -> "Channel":
        dom = tuple(domain)
        return cls(dom, {x: fn(x) for x in dom})

    @property
    def mode(self) -> str:
        return self.kernel[self.domain[0]].mode

    def __call__(self, x) -> Dist:
        try:
            return self.kernel[x]
        except KeyError:
            raise DomainMismatch(f"{x!r} is not in the channel domain") from None


def push(chan: Channel, omega: Dist) -> Dist:
    """Pushforward: mix the kernel distributions with weights ``omega``."""
    if omega.mode != chan.mode:
        raise ModeMismatch(f"prior is {omega.mode} but channel is {chan.mode}")
    acc: dict = {}
    for x, w in omega.items():
        dist = chan(x)
        for y, v in dist.items():
            acc[y] = acc.get(y, zero(omega.mode)) + w * v
    return Dist(acc, mode=omega.mode)


def dagger(chan: Channel, omega: Dist, codomain: Iterable | None = None) -> Channel:
    """Bayesian inversion of a channel with respect to a prior.

    The returned channel maps each point ``y`` in the support of
    ``push(chan, omega)`` to the posterior
    ``x -> omega(x) * chan(x)(y) / push(chan, omega)(y)``.

    When ``codomain`` is given, the pushforward must put positive mass on
    every codomain point (:class:`NotFullSupport` otherwise); without it the
    dagger's domain is simply the pushforward's support, which avoids
    manufactured division-by-zero errors on structurally empty cells.
    """
    predicted = push(chan, omega)
    if codomain is not None:
        dead = [y for y in codomain if predicted(y) == 0]
        if dead:
            raise NotFullSupport(f"pushforward has zero mass at {dead!r}")
    kernel = {}
    for y, py in predicted.items():
        post = {}
        for x, wx in omega.items():
            joint = wx * chan(x)(y)
            if joint > 0:
                post[x] = joint / py
        kernel[y] = Dist(post, mode=omega.mode)
    return Channel(predicted.support(), kernel)
