"""Eventually periodic sequences indexed by generation."""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Generic, Mapping, Sequence, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class PeriodicProfile(Generic[T]):
    """A two-tailed sequence: an explicit window plus periodic tails.

    ``prefix`` covers the contiguous index window ``lo..hi``.  Indices above
    the window cycle through ``period`` starting at ``hi + 1``; indices below
    it cycle through ``left_period`` walking leftward from ``lo - 1``.  With
    an empty prefix the window is the empty range ending at -1, so the right
    tail starts at index 0.
    """

    prefix: tuple[tuple[int, T], ...] = ()
    period: tuple[T, ...] = ()
    left_period: tuple[T, ...] = ()

    def __post_init__(self):
        gens = [g for g, _ in self.prefix]
        if len(set(gens)) != len(gens):
            raise ValueError("duplicate generation in profile prefix")
        if gens and sorted(gens) != list(range(min(gens), max(gens) + 1)):
            raise ValueError("profile prefix must cover a contiguous window")
        if not self.period:
            raise ValueError("profile needs a nonempty rightward period")
        object.__setattr__(self, "prefix", tuple(sorted(self.prefix)))
        object.__setattr__(self, "_table", dict(self.prefix))

    @classmethod
    def constant(cls, value: T) -> "PeriodicProfile[T]":
        return cls((), (value,), (value,))

    @classmethod
    def build(cls, prefix: Mapping[int, T] | Sequence[tuple[int, T]] = (),
              period: Sequence[T] = (), left_period: Sequence[T] = ()):
        items = prefix.items() if isinstance(prefix, Mapping) else prefix
        return cls(tuple((int(g), v) for g, v in items), tuple(period), tuple(left_period))

    @property
    def lo(self) -> int:
        return self.prefix[0][0] if self.prefix else 0

    @property
    def hi(self) -> int:
        return self.prefix[-1][0] if self.prefix else -1

    def __getitem__(self, g: int) -> T:
        table = self._table
        if g in table:
            return table[g]
        if g > self.hi:
            return self.period[(g - self.hi - 1) % len(self.period)]
        if not self.left_period:
            raise IndexError(f"profile has no leftward tail (index {g})")
        return self.left_period[(self.lo - 1 - g) % len(self.left_period)]

    def prefix_values(self) -> list[T]:
        return [v for _, v in self.prefix]


def right_periodic_start(*profiles: PeriodicProfile) -> tuple[int, int]:
    """First index from which every profile is in its right tail, and the joint period."""
    start = max(p.hi + 1 for p in profiles)
    return start, lcm(*(len(p.period) for p in profiles))


def left_periodic_start(*profiles: PeriodicProfile) -> tuple[int, int]:
    """Last index at or below which every profile is in its left tail, and the joint period."""
    start = min(p.lo - 1 for p in profiles)
    return start, lcm(*(len(p.left_period) for p in profiles))
