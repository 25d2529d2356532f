"""Finite descriptions of infinite leafless directed trees.

A tree is described by a per-generation arity profile (eventually periodic
in both directions for unrooted trees) plus finitely many per-vertex arity
overrides.  Vertices are addressed relative to a fixed anchor vertex: walk
``up`` parent steps from the anchor, then descend through the child slots in
``down``.  For rooted trees the anchor is the root and ``up`` is always 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterator, NamedTuple

from .errors import EnumerationCapExceeded, NotApplicable, RootHasNoParent, SlotOutOfRange
from .profiles import PeriodicProfile

ROOTED = "rooted"
UNROOTED = "unrooted"

DEFAULT_CAP = 10**6


class Vertex(NamedTuple):
    up: int = 0
    down: tuple[int, ...] = ()

    @property
    def generation(self) -> int:
        return len(self.down) - self.up

    def __str__(self):
        return f"{self.up}:{','.join(map(str, self.down))}"


ANCHOR = Vertex(0, ())


class GenerationSize(NamedTuple):
    """``count`` is exact when ``exact`` is true, otherwise a lower bound (the cap)."""

    count: int
    exact: bool


@dataclass(frozen=True)
class TreeSpec:
    kind: str
    arity: PeriodicProfile[int]
    overrides: tuple[tuple[Vertex, int], ...] = ()
    spine: tuple[tuple[int, int], ...] = ()
    _overrides: dict = field(init=False, repr=False, compare=False, hash=False)
    _spine: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in (ROOTED, UNROOTED):
            raise ValueError(f"unknown tree kind {self.kind!r}")
        if self.kind == UNROOTED and not self.arity.left_period:
            raise ValueError("unrooted trees need a leftward arity period")
        if self.kind == ROOTED:
            if self.arity.prefix and self.arity.lo < 0:
                raise ValueError("rooted trees have no negative generations")
            if self.spine:
                raise ValueError("rooted trees have no spine")
        values = set(self.arity.prefix_values()) | set(self.arity.period)
        if self.kind == UNROOTED:
            values |= set(self.arity.left_period)
        if any(int(a) != a or a < 1 for a in values):
            raise ValueError("arities must be positive integers (trees are leafless)")
        overrides = tuple((Vertex(v[0], tuple(v[1])), int(a)) for v, a in self.overrides)
        spine = tuple(sorted((int(k), int(s)) for k, s in self.spine))
        object.__setattr__(self, "overrides", overrides)
        object.__setattr__(self, "spine", spine)
        object.__setattr__(self, "_overrides", {})
        object.__setattr__(self, "_spine", dict(spine))
        if any(k < 1 for k, _ in spine):
            raise ValueError("spine entries are indexed by k >= 1")
        if len(self._spine) != len(spine):
            raise ValueError("duplicate spine entry")
        for v, a in overrides:
            if a < 1:
                raise ValueError("override arities must be >= 1")
            if v in self._overrides:
                raise ValueError(f"duplicate override at {v}")
            if self.kind == ROOTED and v.up:
                raise ValueError(f"rooted addresses have up=0, got {v}")
        # Overrides are validated one at a time so that an address may pass
        # through a vertex whose own arity is overridden earlier in the list.
        for v, a in sorted(overrides, key=lambda item: (len(item[0].down), item[0])):
            if self.canonical(v.up, v.down) != v:
                raise ValueError(f"override address {v} is not canonical")
            self._overrides[v] = a
        for k, s in spine:
            if s < 0 or s >= self.arity_at(Vertex(k, ())):
                raise ValueError(f"spine slot {s} out of range at parent^{k}(anchor)")

    # -- basic structure ---------------------------------------------------

    @property
    def rooted(self) -> bool:
        return self.kind == ROOTED

    @property
    def root(self) -> Vertex:
        if not self.rooted:
            raise NotApplicable("unrooted trees have no root")
        return ANCHOR

    def spine_slot(self, k: int) -> int:
        return self._spine.get(k, 0)

    def arity_at(self, v: Vertex) -> int:
        a = self._overrides.get(v)
        return a if a is not None else self.arity[v.generation]

    def arity_overrides(self) -> dict[Vertex, int]:
        return dict(self._overrides)

    def canonical(self, up: int, down=()) -> Vertex:
        """Canonical address of the vertex reached by going up ``up`` steps and then down ``down``."""
        if up < 0:
            raise ValueError("up must be nonnegative")
        if self.rooted and up:
            raise RootHasNoParent("rooted trees cannot walk above the root")
        v = Vertex(up, ())
        for s in down:
            v = self._child(v, s)
        return v

    def _child(self, v: Vertex, slot: int) -> Vertex:
        if not 0 <= slot < self.arity_at(v):
            raise SlotOutOfRange(f"slot {slot} out of range at {v} (arity {self.arity_at(v)})")
        if not v.down and v.up and slot == self.spine_slot(v.up):
            return Vertex(v.up - 1, ())
        return Vertex(v.up, v.down + (slot,))

    def is_canonical(self, v: Vertex) -> bool:
        try:
            return self.canonical(v.up, v.down) == v
        except (SlotOutOfRange, RootHasNoParent):
            return False

    def parent(self, v: Vertex) -> Vertex:
        if v.down:
            return Vertex(v.up, v.down[:-1])
        if self.rooted:
            raise RootHasNoParent("the root has no parent")
        return Vertex(v.up + 1, ())

    def children(self, v: Vertex) -> list[Vertex]:
        return [self._child(v, s) for s in range(self.arity_at(v))]

    def ancestor(self, v: Vertex, generation: int) -> Vertex:
        """The unique ancestor of ``v`` (or ``v`` itself) lying in ``generation``."""
        if generation > v.generation:
            raise ValueError(f"generation {generation} lies below {v}")
        if generation >= -v.up:
            return Vertex(v.up, v.down[: generation + v.up])
        if self.rooted:
            raise RootHasNoParent("no ancestors above the root")
        return Vertex(-generation, ())

    def is_descendant(self, u: Vertex, v: Vertex) -> bool:
        """True when ``u`` lies in Child^n(v) for some n >= 0."""
        return u.generation >= v.generation and self.ancestor(u, v.generation) == v

    # -- enumeration and counting ------------------------------------------

    def descendants(self, v: Vertex, n: int, cap: int = DEFAULT_CAP) -> Iterator[Vertex]:
        """Lazily enumerate Child^n(v) in slot order.

        Raises EnumerationCapExceeded before producing vertex number cap + 1.
        """
        if n < 0:
            raise ValueError("n must be nonnegative")
        count = 0
        stack = [(v, n)]
        while stack:
            w, depth = stack.pop()
            if depth == 0:
                count += 1
                if count > cap:
                    raise EnumerationCapExceeded(cap)
                yield w
                continue
            stack.extend((c, depth - 1) for c in reversed(self.children(w)))

    def overrides_below(self, v: Vertex) -> bool:
        return any(self.is_descendant(u, v) for u in self._overrides)

    def descendant_count(self, v: Vertex, n: int) -> int:
        """|Child^n(v)|, computed without enumerating override-free subtrees."""
        if n == 0:
            return 1
        if not self.overrides_below(v):
            g = v.generation
            return prod(self.arity[g + i] for i in range(n))
        return sum(self.descendant_count(c, n - 1) for c in self.children(v))

    def generation_size(self, n: int, cap: int = DEFAULT_CAP, window: int | None = None) -> GenerationSize:
        """Size of Gen_n, or of its part below parent^window(anchor) when ``window`` is given."""
        if self.rooted:
            if n < 0:
                return GenerationSize(0, True)
            count = self.descendant_count(ANCHOR, n)
        elif window is not None:
            if n < -window:
                return GenerationSize(0, True)
            count = self.descendant_count(Vertex(window, ()), n + window)
        elif not self.has_free_left_end():
            # Every spine vertex with two or more children adds a fresh branch
            # reaching Gen_n, and the leftward tail has infinitely many of them.
            return GenerationSize(cap, False)
        else:
            k = max(-n, 0, self.left_tail_depth())
            count = self.descendant_count(Vertex(k, ()), n + k)
        if count > cap:
            return GenerationSize(cap, False)
        return GenerationSize(count, True)

    def left_tail_depth(self) -> int:
        """Smallest K such that every spine vertex parent^k(anchor), k > K, takes its arity from the left tail."""
        spine_overrides = [v.up for v in self._overrides if not v.down]
        return max([0, -self.arity.lo] + spine_overrides)

    def has_free_left_end(self) -> bool:
        if self.rooted:
            raise NotApplicable("free left ends are defined for unrooted trees only")
        # Finitely many overrides cannot stop the generations far enough to
        # the left from being singletons.
        return all(a == 1 for a in self.arity.left_period)

    def max_arity(self) -> int:
        values = set(self.arity.prefix_values()) | set(self.arity.period) | set(self._overrides.values())
        if not self.rooted:
            values |= set(self.arity.left_period)
        return max(values)

    def is_symmetric(self) -> bool:
        return not self._overrides


def line(kind: str = ROOTED) -> TreeSpec:
    """The tree with one child per vertex: N_0 when rooted, Z when unrooted."""
    return TreeSpec(kind, PeriodicProfile.constant(1))


def regular(arity: int, kind: str = ROOTED) -> TreeSpec:
    return TreeSpec(kind, PeriodicProfile.constant(arity))
