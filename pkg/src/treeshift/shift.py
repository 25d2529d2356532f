"""Sequence spaces, weights, sparse vectors and the weighted backward shift."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EnumerationCapExceeded, NotADescendant, RootHasNoParent
from .profiles import PeriodicProfile
from .trees import TreeSpec, Vertex

L1, LP, C0 = "l1", "lp", "c0"


@dataclass(frozen=True)
class Space:
    """One of l^1, l^p (1 < p < inf) or c_0 over the vertex set."""

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind == LP:
            if self.p is None or not 1 < self.p < math.inf:
                raise ValueError("lp spaces need 1 < p < inf")
            object.__setattr__(self, "p", float(self.p))
        elif self.kind in (L1, C0):
            object.__setattr__(self, "p", 1.0 if self.kind == L1 else math.inf)
        else:
            raise ValueError(f"unknown space {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Space":
        """Parse ``l1``, ``c0`` or ``lp:P``."""
        text = text.strip().lower()
        if text in (L1, C0):
            return cls(text)
        if text.startswith("lp:"):
            return cls(LP, float(text[3:]))
        if text.startswith("l") and text[1:].replace(".", "", 1).isdigit():
            p = float(text[1:])
            return cls(L1) if p == 1 else cls(LP, p)
        raise ValueError(f"cannot parse space {text!r} (expected l1, lp:P or c0)")

    def __str__(self):
        return f"lp:{self.p:g}" if self.kind == LP else self.kind


def _scalar(x) -> complex:
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite scalar {x!r}")
    return z


@dataclass(frozen=True)
class Weights:
    """Nonzero weights: a per-generation profile plus finitely many vertex overrides.

    ``constant`` weights give the Rolewicz operator.
    """

    profile: PeriodicProfile[complex]
    overrides: tuple[tuple[Vertex, complex], ...] = ()
    mode: str = "per_generation"
    _overrides: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        profile = PeriodicProfile(
            tuple((g, _scalar(x)) for g, x in self.profile.prefix),
            tuple(_scalar(x) for x in self.profile.period),
            tuple(_scalar(x) for x in self.profile.left_period),
        )
        overrides = tuple((Vertex(v[0], tuple(v[1])), _scalar(x)) for v, x in self.overrides)
        values = profile.prefix_values() + list(profile.period) + list(profile.left_period)
        if any(x == 0 for x in values) or any(x == 0 for _, x in overrides):
            raise ValueError("weights must be nonzero")
        if self.mode not in ("constant", "per_generation"):
            raise ValueError(f"unknown weight mode {self.mode!r}")
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "overrides", overrides)
        table = dict(overrides)
        if len(table) != len(overrides):
            raise ValueError("duplicate weight override")
        object.__setattr__(self, "_overrides", table)

    @classmethod
    def constant(cls, value, overrides=()) -> "Weights":
        return cls(PeriodicProfile.constant(value), tuple(overrides), "constant")

    @classmethod
    def per_generation(cls, prefix=(), period=(), left_period=(), overrides=()) -> "Weights":
        if not left_period:
            left_period = period
        return cls(PeriodicProfile.build(prefix, period, left_period), tuple(overrides))

    @property
    def is_constant(self) -> bool:
        return self.mode == "constant" and not self.overrides

    def is_symmetric(self) -> bool:
        return not self.overrides

    def override_at(self, v: Vertex):
        return self._overrides.get(v)

    def __call__(self, v: Vertex) -> complex:
        """The weight attached to the edge parent(v) -> v."""
        w = self._overrides.get(v)
        return w if w is not None else self.profile[v.generation]

    def check(self, tree: TreeSpec):
        for v, _ in self.overrides:
            if not tree.is_canonical(v):
                raise ValueError(f"weight override address {v} is not a vertex of the tree")


def weight_at(v: Vertex, weights: Weights) -> complex:
    return weights(v)


class SparseVector:
    """A finitely supported scalar sequence over the vertices.

    Entries equal to zero are never stored, so two vectors are equal exactly
    when their stored entries are.
    """

    __slots__ = ("_data",)

    def __init__(self, entries: Mapping[Vertex, complex] | Iterable[tuple[Vertex, complex]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data = {}
        for v, x in items:
            x = _scalar(x)
            if x != 0:
                data[Vertex(v[0], tuple(v[1]))] = x
        self._data = data

    @classmethod
    def basis(cls, v: Vertex) -> "SparseVector":
        return cls({v: 1.0})

    @classmethod
    def _raw(cls, data: dict) -> "SparseVector":
        out = cls.__new__(cls)
        out._data = {v: x for v, x in data.items() if x != 0}
        return out

    def __getitem__(self, v: Vertex) -> complex:
        return self._data.get(v, 0j)

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __bool__(self):
        return bool(self._data)

    def items(self):
        return self._data.items()

    def support(self) -> list[Vertex]:
        return sorted(self._data)

    def __eq__(self, other):
        return isinstance(other, SparseVector) and self._data == other._data

    def __repr__(self):
        inner = ", ".join(f"{v}: {x:g}" for v, x in sorted(self._data.items()))
        return f"SparseVector({{{inner}}})"

    def __add__(self, other: "SparseVector") -> "SparseVector":
        out = dict(self._data)
        for v, x in other._data.items():
            out[v] = out.get(v, 0) + x
        return SparseVector._raw(out)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-other)

    def __neg__(self):
        return SparseVector._raw({v: -x for v, x in self._data.items()})

    def __mul__(self, c) -> "SparseVector":
        c = _scalar(c)
        return SparseVector._raw({v: c * x for v, x in self._data.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / _scalar(c))

    def restrict(self, vertices) -> "SparseVector":
        keep = set(vertices)
        return SparseVector._raw({v: x for v, x in self._data.items() if v in keep})

    def max_abs_diff(self, other: "SparseVector") -> float:
        return max((abs(x) for _, x in (self - other).items()), default=0.0)


def norm(f: SparseVector, space: Space) -> float:
    mags = [abs(x) for _, x in f.items()]
    if not mags:
        return 0.0
    if space.kind == C0:
        return max(mags)
    if space.kind == L1:
        return math.fsum(mags)
    p = space.p
    # Scale by the largest entry so that |x|^p cannot overflow or underflow.
    top = max(mags)
    return top * math.fsum((m / top) ** p for m in mags) ** (1 / p)


def path_weight(v: Vertex, u: Vertex, weights: Weights, tree: TreeSpec) -> complex:
    """Product of the weights along the path from ``v`` down to ``u``; 1 when u == v."""
    if not tree.is_descendant(u, v):
        raise NotADescendant(f"{u} is not a descendant of {v}")
    out = 1 + 0j
    for g in range(v.generation + 1, u.generation + 1):
        out *= weights(tree.ancestor(u, g))
    return out


def apply_shift(f: SparseVector, weights: Weights, tree: TreeSpec) -> SparseVector:
    """[B f](v) = sum over children u of v of weight(u) f(u)."""
    out = defaultdict(complex)
    for u, x in f.items():
        try:
            parent = tree.parent(u)
        except RootHasNoParent:
            continue
        out[parent] += weights(u) * x
    return SparseVector._raw(out)


def apply_shift_power(f: SparseVector, n: int, weights: Weights, tree: TreeSpec) -> SparseVector:
    """B^n f, using [B^n f](v) = sum over u in Child^n(v) of path_weight(v, u) f(u)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return f
    out = defaultdict(complex)
    for u, x in f.items():
        g = u.generation - n
        if tree.rooted and g < 0:
            continue
        top = tree.ancestor(u, g)
        out[top] += path_weight(top, u, weights, tree) * x
    return SparseVector._raw(out)


def rolewicz_bounded(tree: TreeSpec, space: Space) -> bool:
    """Boundedness of a constant-weight shift.

    Always bounded on l^1; on l^p and c_0 bounded iff the arities are bounded,
    which eventually periodic profiles always are.
    """
    if space.kind == L1:
        return True
    return math.isfinite(tree.max_arity())


def weighted_descendants(w: Vertex, depth: int, weights: Weights, tree: TreeSpec, cap: int):
    """Yield (u, path_weight(w, u)) for u in Child^depth(w), in slot order.

    Path weights are accumulated along the walk instead of recomputed per vertex.
    """
    count = 0
    stack = [(w, depth, 1 + 0j)]
    while stack:
        u, d, lam = stack.pop()
        if d == 0:
            count += 1
            if count > cap:
                raise EnumerationCapExceeded(cap)
            yield u, lam
            continue
        for c in reversed(tree.children(u)):
            stack.append((c, d - 1, lam * weights(c)))
