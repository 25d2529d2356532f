"""Explicit delta-chains between canonical basis vectors and zero.

A chain from 0 to e_v spreads a unit dual vector sigma over the levels
Child^j(v), j < n, scaled by 1/t, so that the shifted perturbations add up
to t/t * e_v.  A chain from e_v to 0 does the same above v, at
P = parent^m(v), with coefficients normalized by lambda(P -> v) so that the
perturbations cancel the image B^m e_v exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .criteria import LevelSums, TruncationPolicy, check_bounded, dual_exponent
from .errors import CriterionNotMetWithinTruncation
from .shift import C0, L1, SparseVector, Space, Weights, apply_shift, apply_shift_power, norm, weighted_descendants
from .trees import TreeSpec, Vertex

FROM_ZERO = "FromZero"
TO_ZERO = "ToZero"
TRAJECTORY = "Trajectory"

ENDPOINT_TOL = 1e-9


@dataclass(frozen=True)
class ChainWitness:
    direction: str
    levels: int
    scale: float  # t for FromZero, s for ToZero
    dual: SparseVector  # sigma or gamma
    perturbations: tuple[SparseVector, ...]
    selection: str = ""


@dataclass(frozen=True)
class DeltaChain:
    delta: float
    space: Space
    vectors: tuple[SparseVector, ...]
    witnesses: tuple[ChainWitness, ...] = field(default=())

    @property
    def length(self) -> int:
        return len(self.vectors) - 1

    @property
    def start(self) -> SparseVector:
        return self.vectors[0]

    @property
    def end(self) -> SparseVector:
        return self.vectors[-1]


@dataclass(frozen=True)
class ChainReport:
    valid: bool
    delta: float
    defects: tuple[SparseVector, ...]
    defect_norms: tuple[float, ...]
    reconstruction_error: float

    @property
    def invalid_steps(self) -> list[int]:
        return [l for l, x in enumerate(self.defect_norms, start=1) if not x < self.delta]


def verify_chain(vectors, delta: float, tree: TreeSpec, weights: Weights, space: Space) -> ChainReport:
    """Check every step defect g_l = f_l - B f_{l-1} against delta.

    Also rebuilds f_n as B^n f_0 + sum_l B^{n-l} g_l and reports the norm of
    its difference from the recorded f_n.
    """
    vectors = list(vectors)
    if len(vectors) < 2:
        raise ValueError("a chain needs at least two vectors")
    defects = tuple(f - apply_shift(prev, weights, tree) for prev, f in zip(vectors, vectors[1:]))
    norms = tuple(norm(g, space) for g in defects)
    n = len(defects)
    rebuilt = apply_shift_power(vectors[0], n, weights, tree)
    for l, g in enumerate(defects, start=1):
        rebuilt = rebuilt + apply_shift_power(g, n - l, weights, tree)
    error = norm(rebuilt - vectors[-1], space)
    return ChainReport(all(x < delta for x in norms), delta, defects, norms, error)


# -- dual witnesses ----------------------------------------------------------


def _phase(lam: complex) -> complex:
    """Unit scalar w with lam * w = |lam|."""
    return lam.conjugate() / abs(lam)


def _dual(top: Vertex, levels: int, divisor: complex, tree, weights, space, cap, sums=None):
    """Dual vector over Child^j(top), j < levels, for coefficients lambda(top->u)/divisor.

    Returns (vector, value, selection) where value = sum coefficient * vector,
    a nonnegative real.
    """
    q = dual_exponent(space)
    entries = {}
    if space.kind == L1:
        sums = sums or LevelSums(tree, weights, math.inf)
        for j in range(levels):
            u = sums.argmax(top, j)
            coeff = _path(top, u, tree, weights) / divisor
            entries[u] = _phase(coeff)
        selection = "level-argmax point masses"
    elif space.kind == C0:
        for j in range(levels):
            for u, lam in weighted_descendants(top, j, weights, tree, cap):
                entries[u] = _phase(lam / divisor)
        selection = "phase-aligned unit entries"
    else:
        coeffs = {}
        for j in range(levels):
            for u, lam in weighted_descendants(top, j, weights, tree, cap):
                coeffs[u] = lam / divisor
        mags = {u: abs(c) for u, c in coeffs.items()}
        peak = max(mags.values())
        # Hoelder equality: sigma(u) ~ conj-phase * |c(u)|^(q-1), normalized in l^p.
        raw = {u: (m / peak) ** (q - 1) for u, m in mags.items()}
        z = math.fsum(r**space.p for r in raw.values()) ** (1 / space.p)
        entries = {u: _phase(coeffs[u]) * raw[u] / z for u in coeffs}
        selection = "hoelder equality"
    pieces = []
    for u, x in entries.items():
        c = _path(top, u, tree, weights) / divisor
        pieces.append((c * x).real)
    value = math.fsum(pieces)
    return SparseVector(entries), value, selection


def _path(top: Vertex, u: Vertex, tree: TreeSpec, weights: Weights) -> complex:
    out = 1 + 0j
    for g in range(top.generation + 1, u.generation + 1):
        out *= weights(tree.ancestor(u, g))
    return out


def dual_witness_sigma(v: Vertex, levels: int, tree: TreeSpec, weights: Weights, space: Space,
                       cap: int = TruncationPolicy().cap) -> tuple[SparseVector, float]:
    """The witness sigma on Child^j(v), j < levels, and t = sum lambda(v->u) sigma(u)."""
    sigma, t, _ = _dual(v, levels, 1.0, tree, weights, space, cap)
    return sigma, t


def _norm_of_levels(level_values, q: float) -> float:
    total = math.fsum(level_values)
    if q == math.inf or q == 1:
        return total
    return total ** (1 / q)


def _levels(vector: SparseVector, top: Vertex) -> dict[int, SparseVector]:
    split: dict[int, dict] = {}
    for u, x in vector.items():
        split.setdefault(u.generation - top.generation, {})[u] = x
    return {j: SparseVector(d) for j, d in split.items()}


def _checked(vectors, endpoint, delta, tree, weights, space) -> bool:
    report = verify_chain(vectors, delta, tree, weights, space)
    return report.valid and norm(vectors[-1] - endpoint, space) < ENDPOINT_TOL


def build_chain_from_zero(v: Vertex, delta: float, tree: TreeSpec, weights: Weights, space: Space,
                          policy: TruncationPolicy = TruncationPolicy()) -> DeltaChain:
    """A delta-chain 0 = f_0, ..., f_n = e_v with f_l = B f_{l-1} + g_l."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    check_bounded(tree, weights, space)
    q = dual_exponent(space)
    sums = LevelSums(tree, weights, q)
    target = SparseVector.basis(v)
    level_values = []
    best = 0.0
    for n in range(1, policy.n_max + 1):
        level_values.append(sums(v, n - 1))
        best = _norm_of_levels(level_values, q)
        if best * delta <= policy.margin:
            continue
        sigma, t, selection = _dual(v, n, 1.0, tree, weights, space, policy.cap,
                                    sums if q == math.inf else None)
        by_level = _levels(sigma, v)
        perturbations = tuple(by_level.get(n - l, SparseVector()) / t for l in range(1, n + 1))
        vectors = [SparseVector()]
        for g in perturbations:
            vectors.append(apply_shift(vectors[-1], weights, tree) + g)
        if _checked(vectors, target, delta, tree, weights, space):
            witness = ChainWitness(FROM_ZERO, n, t, sigma, perturbations, selection)
            return DeltaChain(delta, space, tuple(vectors), (witness,))
    raise CriterionNotMetWithinTruncation(
        f"t reached only {best:.6g} <= 1/delta = {1 / delta:.6g} within {policy.n_max} levels", best, policy.n_max)


def _trajectory_to_zero(v: Vertex, delta: float, tree, weights, space) -> DeltaChain:
    vectors = [SparseVector.basis(v)]
    while vectors[-1]:
        vectors.append(apply_shift(vectors[-1], weights, tree))
    zeros = tuple(SparseVector() for _ in vectors[1:])
    witness = ChainWitness(TRAJECTORY, len(vectors) - 1, 0.0, SparseVector(), zeros, "exact orbit through the root")
    return DeltaChain(delta, space, tuple(vectors), (witness,))


def build_chain_to_zero(v: Vertex, delta: float, tree: TreeSpec, weights: Weights, space: Space,
                        policy: TruncationPolicy = TruncationPolicy()) -> DeltaChain:
    """A delta-chain e_v = p_0, ..., p_m = 0 with p_j = B p_{j-1} + q_j.

    On rooted trees the construction is tried only while parent^m(v) exists;
    otherwise the exact orbit e_v, B e_v, ..., 0 is returned, whose steps
    have zero defect.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    check_bounded(tree, weights, space)
    q = dual_exponent(space)
    sums = LevelSums(tree, weights, q)
    start = SparseVector.basis(v)
    depth = len(v.down) if tree.rooted else policy.n_max
    best = 0.0
    spine = 1 + 0j  # lambda(parent^m(v) -> v)
    walker = v
    for m in range(1, min(depth, policy.n_max) + 1):
        spine = weights(walker) * spine
        top = tree.parent(walker)
        walker = top
        best = _norm_of_levels([sums(top, j) for j in range(m)], q) / abs(spine)
        if best * delta <= policy.margin:
            continue
        gamma, s, selection = _dual(top, m, spine, tree, weights, space, policy.cap,
                                    sums if q == math.inf else None)
        by_level = _levels(gamma, top)
        perturbations = tuple(-by_level.get(m - j, SparseVector()) / s for j in range(1, m + 1))
        vectors = [start]
        for g in perturbations:
            vectors.append(apply_shift(vectors[-1], weights, tree) + g)
        if _checked(vectors, SparseVector(), delta, tree, weights, space):
            witness = ChainWitness(TO_ZERO, m, s, gamma, perturbations, selection)
            return DeltaChain(delta, space, tuple(vectors), (witness,))
    if tree.rooted:
        return _trajectory_to_zero(v, delta, tree, weights, space)
    raise CriterionNotMetWithinTruncation(
        f"s reached only {best:.6g} <= 1/delta = {1 / delta:.6g} within {policy.n_max} levels", best, policy.n_max)


def build_loop_chain(v: Vertex, delta: float, tree: TreeSpec, weights: Weights, space: Space,
                     policy: TruncationPolicy = TruncationPolicy()) -> DeltaChain:
    """e_v -> 0 -> e_v, joining the two halves at 0 (B 0 = 0)."""
    down = build_chain_to_zero(v, delta, tree, weights, space, policy)
    up = build_chain_from_zero(v, delta, tree, weights, space, policy)
    return DeltaChain(delta, space, down.vectors + up.vectors[1:], down.witnesses + up.witnesses)
