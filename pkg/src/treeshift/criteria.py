"""Chain recurrence criteria for weighted backward shifts on trees.

Two divergence conditions are checked at a vertex v:

* the root condition  sum_{n>=1} S_n(v) = inf, where S_n(v) aggregates
  |lambda(v->u)| over u in Child^n(v) (a sup on l^1, a sum of p*-th powers
  on l^p, a plain sum on c_0);
* the left condition (unrooted trees only)  lim_n L_n(v) = inf, where L_n(v)
  aggregates |lambda(P->u) / lambda(P->v)| over u in Child^j(P), j < n,
  with P = parent^n(v).

Rooted trees are chain recurrent iff the root condition holds; unrooted
trees iff both hold.  Truncated partial sums can certify divergence only
heuristically (a threshold); convergence is only ever certified by an exact
rule on eventually periodic symmetric regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import NotApplicable, UnboundedOperator
from .profiles import PeriodicProfile, left_periodic_start, right_periodic_start
from .shift import C0, L1, Space, Weights, rolewicz_bounded
from .trees import ANCHOR, DEFAULT_CAP, TreeSpec, Vertex

# Slack on log(period ratio) so that a boundary ratio of exactly 1, which
# floating point inputs can only approximate, still counts as divergent.
LOG_RATIO_TOL = 1e-12


class Series(str, Enum):
    DIVERGES = "Diverges"
    CONVERGES = "Converges"
    INCONCLUSIVE = "Inconclusive"


class Verdict(str, Enum):
    CHAIN_RECURRENT = "ChainRecurrent"
    NOT_CHAIN_RECURRENT = "NotChainRecurrent"
    INCONCLUSIVE = "Inconclusive"
    NOT_COVERED = "NotCovered"


THRESHOLD_RULE = "partial-sum-threshold"
PERIOD_RULE = "geometric-period-ratio"
CLOSED_FORM_RULE = "closed-form-corollary"


@dataclass(frozen=True)
class TruncationPolicy:
    n_max: int = 64
    cap: int = DEFAULT_CAP
    divergence_threshold: float = 1e6
    margin: float = 1.0
    # When false, only the partial-sum threshold is consulted.
    period_rule: bool = True

    def __post_init__(self):
        if self.n_max < 1 or self.cap < 1 or self.divergence_threshold <= 0 or self.margin < 1:
            raise ValueError("truncation parameters must be positive (margin >= 1)")


@dataclass(frozen=True)
class SeriesVerdict:
    verdict: Series
    rule: str | None
    partial_sums: tuple[float, ...]
    n_max: int
    threshold: float
    log_ratio: float | None = None

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "rule": self.rule,
            "partial_sums": list(self.partial_sums),
            "n_max": self.n_max,
            "thresholds": {"divergence": self.threshold, "log_ratio_tol": LOG_RATIO_TOL},
            "log_ratio": self.log_ratio,
        }


def dual_exponent(space: Space) -> float:
    """Conjugate exponent p* with 1/p + 1/p* = 1.

    l^1 gives inf, which stands for the sup taken over each level; c_0 gives 1.
    """
    if space.kind == L1:
        return math.inf
    if space.kind == C0:
        return 1.0
    return space.p / (space.p - 1)


class LevelSums:
    """Per-level aggregates of |lambda(w -> u)| over u in Child^d(w).

    With exponent q < inf the aggregate is sum |lambda(w->u)|^q, with q = inf
    it is max |lambda(w->u)|.  Subtrees free of overrides are symmetric, so
    their aggregates are products of profile values; only the finitely many
    override paths are expanded vertex by vertex.
    """

    def __init__(self, tree: TreeSpec, weights: Weights, exponent: float):
        self.tree = tree
        self.weights = weights
        self.q = exponent
        self._arity_sites = list(tree.arity_overrides())
        self._weight_sites = [v for v, _ in weights.overrides]
        self._plain: dict[Vertex, bool] = {}
        self._cache: dict[tuple[Vertex, int], float] = {}
        self._argmax: dict[tuple[Vertex, int], Vertex] = {}

    def plain(self, w: Vertex) -> bool:
        hit = self._plain.get(w)
        if hit is None:
            t = self.tree
            hit = not any(t.is_descendant(u, w) for u in self._arity_sites) and not any(
                u != w and t.is_descendant(u, w) for u in self._weight_sites
            )
            self._plain[w] = hit
        return hit

    def _mag(self, lam: complex) -> float:
        return abs(lam) if self.q == math.inf else abs(lam) ** self.q

    def __call__(self, w: Vertex, d: int) -> float:
        key = (w, d)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if d == 0:
            out = 1.0
        elif self.plain(w):
            # Extend the cached product level by level from the deepest known one.
            g = w.generation
            profile = self.weights.profile
            i = d - 1
            while i > 0 and (w, i) not in self._cache:
                i -= 1
            out = self._cache.get((w, i), 1.0)
            for i in range(i, d):
                out *= self._mag(profile[g + i + 1])
                if self.q != math.inf:
                    out *= self.tree.arity[g + i]
                self._cache[(w, i + 1)] = out
        else:
            parts = (self._mag(self.weights(c)) * self(c, d - 1) for c in self.tree.children(w))
            out = max(parts) if self.q == math.inf else math.fsum(parts)
        self._cache[key] = out
        return out

    def argmax(self, w: Vertex, d: int) -> Vertex:
        """A vertex of Child^d(w) maximizing |lambda(w->u)|; lowest address on ties.

        Only meaningful in sup mode.
        """
        if self.q != math.inf:
            raise ValueError("argmax needs the sup aggregate (exponent inf)")
        key = (w, d)
        best = self._argmax.get(key)
        if best is not None:
            return best
        tree = self.tree
        if d == 0:
            best = w
        elif self.plain(w):
            # Every vertex of the level has the same path weight; the lowest
            # address follows the smallest child at every step.
            best = w
            for _ in range(d):
                best = min(tree.children(best))
        else:
            scored = [(-abs(self.weights(c)) * self(c, d - 1), self.argmax(c, d - 1)) for c in tree.children(w)]
            best = min(scored)[1]
        self._argmax[key] = best
        return best


def root_terms(v: Vertex, tree: TreeSpec, weights: Weights, space: Space, n_max: int) -> list[float]:
    """Terms n = 1..n_max of the root condition series at v."""
    sums = LevelSums(tree, weights, dual_exponent(space))
    return [sums(v, n) for n in range(1, n_max + 1)]


def left_terms(v: Vertex, tree: TreeSpec, weights: Weights, space: Space, n_max: int) -> list[float]:
    """L_n(v) for n = 1..n_max (nondecreasing in n)."""
    if tree.rooted:
        raise NotApplicable("the left condition concerns unrooted trees only")
    q = dual_exponent(space)
    sums = LevelSums(tree, weights, q)
    out = []
    spine_weight = 1.0  # |lambda(parent^n(v) -> v)|
    walker = v
    for n in range(1, n_max + 1):
        spine_weight *= abs(weights(walker))
        top = tree.parent(walker)
        scale = spine_weight if q == math.inf else spine_weight**q
        out.append(math.fsum(sums(top, j) for j in range(n)) / scale)
        walker = top
    return out


def _partial_sums(terms: Sequence[float]) -> tuple[float, ...]:
    out, acc = [], 0.0
    for t in terms:
        acc += t
        out.append(acc)
    return tuple(out)


def right_log_ratio(tree: TreeSpec, weights: Weights, q: float) -> float:
    """log of the product of consecutive root-series term ratios over one joint period.

    Past both profile windows the term ratio at generation g is
    arity(g-1) |lambda_g|^q (or |lambda_g| in sup mode).
    """
    start, period = right_periodic_start(tree.arity, weights.profile)
    start += 1
    total = 0.0
    for g in range(start, start + period):
        if q == math.inf:
            total += math.log(abs(weights.profile[g]))
        else:
            total += math.log(tree.arity[g - 1]) + q * math.log(abs(weights.profile[g]))
    return total


def left_log_ratio(tree: TreeSpec, weights: Weights, q: float) -> float:
    """log growth over one leftward period of the left-condition terms.

    Returns +inf when the leftward arity tail branches and q < inf, since the
    branch counts then blow up every term.
    """
    if q != math.inf and any(a > 1 for a in tree.arity.left_period):
        return math.inf
    start, period = left_periodic_start(tree.arity, weights.profile)
    return -math.fsum(math.log(abs(weights.profile[g])) for g in range(start - period + 1, start + 1))


def _decide(log_ratio: float) -> Series:
    return Series.DIVERGES if log_ratio >= -LOG_RATIO_TOL else Series.CONVERGES


def _left_region_plain(v: Vertex, tree: TreeSpec, weights: Weights) -> bool:
    g = v.generation
    return not any(u.generation < g for u in tree.arity_overrides()) and not any(
        u.generation <= g for u, _ in weights.overrides
    )


def series_root_condition(v: Vertex, tree: TreeSpec, weights: Weights, space: Space,
                          policy: TruncationPolicy = TruncationPolicy()) -> SeriesVerdict:
    q = dual_exponent(space)
    sums = LevelSums(tree, weights, q)
    partial = _partial_sums([sums(v, n) for n in range(1, policy.n_max + 1)])
    common = dict(partial_sums=partial, n_max=policy.n_max, threshold=policy.divergence_threshold)
    if policy.period_rule and sums.plain(v):
        lr = right_log_ratio(tree, weights, q)
        return SeriesVerdict(_decide(lr), PERIOD_RULE, log_ratio=lr, **common)
    if partial[-1] > policy.divergence_threshold:
        return SeriesVerdict(Series.DIVERGES, THRESHOLD_RULE, **common)
    return SeriesVerdict(Series.INCONCLUSIVE, None, **common)


def series_left_condition(v: Vertex, tree: TreeSpec, weights: Weights, space: Space,
                          policy: TruncationPolicy = TruncationPolicy()) -> SeriesVerdict:
    q = dual_exponent(space)
    terms = tuple(left_terms(v, tree, weights, space, policy.n_max))
    common = dict(partial_sums=terms, n_max=policy.n_max, threshold=policy.divergence_threshold)
    if policy.period_rule and _left_region_plain(v, tree, weights):
        lr = left_log_ratio(tree, weights, q)
        return SeriesVerdict(_decide(lr), PERIOD_RULE, log_ratio=lr, **common)
    quartile = terms[(3 * policy.n_max) // 4:]
    if all(t > policy.divergence_threshold for t in quartile):
        return SeriesVerdict(Series.DIVERGES, THRESHOLD_RULE, **common)
    return SeriesVerdict(Series.INCONCLUSIVE, None, **common)


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    vertex: Vertex
    root_condition: SeriesVerdict
    left_condition: SeriesVerdict | None = None
    closed_form: Verdict | None = None

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "vertex": {"up": self.vertex.up, "down": list(self.vertex.down)},
            "closed_form": self.closed_form.value if self.closed_form else None,
            "root_condition": self.root_condition.to_dict(),
            "left_condition": self.left_condition.to_dict() if self.left_condition else None,
        }


def _combine(conditions) -> Verdict:
    if any(c == Series.CONVERGES for c in conditions):
        return Verdict.NOT_CHAIN_RECURRENT
    if all(c == Series.DIVERGES for c in conditions):
        return Verdict.CHAIN_RECURRENT
    return Verdict.INCONCLUSIVE


def check_bounded(tree: TreeSpec, weights: Weights, space: Space):
    if weights.mode == "constant" and not rolewicz_bounded(tree, space):
        raise UnboundedOperator("the Rolewicz operator is unbounded on this space")


def classify(tree: TreeSpec, weights: Weights, space: Space, v: Vertex = ANCHOR,
             policy: TruncationPolicy = TruncationPolicy()) -> Classification:
    check_bounded(tree, weights, space)
    weights.check(tree)
    root = series_root_condition(v, tree, weights, space, policy)
    if tree.rooted:
        return Classification(_combine([root.verdict]), v, root, None, classify_closed_form(tree, weights, space, v))
    left = series_left_condition(v, tree, weights, space, policy)
    return Classification(_combine([root.verdict, left.verdict]), v, root, left,
                          classify_closed_form(tree, weights, space, v))


@dataclass(frozen=True)
class ClosedForm:
    verdict: Verdict
    conditions: dict = field(default_factory=dict)


def closed_form_conditions(tree: TreeSpec, weights: Weights, space: Space) -> ClosedForm:
    """Closed-form verdict for symmetric trees with symmetric eventually periodic weights.

    The root series has eventually geometric terms; it diverges iff the
    product of term ratios over one period is >= 1.  The left condition
    always holds when the leftward tail branches (outside l^1); otherwise
    it reduces to divergence of the leftward products of 1/|lambda|.
    """
    if not (tree.is_symmetric() and weights.is_symmetric()):
        return ClosedForm(Verdict.NOT_COVERED)
    q = dual_exponent(space)
    lr = right_log_ratio(tree, weights, q)
    conditions = {"root": _decide(lr), "root_log_ratio": lr}
    verdicts = [conditions["root"]]
    if not tree.rooted:
        ll = left_log_ratio(tree, weights, q)
        conditions.update(left=_decide(ll), left_log_ratio=ll)
        verdicts.append(conditions["left"])
    return ClosedForm(_combine(verdicts), conditions)


def classify_closed_form(tree: TreeSpec, weights: Weights, space: Space, v: Vertex = ANCHOR) -> Verdict:
    # The verdict of a covered instance does not depend on v.
    return closed_form_conditions(tree, weights, space).verdict


# -- shift invariance of products of two-tailed sequences -------------------


def _forward_log_ratio(a: PeriodicProfile, m: int) -> float:
    """log of one period's product, taken from the first right-tail index >= m."""
    start = max(m, a.hi + 1)
    return math.fsum(math.log(a[i]) for i in range(start, start + len(a.period)))


def _backward_log_ratio(a: PeriodicProfile, m: int) -> float:
    start = min(m, a.lo - 1)
    return math.fsum(math.log(a[i]) for i in range(start - len(a.left_period) + 1, start + 1))


def forward_partial_sums(a: PeriodicProfile, m: int, k: int) -> list[float]:
    """Partial sums of sum_{n>=1} prod_{i=m}^{m+n-1} a_i, up to n = k."""
    out, prod_, acc = [], 1.0, 0.0
    for n in range(1, k + 1):
        prod_ *= a[m + n - 1]
        acc += prod_
        out.append(acc)
    return out


def backward_partial_sums(a: PeriodicProfile, m: int, k: int) -> list[float]:
    """Partial sums of sum_{n>=0} prod_{i=m-n+1}^{m} a_i, up to n = k."""
    out, prod_, acc = [], 1.0, 1.0
    out.append(acc)
    for n in range(1, k + 1):
        prod_ *= a[m - n + 1]
        acc += prod_
        out.append(acc)
    return out


def _shift_identity_error(a: PeriodicProfile, m: int, k: int) -> float:
    """Relative error of the identities linking forward partial sums at m to those at 1."""
    direct = forward_partial_sums(a, m, k)[-1]
    if m > 1:
        base = forward_partial_sums(a, 1, m + k - 1)
        head = math.prod(a[i] for i in range(1, m))
        via = (base[-1] - base[m - 2]) / head
    elif m < 1:
        lead = forward_partial_sums(a, m, 1 - m)[-1]
        via = lead + math.prod(a[i] for i in range(m, 1)) * forward_partial_sums(a, 1, m + k - 1)[-1]
    else:
        via = direct
    return abs(direct - via) / max(abs(direct), 1e-300)


def shift_invariance_oracle(a: PeriodicProfile, m_list: Sequence[int], k: int = 40) -> dict:
    """Decide the forward and backward product series at every m and compare.

    The reference verdicts are the forward series at m = 1 and the backward
    series at m = -1.  Each verdict is taken independently from the period
    beginning nearest to m.  The report also checks the partial-sum identities
    that relate the series at m to the series at 1.
    """
    if any(x <= 0 for x in a.prefix_values() + list(a.period) + list(a.left_period)):
        raise ValueError("profile terms must be positive")
    ref_forward = _decide(_forward_log_ratio(a, 1))
    ref_backward = _decide(_backward_log_ratio(a, -1))
    rows = []
    for m in m_list:
        if m < 1 and k <= 1 - m:
            raise ValueError("k must exceed 1 - m")
        rows.append({
            "m": m,
            "forward": _decide(_forward_log_ratio(a, m)).value,
            "backward": _decide(_backward_log_ratio(a, m)).value,
            "identity_error": _shift_identity_error(a, m, k),
        })
    consistent = all(r["forward"] == ref_forward.value and r["backward"] == ref_backward.value for r in rows)
    return {
        "forward_at_1": ref_forward.value,
        "backward_at_minus_1": ref_backward.value,
        "rows": rows,
        "consistent": consistent,
        "identity_max_rel_error": max((r["identity_error"] for r in rows), default=0.0),
    }
