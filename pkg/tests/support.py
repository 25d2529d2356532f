"""Random spec generators and brute-force oracles shared by the tests."""

import random

from treeshift.profiles import PeriodicProfile
from treeshift.shift import SparseVector, Weights, path_weight
from treeshift.trees import ROOTED, UNROOTED, TreeSpec, Vertex


def path_from_top(tree, v, top_k):
    """Slot word leading from parent^top_k(anchor) down to v.

    Built straight from the spine table, independently of canonicalization.
    """
    assert v.up <= top_k
    word = [tree.spine_slot(k) for k in range(top_k, v.up, -1)]
    return tuple(word) + tuple(v.down)


def direct_power(f, n, weights, tree):
    """[B^n f](w) = sum over u in Child^n(w) of path_weight(w, u) f(u), evaluated per vertex."""
    out = {}
    candidates = set()
    for u in f:
        g = u.generation - n
        if tree.rooted and g < 0:
            continue
        candidates.add(tree.ancestor(u, g))
    for w in candidates:
        out[w] = sum(path_weight(w, u, weights, tree) * f[u] for u in tree.descendants(w, n))
    return SparseVector(out)


def random_profile(rng, values, rooted, width=3):
    lo = rng.randint(-width, 0) if not rooted else 0
    size = rng.randint(0, width)
    prefix = [(lo + i, rng.choice(values)) for i in range(size)]
    period = [rng.choice(values) for _ in range(rng.randint(1, 3))]
    left = [] if rooted else [rng.choice(values) for _ in range(rng.randint(1, 2))]
    return PeriodicProfile.build(prefix, period, left)


def random_tree(rng, kind=None, arities=(1, 1, 2, 2, 3), n_overrides=2):
    kind = kind or rng.choice([ROOTED, UNROOTED])
    rooted = kind == ROOTED
    profile = random_profile(rng, arities, rooted)
    spine = []
    if not rooted:
        for k in range(1, 5):
            a = profile[-k]
            if a > 1 and rng.random() < 0.5:
                spine.append((k, rng.randrange(a)))
    tree = TreeSpec(kind, profile, (), tuple(spine))
    overrides = {}
    for _ in range(n_overrides):
        v = random_vertex(rng, tree, max_up=0 if rooted else 3, max_depth=3)
        # Only grow arities, so earlier override addresses stay valid.
        overrides[v] = tree.arity_at(v) + rng.choice([0, 1, 2])
        tree = TreeSpec(kind, profile, tuple(overrides.items()), tuple(spine))
    return tree


def random_vertex(rng, tree, max_up=3, max_depth=3):
    up = 0 if tree.rooted else rng.randint(0, max_up)
    v = Vertex(up, ())
    for _ in range(rng.randint(0, max_depth)):
        v = rng.choice(tree.children(v))
    return v


def random_scalar(rng, lo=0.5, hi=1.5, complex_=True):
    import cmath

    r = rng.uniform(lo, hi) * rng.choice([1, -1])
    if complex_ and rng.random() < 0.5:
        return r * cmath.exp(1j * rng.uniform(0, 6.283))
    return complex(r)


def random_weights(rng, tree, n_overrides=2):
    values = [random_scalar(rng) for _ in range(4)]
    profile = random_profile(rng, values, tree.rooted)
    if tree.rooted:
        profile = PeriodicProfile(profile.prefix, profile.period, (values[0],))
    overrides = {}
    for _ in range(n_overrides):
        v = random_vertex(rng, tree)
        overrides[v] = random_scalar(rng)
    return Weights(profile, tuple(overrides.items()))


def random_vector(rng, tree, size=4, max_up=3, max_depth=5):
    entries = {}
    for _ in range(size):
        entries[random_vertex(rng, tree, max_up, max_depth)] = random_scalar(rng, -2, 2)
    return SparseVector(entries)


def seeded(seed):
    return random.Random(seed)
