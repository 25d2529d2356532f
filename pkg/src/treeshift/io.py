"""JSON encodings of trees, weights, vectors, chains and verdicts."""

from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path

from .chains import ChainReport, ChainWitness, DeltaChain
from .profiles import PeriodicProfile
from .shift import Space, SparseVector, Weights
from .trees import TreeSpec, Vertex


def address_to_json(v: Vertex) -> dict:
    return {"up": v.up, "down": list(v.down)}


def address_from_json(obj) -> Vertex:
    if isinstance(obj, dict):
        return Vertex(int(obj.get("up", 0)), tuple(int(s) for s in obj.get("down", ())))
    if isinstance(obj, str):
        return parse_address(obj)
    up, down = obj
    return Vertex(int(up), tuple(int(s) for s in down))


def parse_address(text: str) -> Vertex:
    """``K:s1,s2,...`` (``0:`` is the anchor), or a JSON address object."""
    text = text.strip()
    if text.startswith("{"):
        return address_from_json(json.loads(text))
    up, sep, down = text.partition(":")
    if not sep:
        raise ValueError(f"cannot parse vertex address {text!r} (expected K:s1,s2,...)")
    slots = tuple(int(s) for s in down.split(",") if s.strip())
    return Vertex(int(up), slots)


def _scalar_from_json(x) -> complex:
    if isinstance(x, (list, tuple)):
        re, im = x
        return complex(float(re), float(im))
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    return complex(float(x))


def _scalar_to_json(z: complex):
    return z.real if z.imag == 0 else [z.real, z.imag]


def _profile_from_json(doc, convert, rooted=False) -> PeriodicProfile:
    prefix = [(int(g), convert(a)) for g, a in doc.get("prefix", [])]
    period = [convert(a) for a in doc.get("period", [])]
    left = [convert(a) for a in doc.get("left_period", [])]
    if not period:
        raise ValueError("profile needs a nonempty 'period'")
    if not left and not rooted:
        left = period
    return PeriodicProfile.build(prefix, period, left)


def tree_from_json(doc: dict) -> TreeSpec:
    kind = doc.get("kind")
    rooted = kind == "rooted"
    arity_doc = doc.get("arity", {})
    if isinstance(arity_doc, int):
        arity_doc = {"period": [arity_doc]}

    def convert(a):
        if int(a) != a:
            raise ValueError(f"arity {a!r} is not an integer")
        return int(a)

    profile = _profile_from_json(arity_doc, convert, rooted)
    overrides = tuple((address_from_json(v), int(a)) for v, a in doc.get("overrides", []))
    spine = tuple((int(k), int(s)) for k, s in doc.get("spine", []))
    return TreeSpec(kind, profile, overrides, spine)


def tree_to_json(tree: TreeSpec) -> dict:
    doc = {
        "kind": tree.kind,
        "arity": {"prefix": [list(p) for p in tree.arity.prefix], "period": list(tree.arity.period)},
        "overrides": [[address_to_json(v), a] for v, a in tree.overrides],
        "spine": [list(p) for p in tree.spine],
    }
    if tree.arity.left_period:
        doc["arity"]["left_period"] = list(tree.arity.left_period)
    return doc


def weights_from_json(doc: dict) -> Weights:
    mode = doc.get("mode", "constant")
    overrides = tuple((address_from_json(v), _scalar_from_json(x)) for v, x in doc.get("overrides", []))
    if mode == "constant":
        return Weights.constant(_scalar_from_json(doc["value"]), overrides)
    if mode == "per_generation":
        profile = _profile_from_json(doc.get("profile", doc), _scalar_from_json)
        return Weights(profile, overrides)
    raise ValueError(f"unknown weight mode {mode!r}")


def weights_to_json(weights: Weights) -> dict:
    overrides = [[address_to_json(v), _scalar_to_json(x)] for v, x in weights.overrides]
    if weights.mode == "constant":
        return {"mode": "constant", "value": _scalar_to_json(weights.profile.period[0]), "overrides": overrides}
    p = weights.profile
    return {
        "mode": "per_generation",
        "profile": {
            "prefix": [[g, _scalar_to_json(x)] for g, x in p.prefix],
            "period": [_scalar_to_json(x) for x in p.period],
            "left_period": [_scalar_to_json(x) for x in p.left_period],
        },
        "overrides": overrides,
    }


def vector_to_json(f: SparseVector) -> list:
    return [[address_to_json(v), f[v].real, f[v].imag] for v in f.support()]


def vector_from_json(data, tree: TreeSpec | None = None) -> SparseVector:
    """Read ``[[address, re, im], ...]``; with a tree, every address must be a canonical vertex."""
    entries = {}
    for item in data:
        v = address_from_json(item[0])
        re = float(item[1])
        im = float(item[2]) if len(item) > 2 else 0.0
        if tree is not None:
            canonical = tree.canonical(v.up, v.down)
            if canonical != v:
                raise ValueError(f"address {v} is not canonical for this tree (canonical form {canonical})")
        if v in entries:
            raise ValueError(f"duplicate entry for {v}")
        entries[v] = complex(re, im)
    return SparseVector(entries)


def _witness_to_json(w: ChainWitness) -> dict:
    return {
        "direction": w.direction,
        "n": w.levels,
        "t_or_s": w.scale,
        "sigma_or_gamma": vector_to_json(w.dual),
        "perturbations": [vector_to_json(g) for g in w.perturbations],
        "selection": w.selection,
    }


def chain_to_json(chain: DeltaChain) -> dict:
    witnesses = [_witness_to_json(w) for w in chain.witnesses]
    if len(witnesses) == 1:
        witness_doc = witnesses[0]
    else:
        witness_doc = {"direction": "Loop", "parts": witnesses}
    return {
        "delta": chain.delta,
        "space": str(chain.space),
        "length": chain.length,
        "vectors": [vector_to_json(f) for f in chain.vectors],
        "witnesses": witness_doc,
    }


def chain_from_json(doc: dict, tree: TreeSpec | None = None) -> tuple[float, Space | None, list[SparseVector]]:
    delta = float(doc["delta"])
    space = Space.parse(doc["space"]) if doc.get("space") else None
    vectors = [vector_from_json(f, tree) for f in doc["vectors"]]
    return delta, space, vectors


def report_to_json(report: ChainReport) -> dict:
    return {
        "valid": report.valid,
        "delta": report.delta,
        "defect_norms": list(report.defect_norms),
        "invalid_steps": report.invalid_steps,
        "defects": [vector_to_json(g) for g in report.defects],
        "reconstruction_error": report.reconstruction_error,
    }


def _plain(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, non-finite floats as strings)."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_json(source: str):
    """Load JSON from a file path, or parse it directly when it looks like inline JSON."""
    text = source.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    return json.loads(Path(source).read_text(encoding="utf-8"))
