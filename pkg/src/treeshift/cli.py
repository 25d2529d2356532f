"""Command line front end.

    treeshift classify --tree T.json --weights W.json --space l1
    treeshift chain --loop --delta 0.5 --tree T.json --weights W.json --space lp:2
    treeshift verify --chain C.json --tree T.json --weights W.json --space lp:2
    treeshift sweep --tree T.json --space l1 --lambdas 0.5,1,2

Exit codes: 0 decided / valid, 1 input error, 2 inconclusive,
3 construction infeasible within the truncation, 4 invalid chain.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .chains import build_chain_from_zero, build_chain_to_zero, build_loop_chain, verify_chain
from .criteria import TruncationPolicy, Verdict, classify
from .errors import CriterionNotMetWithinTruncation, EnumerationCapExceeded, TreeShiftError
from .shift import Space, Weights
from .trees import ANCHOR

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_INFEASIBLE, EXIT_INVALID = 0, 1, 2, 3, 4


def _fmt(x) -> str:
    return format(x, ".17g") if isinstance(x, float) else str(x)


def _policy(args) -> TruncationPolicy:
    kw = {}
    if args.nmax is not None:
        kw["n_max"] = args.nmax
    if args.cap is not None:
        kw["cap"] = args.cap
    if args.threshold is not None:
        kw["divergence_threshold"] = args.threshold
    if args.margin is not None:
        kw["margin"] = args.margin
    return TruncationPolicy(**kw)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_common(args, need_weights=True):
    tree = io.tree_from_json(io.load_json(args.tree))
    weights = io.weights_from_json(io.load_json(args.weights)) if need_weights else None
    space = Space.parse(args.space) if args.space else None
    vertex = io.parse_address(args.vertex) if args.vertex else ANCHOR
    vertex_canonical = tree.canonical(vertex.up, vertex.down)
    if weights is not None:
        weights.check(tree)
    return tree, weights, space, vertex_canonical


def cmd_classify(args) -> int:
    tree, weights, space, v = _load_common(args)
    result = classify(tree, weights, space, v, _policy(args))
    _emit(io.dumps(result.to_dict()), args.out)
    return EXIT_INCONCLUSIVE if result.verdict == Verdict.INCONCLUSIVE else EXIT_OK


BUILDERS = {"from-zero": build_chain_from_zero, "to-zero": build_chain_to_zero, "loop": build_loop_chain}


def cmd_chain(args) -> int:
    if args.delta is None or args.delta <= 0:
        raise ValueError("--delta must be given and positive")
    tree, weights, space, v = _load_common(args)
    try:
        chain = BUILDERS[args.direction](v, args.delta, tree, weights, space, _policy(args))
    except CriterionNotMetWithinTruncation as exc:
        print(f"infeasible: {exc} (best value {exc.best!r})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except EnumerationCapExceeded as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(io.dumps(io.chain_to_json(chain)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    tree, weights, space, _ = _load_common(args)
    doc = io.load_json(args.chain)
    delta, chain_space, vectors = io.chain_from_json(doc, tree)
    if args.delta is not None:
        delta = args.delta
    space = space or chain_space
    if space is None:
        raise ValueError("no --space given and the chain file names none")
    report = verify_chain(vectors, delta, tree, weights, space)
    _emit(io.dumps(io.report_to_json(report)), args.out)
    if not report.valid:
        print(f"invalid chain: steps {report.invalid_steps} have defect norm >= {delta!r}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


SWEEP_FIELDS = ["index", "label", "space", "vertex", "verdict", "chain_recurrent", "root_rule", "left_rule", "closed_form"]


def _sweep_point(job):
    index, label, tree, weights, space, vertex, policy = job
    result = classify(tree, weights, space, vertex, policy)
    answer = {Verdict.CHAIN_RECURRENT: "Yes", Verdict.NOT_CHAIN_RECURRENT: "No"}.get(result.verdict, "?")
    return {
        "index": index,
        "label": label,
        "space": str(space),
        "vertex": str(vertex),
        "verdict": result.verdict.value,
        "chain_recurrent": answer,
        "root_rule": result.root_condition.rule or "",
        "left_rule": (result.left_condition.rule or "") if result.left_condition else "",
        "closed_form": result.closed_form.value if result.closed_form else "",
    }


def _grid(args):
    if args.lambdas:
        out = []
        for item in args.lambdas.split(","):
            item = item.strip()
            if not item:
                continue
            value = complex(item.replace("i", "j"))
            out.append((item, Weights.constant(value)))
        if not out:
            raise ValueError("empty lambda grid")
        return out
    if args.grid:
        docs = io.load_json(args.grid)
        if not isinstance(docs, list) or not docs:
            raise ValueError("--grid must hold a nonempty JSON list of weight specs")
        return [(str(d.get("label", i)), io.weights_from_json(d)) for i, d in enumerate(docs)]
    raise ValueError("sweep needs --lambdas or --grid")


def cmd_sweep(args) -> int:
    tree, _, space, v = _load_common(args, need_weights=False)
    policy = _policy(args)
    grid = _grid(args)
    for _, w in grid:
        w.check(tree)
    jobs = [(i, label, tree, w, space, v, policy) for i, (label, w) in enumerate(grid)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(job) for job in jobs]
    if args.format == "json":
        _emit(io.dumps(rows), args.out)
    else:
        buf = _io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SWEEP_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treeshift", description="Chain recurrence of weighted backward shifts on trees.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, weights=True, space_default="l1"):
        p.add_argument("--tree", required=True, help="tree spec JSON file (or inline JSON)")
        if weights:
            p.add_argument("--weights", required=True, help="weight spec JSON file (or inline JSON)")
        p.add_argument("--space", default=space_default, help="l1, lp:P or c0")
        p.add_argument("--vertex", default=None, help="vertex address K:s1,s2,... (default: the anchor)")
        p.add_argument("--nmax", type=int, default=None)
        p.add_argument("--cap", type=int, default=None, help="enumeration cap per level")
        p.add_argument("--threshold", type=float, default=None, help="divergence threshold for partial sums")
        p.add_argument("--margin", type=float, default=None)
        p.add_argument("--out", default=None)

    p = sub.add_parser("classify", help="decide chain recurrence")
    common(p)
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("chain", help="build and verify a delta-chain")
    common(p)
    p.add_argument("--delta", type=float, default=None)
    direction = p.add_mutually_exclusive_group(required=True)
    direction.add_argument("--from-zero", dest="direction", action="store_const", const="from-zero")
    direction.add_argument("--to-zero", dest="direction", action="store_const", const="to-zero")
    direction.add_argument("--loop", dest="direction", action="store_const", const="loop")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("verify", help="check a chain file")
    common(p, space_default=None)
    p.add_argument("--chain", required=True, help="chain JSON file")
    p.add_argument("--delta", type=float, default=None, help="override the chain's delta")
    p.add_argument("--format", choices=["json"], default="json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="classify over a grid of weights")
    common(p, weights=False)
    p.add_argument("--lambdas", default=None, help="comma separated constant weights")
    p.add_argument("--grid", default=None, help="JSON list of weight specs")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TreeShiftError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
