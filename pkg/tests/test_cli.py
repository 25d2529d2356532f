import csv
import json
import subprocess
import sys

import pytest

from support import random_tree, random_vector, random_weights, seeded
from treeshift import io
from treeshift.cli import main
from treeshift.shift import Space, Weights
from treeshift.trees import UNROOTED, line, regular

ROOTED_LINE = {"kind": "rooted", "arity": 1}
UNROOTED_LINE = {"kind": "unrooted", "arity": 1}
BINARY = {"kind": "rooted", "arity": 2}


@pytest.fixture
def files(tmp_path):
    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def constant(x):
    return {"mode": "constant", "value": x}


def test_classify(capsys, files):
    code, out, _ = run(capsys, "classify", "--tree", files("t.json", ROOTED_LINE), "--weights",
                       files("w.json", constant(1)), "--space", "l1")
    assert code == 0
    assert json.loads(out)["verdict"] == "ChainRecurrent"

    code, out, _ = run(capsys, "classify", "--tree", files("u.json", UNROOTED_LINE), "--weights",
                       files("w2.json", constant(2)), "--space", "l1")
    assert code == 0
    assert json.loads(out)["verdict"] == "NotChainRecurrent"


def test_classify_inconclusive_exit_code(capsys, files):
    tree = {"kind": "rooted", "arity": 1, "overrides": [[{"up": 0, "down": [0]}, 2]]}
    weights = {"mode": "constant", "value": 0.999, "overrides": [["0:0,1", 0.5]]}
    code, out, _ = run(capsys, "classify", "--tree", files("t.json", tree), "--weights", files("w.json", weights),
                       "--space", "lp:2", "--nmax", 8)
    assert code == 2
    assert json.loads(out)["verdict"] == "Inconclusive"


def test_input_errors(capsys, files):
    code, _, err = run(capsys, "classify", "--tree", files("t.json", {"kind": "rooted", "arity": 0}),
                       "--weights", files("w.json", constant(1)))
    assert code == 1 and "error" in err
    code, _, _ = run(capsys, "classify", "--tree", files("t2.json", BINARY), "--weights",
                     files("w2.json", constant(1)), "--space", "lp:0.5")
    assert code == 1
    code, _, _ = run(capsys, "classify", "--tree", "/nonexistent.json", "--weights", files("w3.json", constant(1)))
    assert code == 1


def test_chain_and_verify_round_trip(capsys, files, tmp_path):
    tree, weights = files("t.json", ROOTED_LINE), files("w.json", constant(1))
    out = tmp_path / "chain.json"
    code, _, _ = run(capsys, "chain", "--from-zero", "--delta", 0.6, "--tree", tree, "--weights", weights,
                     "--space", "lp:2", "--out", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["length"] == 3
    assert doc["witnesses"]["direction"] == "FromZero"
    code, report, _ = run(capsys, "verify", "--chain", out, "--tree", tree, "--weights", weights)
    assert code == 0 and json.loads(report)["valid"]

    code, _, _ = run(capsys, "chain", "--loop", "--delta", 2, "--tree", tree, "--weights", weights, "--out", out)
    assert code == 0
    assert json.loads(out.read_text())["length"] == 2


def test_chain_infeasible(capsys, files):
    code, _, err = run(capsys, "chain", "--to-zero", "--delta", 0.1, "--tree", files("t.json", UNROOTED_LINE),
                       "--weights", files("w.json", constant(2)), "--space", "l1")
    assert code == 3
    assert "s reached only" in err


def test_chain_needs_positive_delta(capsys, files):
    code, _, _ = run(capsys, "chain", "--loop", "--delta", 0, "--tree", files("t.json", BINARY),
                     "--weights", files("w.json", constant(1)))
    assert code == 1


def test_verify_detects_bad_step(capsys, files, tmp_path):
    tree, weights = files("t.json", BINARY), files("w.json", constant(1))
    out = tmp_path / "chain.json"
    run(capsys, "chain", "--loop", "--delta", 0.5, "--tree", tree, "--weights", weights, "--space", "l1", "--out", out)
    doc = json.loads(out.read_text())
    doc["vectors"][1].append([{"up": 0, "down": [1, 1, 1]}, 0.75, 0.0])
    bad = files("bad.json", doc)
    code, report, err = run(capsys, "verify", "--chain", bad, "--tree", tree, "--weights", weights)
    assert code == 4
    assert json.loads(report)["invalid_steps"]
    assert "invalid chain" in err


def test_verify_rejects_mismatched_tree(capsys, files, tmp_path):
    binary, weights = files("t.json", BINARY), files("w.json", constant(1))
    out = tmp_path / "chain.json"
    run(capsys, "chain", "--from-zero", "--delta", 0.5, "--vertex", "0:1", "--tree", binary, "--weights", weights,
        "--out", out)
    code, _, err = run(capsys, "verify", "--chain", out, "--tree", files("line.json", ROOTED_LINE),
                       "--weights", weights)
    assert code == 1 and "slot" in err


def test_sweep_examples(capsys, files):
    def answers(tree, space, lambdas):
        code, out, _ = run(capsys, "sweep", "--tree", files("t.json", tree), "--space", space, "--lambdas", lambdas)
        assert code == 0
        return [row["chain_recurrent"] for row in csv.DictReader(out.splitlines())]

    assert answers(ROOTED_LINE, "l1", "0.5,0.9,1.0,1.5") == ["No", "No", "Yes", "Yes"]
    assert answers(UNROOTED_LINE, "l1", "0.5,1.0,2.0") == ["No", "Yes", "No"]
    assert answers(BINARY, "lp:2", "0.70,0.7072") == ["No", "Yes"]


def test_sweep_grid_and_bad_grid(capsys, files):
    grid = [{"label": "a", "mode": "constant", "value": 1}, {"mode": "per_generation", "profile": {"period": [2, 0.1]}}]
    code, out, _ = run(capsys, "sweep", "--tree", files("t.json", ROOTED_LINE), "--grid", files("g.json", grid),
                       "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["label"] for r in rows] == ["a", "1"]
    assert [r["verdict"] for r in rows] == ["ChainRecurrent", "NotChainRecurrent"]
    code, _, _ = run(capsys, "sweep", "--tree", files("t.json", ROOTED_LINE), "--grid", files("e.json", []))
    assert code == 1


def test_outputs_are_deterministic(capsys, files, tmp_path):
    tree = files("t.json", BINARY)
    outputs = []
    for jobs in (1, 2, 1):
        path = tmp_path / f"sweep{len(outputs)}.csv"
        run(capsys, "sweep", "--tree", tree, "--space", "lp:3", "--lambdas", "0.3,0.6,0.63,0.7,1,1.2",
            "--jobs", jobs, "--out", path)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]

    chains = []
    for i in range(2):
        path = tmp_path / f"chain{i}.json"
        run(capsys, "chain", "--loop", "--delta", 0.3, "--tree", tree, "--weights", files("w.json", constant(0.9)),
            "--space", "lp:2", "--out", path)
        chains.append(path.read_bytes())
    assert chains[0] == chains[1]


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "treeshift", "classify", "--tree", files("t.json", ROOTED_LINE),
         "--weights", files("w.json", constant(0.5))],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "NotChainRecurrent"


def test_io_round_trips():
    rng = seeded(4)
    for _ in range(20):
        t = random_tree(rng)
        w = random_weights(rng, t)
        assert io.tree_from_json(json.loads(io.dumps(io.tree_to_json(t)))) == t
        back = io.weights_from_json(json.loads(io.dumps(io.weights_to_json(w))))
        assert back == w
        f = random_vector(rng, t)
        assert io.vector_from_json(json.loads(io.dumps(io.vector_to_json(f))), t) == f
    const = Weights.constant(0.5 + 1j)
    assert io.weights_from_json(io.weights_to_json(const)) == const
    assert io.tree_from_json(io.tree_to_json(regular(3, UNROOTED))) == regular(3, UNROOTED)
    assert io.tree_from_json(io.tree_to_json(line())) == line()


def test_vector_parsing_rejects_bad_addresses():
    t = regular(2, UNROOTED)
    with pytest.raises(ValueError):
        io.vector_from_json([[{"up": 1, "down": [0]}, 1.0, 0.0]], t)
    with pytest.raises(ValueError):
        io.vector_from_json([["0:1", 1.0], ["0:1", 2.0]], t)
    assert io.parse_address("2:0,1") == io.address_from_json({"up": 2, "down": [0, 1]})
    assert Space.parse(str(Space("lp", 2.5))) == Space("lp", 2.5)
