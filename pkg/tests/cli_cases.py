"""Sample files and a broad set of CLI invocations, shared by the CLI and acceptance tests."""

from pathlib import Path


def write_inputs(root: Path) -> dict[str, str]:
    files = {
        "tree": "(- (A (B) (-)) (C) (-))\n",
        "intro": "q(z) :- A(x), child(x,y), B(y), following(x,z), C(z).\n",
        "boolean": "q() :- A(x), child(x,y), B(y).\n",
        "hard": "q() :- A(x), child(x,y), child+(x,z), B(y).\n",
        "cyclic": "q(x,y) :- child*(x,y), nextsib*(x,y).\n",
        "union": "q(x) :- A(x).\nq(x) :- C(x).\n",
        "instance": "1 2 3\n2 3 4\n",
        "unsat": "1 2 3\n1 2 4\n1 3 4\n2 3 4\n",
        "bad_tree": "(A (B)\n",
        "bad_query": "q(x) :- child(x).\n",
    }
    paths = {}
    for name, text in files.items():
        p = root / name
        p.write_text(text)
        paths[name] = str(p)
    return paths


def invocations(paths: dict[str, str]) -> list[list[str]]:
    return [
        ["eval", "--tree", paths["tree"], "--query", paths["intro"]],
        ["eval", "--tree", paths["tree"], "--query", paths["boolean"]],
        ["eval", "--tree", paths["tree"], "--query", paths["hard"], "--strategy", "brute"],
        ["eval", "--tree", paths["tree"], "--query", paths["union"]],
        ["rewrite", "--query", paths["cyclic"], "--check", "--trials", "10", "--seed", "3"],
        ["rewrite", "--query", paths["intro"], "--mode", "610"],
        ["classify", "--axes", "child,child+"],
        ["classify", "--axes", "following"],
        ["xbar-check", "--axis", "following", "--order", "post", "--trees", "20", "--max-nodes", "20",
         "--seed", "5"],
        ["xbar-check", "--axis", "following", "--order", "pre", "--trees", "20", "--max-nodes", "20",
         "--seed", "5"],
        ["gadget", "--instance", paths["instance"], "--signature", "tau15", "--verify"],
        ["gadget", "--instance", paths["unsat"], "--signature", "tau6", "--verify"],
        ["diamond", "--n", "2"],
        ["ps", "--n", "2", "--p", "2", "--bits", "01"],
        ["blowup", "--n-max", "2", "--format", "csv", "--seed", "1"],
        ["table1"],
        ["table1", "--format", "csv"],
    ]
