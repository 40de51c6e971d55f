import itertools
import random

import pytest

from treecq.evaluate import eval_backtracking
from treecq.query import BinaryAtom, ConjunctiveQuery, UnaryAtom, is_acyclic, parse_query
from treecq.succinct import (
    X, Xp, Y, all_ps, blowup_experiment, example78, example78_query, format_path, gen_diamond,
    gen_ps, is_k_scattered, is_path_structure, label_paths, label_sequence, lemma73_structure,
    path_structure, ps_length, variable_paths,
)
from treecq.tree import Axis, parse_tree

CP, CS = Axis.CHILD_PLUS, Axis.CHILD_STAR


def test_diamond_counts():
    d1 = gen_diamond(1)
    assert set(d1.variables) == {"y1", "x1", "x'1", "y2"}
    assert len(d1.binary) == 4 and len(d1.unary) == 4
    for n in range(1, 6):
        d = gen_diamond(n)
        assert len(d.variables) == 3 * n + 1
        assert len(d.unary) == 3 * n + 1 and len(d.binary) == 4 * n
        assert d.signature() == {CP} and d.is_boolean
    with pytest.raises(ValueError):
        gen_diamond(0)


def test_diamond_two_shape():
    d2 = gen_diamond(2)
    assert len(variable_paths(d2)) == 4
    assert {format_path(lp) for lp in label_paths(d2)} == {
        "Y1.X1.Y2.X2.Y3", "Y1.X1.Y2.X'2.Y3", "Y1.X'1.Y2.X2.Y3", "Y1.X'1.Y2.X'2.Y3"}


def test_ps_small():
    t = gen_ps(1, 1, [False])
    assert len(t) == 9 and is_path_structure(t)
    assert format_path(label_sequence(t)) == "_.Y1._.X1._.X'1._.Y2._"
    assert format_path(label_sequence(gen_ps(1, 1, [True]))) == "_.Y1._.X'1._.X1._.Y2._"


def test_ps_errors():
    with pytest.raises(ValueError):
        gen_ps(2, 1, [True])
    with pytest.raises(ValueError):
        gen_ps(0, 1, [])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_diamond_true_on_every_ps(n):
    for p in (1, 2, 4 * n + 6):
        for t in all_ps(n, p):
            assert len(t) == ps_length(n, p)
            assert is_k_scattered(t, p)
            assert eval_backtracking(t, gen_diamond(n))


def test_scattered_examples():
    assert is_k_scattered(path_structure([()] * 4), 4)
    assert not is_k_scattered(path_structure([()] * 3), 4)
    assert not is_k_scattered(path_structure([{"A"}, (), {"B"}]), 2)
    assert is_k_scattered(gen_ps(2, 3, [False, True]), 3)
    assert not is_k_scattered(gen_ps(2, 3, [False, True]), 4)
    assert not is_k_scattered(path_structure([(), {"A", "B"}, ()]), 1)
    assert not is_k_scattered(path_structure([(), {"A"}, (), {"A"}, ()]), 1)


def test_path_structure_roundtrip():
    seq = [frozenset(), frozenset({"A"}), frozenset({"B", "C"})]
    assert label_sequence(path_structure(seq)) == seq
    with pytest.raises(ValueError):
        label_sequence(parse_tree("(- (-) (-))"))


def test_variable_paths_examples():
    q = parse_query("q() :- child+(x,u), child+(u,y), child*(u,v), child+(v,z).")
    assert variable_paths(q) == [("x", "u", "v", "z"), ("x", "u", "y")]
    assert variable_paths(parse_query("q() :- A(x).")) == [("x",)]
    with pytest.raises(ValueError):
        variable_paths(parse_query("q() :- child(x,y), child(y,x)."))


def test_example_separating_structure():
    q, m, q_true, d2_true = example78()
    assert is_path_structure(m)
    assert q_true and not d2_true
    assert {format_path(lp) for lp in label_paths(q)} == {
        "Y1.X1.Y2.X2.Y3", "Y1.X1.Y2.X'2.Y3", "Y1.X'1.Y2.X2.Y3"}
    # the two X'1-free paths in order, then the X'1 path without X'2
    assert format_path(label_sequence(m)) == ".".join([
        "Y1.X1.Y2.X'2.Y3", "Y1.X1.Y2.X2.Y3", "Y1.X'1.Y2.X2.Y3"])


def test_lemma73_single_block():
    q = parse_query("q() :- A(x), child+(x,y), B(y), child*(x,z), C(z).")
    m = lemma73_structure(q, ["D"])
    assert format_path(label_sequence(m)) == "A.B.A.C"
    assert eval_backtracking(m, q)


def test_lemma73_rejects_full_path():
    q = parse_query("q() :- A(x), child+(x,y), B(y).")
    with pytest.raises(ValueError):
        lemma73_structure(q, ["A", "B"])
    with pytest.raises(ValueError):
        lemma73_structure(parse_query("q() :- child(x,y)."), ["A"])


def _random_dag_query(rng):
    names = [f"v{i}" for i in range(rng.randint(1, 6))]
    binary = []
    for j in range(1, len(names)):
        for i in rng.sample(range(j), rng.randint(1, min(2, j))):
            binary.append(BinaryAtom(rng.choice([CP, CS]), names[i], names[j]))
    unary = [UnaryAtom(lab, v) for v in names for lab in ("E1", "E2", "E3") if rng.random() < 0.3]
    if not binary and not unary:
        unary = [UnaryAtom("E1", names[0])]
    return ConjunctiveQuery((), unary, binary)


def test_lemma73_on_random_dags():
    rng = random.Random(0)
    checked = 0
    for _ in range(300):
        q = _random_dag_query(rng)
        gamma = ["E1", "E2", "E3"]
        rng.shuffle(gamma)
        try:
            m = lemma73_structure(q, gamma)
        except ValueError:
            assert any(set(gamma) <= set().union(*lp) for lp in label_paths(q))
            continue
        checked += 1
        assert eval_backtracking(m, q), (q, format_path(label_sequence(m)))
    assert checked > 100


def test_variable_path_bound_on_forests():
    rng = random.Random(1)
    for _ in range(200):
        q = _random_dag_query(rng)
        if is_acyclic(q):
            assert len(variable_paths(q)) <= len(q.variables) ** 2


def test_blowup_small():
    report = blowup_experiment(2)
    assert [r.n for r in report.rows] == [1, 2]
    assert all(r.acyclic and r.equivalent for r in report.rows)
    assert report.grows()
    assert report.to_csv().splitlines()[0].startswith("n,query_atoms")
    assert "grows strictly" in report.to_text()
    assert report.to_text() == blowup_experiment(2).to_text()
