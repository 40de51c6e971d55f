import itertools
import math
import random

import pytest
from hypothesis import given, settings

from treecq.tree import (
    ALL_AXES, Axis, Tree, TreeSyntaxError, axis_holds, axis_predecessors, axis_successors,
    enumerate_trees, parse_tree, random_tree, serialize_tree, tree_shapes,
)

from conftest import trees

# 0-based pre-order ids; nodes 1..6 of the worked example are 0..5 here
FOLLOWING_EXAMPLE = "(- (A (B) (C)) (D (E)))"


def test_parse_two_nodes():
    t = parse_tree("(A (B))")
    assert len(t) == 2
    assert t.labels == (frozenset({"A"}), frozenset({"B"}))
    assert t.children[0] == (1,)


def test_parse_empty_labels():
    t = parse_tree("(- (Y1) (-))")
    assert len(t) == 3
    assert t.labels[0] == frozenset() and t.labels[2] == frozenset()
    assert t.labels[1] == frozenset({"Y1"})


def test_ranks_six_nodes():
    t = parse_tree("(A (B (C) (D)) (E (F)))")
    name = {v: next(iter(t.labels[v])) for v in t.nodes}
    by_pre = sorted(t.nodes, key=t.pre_rank.__getitem__)
    by_post = sorted(t.nodes, key=t.post_rank.__getitem__)
    assert [name[v] for v in by_pre] == list("ABCDEF")
    assert [name[v] for v in by_post] == list("CDBFEA")


def _recursive_orders(t: Tree):
    pre, post = [], []

    def walk(v):
        pre.append(v)
        for c in t.children[v]:
            walk(c)
        post.append(v)

    walk(0)
    return pre, post


@given(trees(max_nodes=15))
def test_ranks_match_recursive_traversal(t):
    pre, post = _recursive_orders(t)
    assert [t.pre_rank[v] for v in pre] == list(range(len(t)))
    assert [t.post_rank[v] for v in post] == list(range(len(t)))
    bflr = sorted(t.nodes, key=lambda v: (t.depth[v], t.pre_rank[v]))
    assert [t.bflr_rank[v] for v in bflr] == list(range(len(t)))


@pytest.mark.parametrize("text", ["", "   ", "(A", "(A))", "(A (B)", "A", "()", "(A) (B)", "(A,%)"])
def test_parse_errors(text):
    with pytest.raises(TreeSyntaxError):
        parse_tree(text)


def test_syntax_error_reports_offset():
    with pytest.raises(TreeSyntaxError) as e:
        parse_tree("(A))")
    assert e.value.offset == 3


def test_following_example():
    t = parse_tree(FOLLOWING_EXAMPLE)
    F = Axis.FOLLOWING
    assert axis_holds(t, F, 1, 5)
    assert axis_holds(t, F, 2, 3)
    assert not axis_holds(t, F, 1, 3)
    assert axis_successors(t, F, 1) == {4, 5}


def test_reflexivity():
    t = parse_tree(FOLLOWING_EXAMPLE)
    for v in t.nodes:
        assert axis_holds(t, Axis.CHILD_STAR, v, v)
        assert not axis_holds(t, Axis.CHILD_PLUS, v, v)


def test_sibling_orientation():
    t = parse_tree("(A (B) (C))")
    assert axis_holds(t, Axis.NEXT_SIBLING, 1, 2)
    assert not axis_holds(t, Axis.NEXT_SIBLING, 2, 1)
    assert axis_successors(t, Axis.CHILD, 0) == {1, 2}
    assert axis_successors(t, Axis.CHILD_PLUS, 2) == set()


def test_invalid_node_id():
    t = parse_tree("(A (B))")
    with pytest.raises(IndexError):
        axis_holds(t, Axis.CHILD, 0, 5)
    with pytest.raises(IndexError):
        axis_successors(t, Axis.CHILD, -1)


def _reference(t: Tree, axis: Axis, u: int, v: int) -> bool:
    """Definitions from parent pointers only."""
    def ancestors(x):
        out = []
        while t.parent[x] is not None:
            x = t.parent[x]
            out.append(x)
        return out

    def next_sib(a, b):
        p = t.parent[a]
        return p is not None and p == t.parent[b] and t.children[p].index(b) == t.children[p].index(a) + 1

    def sib_plus(a, b):
        p = t.parent[a]
        return p is not None and p == t.parent[b] and t.children[p].index(b) > t.children[p].index(a)

    if axis is Axis.CHILD:
        return t.parent[v] == u
    if axis is Axis.CHILD_PLUS:
        return u in ancestors(v)
    if axis is Axis.CHILD_STAR:
        return u == v or u in ancestors(v)
    if axis is Axis.NEXT_SIBLING:
        return next_sib(u, v)
    if axis is Axis.NEXT_SIBLING_PLUS:
        return sib_plus(u, v)
    if axis is Axis.NEXT_SIBLING_STAR:
        return u == v or sib_plus(u, v)
    # Following(u,v) iff some z1, z2 with Child*(z1,u), NextSibling+(z1,z2), Child*(z2,v)
    up = [u] + ancestors(u)
    vp = [v] + ancestors(v)
    return any(sib_plus(z1, z2) for z1 in up for z2 in vp)


@given(trees(max_nodes=10))
def test_axes_match_definitions(t):
    for axis in ALL_AXES:
        for u, v in itertools.product(t.nodes, repeat=2):
            assert axis_holds(t, axis, u, v) == _reference(t, axis, u, v), (axis, u, v)


@given(trees(max_nodes=12))
def test_following_by_ranks(t):
    for u, v in itertools.product(t.nodes, repeat=2):
        expected = (t.pre_rank[u] < t.pre_rank[v] and t.post_rank[u] < t.post_rank[v]
                    and not t.holds(Axis.CHILD_STAR, u, v))
        assert t.holds(Axis.FOLLOWING, u, v) == expected


@given(trees(max_nodes=12))
def test_orders_split_into_axes(t):
    cs, f = Axis.CHILD_STAR, Axis.FOLLOWING
    for u, v in itertools.product(t.nodes, repeat=2):
        assert (t.pre_rank[u] <= t.pre_rank[v]) == (t.holds(cs, u, v) or t.holds(f, u, v))
        assert not (t.holds(cs, u, v) and t.holds(f, u, v))
        assert (t.post_rank[u] <= t.post_rank[v]) == (t.holds(f, u, v) or t.holds(cs, v, u))
        assert not (t.holds(f, u, v) and t.holds(cs, v, u))


@given(trees(max_nodes=10))
def test_predecessors_invert_successors(t):
    for axis in ALL_AXES:
        for u in t.nodes:
            for v in axis_successors(t, axis, u):
                assert u in axis_predecessors(t, axis, v)


@given(trees(max_nodes=15, labels=("A", "B", "C"), multi=True))
def test_serialize_roundtrip(t):
    back = parse_tree(serialize_tree(t))
    assert back.parent == t.parent and back.labels == t.labels
    assert serialize_tree(back) == serialize_tree(t)


def test_serialize_canonical():
    assert serialize_tree(parse_tree("( B,A  (-)(C) )")) == "(A,B (-) (C))"


def test_enumerate_counts():
    assert [serialize_tree(t) for t in enumerate_trees(1, ["A"])] == ["(-)", "(A)"]
    assert len(list(enumerate_trees(2, []))) == 2
    assert len(list(enumerate_trees(3, []))) == 4


def test_shape_counts_are_catalan():
    for n in range(1, 8):
        expected = sum(math.comb(2 * (k - 1), k - 1) // k for k in range(1, n + 1))
        assert len(list(tree_shapes(n))) == expected


def test_enumeration_is_deterministic_and_distinct():
    a = [serialize_tree(t) for t in enumerate_trees(4, ["A", "B"])]
    assert a == [serialize_tree(t) for t in enumerate_trees(4, ["A", "B"])]
    assert len(a) == len(set(a)) == sum(3 ** len(p) for p in tree_shapes(4))


def test_random_tree_is_seeded():
    a = random_tree(random.Random(7), 20, ["A", "B"])
    b = random_tree(random.Random(7), 20, ["A", "B"])
    assert serialize_tree(a) == serialize_tree(b)
