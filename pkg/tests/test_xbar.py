import itertools
import random

import pytest
from hypothesis import given, settings

from treecq.tree import ALL_AXES, Axis, parse_tree, random_tree
from treecq.xbar import (
    FAMILIES, TABLE1_AXES, TABLE1_EXPECTED, OrderTag, check_downward_condition, check_xbar,
    check_xbar_bruteforce, check_xbar_restricted, classify, table1_diff, table1_grid,
)

from conftest import trees

FOLLOWING_EXAMPLE = parse_tree("(- (A (B) (C)) (D (E)))")
# labels give each node's post-order number
POST_EXAMPLE = parse_tree("(N5 (N2 (N1)) (N4 (N3)))")

ASSERTED = [(axis, order) for order, fam in FAMILIES.items() for axis in sorted(fam, key=ALL_AXES.index)]


def test_seven_asserted_pairs():
    assert len(ASSERTED) == 7


@pytest.mark.parametrize("axis,order", ASSERTED)
def test_asserted_pairs_on_random_trees(axis, order):
    rng = random.Random(1)
    for _ in range(25):
        t = random_tree(rng, rng.randint(1, 40))
        assert check_xbar(t, axis, order) is None


def test_child_star_pre_on_any_tree():
    assert check_xbar(FOLLOWING_EXAMPLE, Axis.CHILD_STAR, OrderTag.PRE) is None


def test_single_node_has_no_violation():
    t = parse_tree("(-)")
    for axis, order in itertools.product(ALL_AXES, OrderTag):
        assert check_xbar(t, axis, order) is None


def test_following_fails_under_pre():
    t = FOLLOWING_EXAMPLE
    n0, n1, n2, n3 = check_xbar(t, Axis.FOLLOWING, OrderTag.PRE)
    assert n0 < n1 and n2 < n3
    F = lambda a, b: t.holds(Axis.FOLLOWING, a, b)  # noqa: E731
    assert F(n1, n2) and F(n0, n3) and not F(n0, n2)
    # the textbook instance: nodes 2,3,4,6 counted from 1
    assert F(2, 3) and F(1, 5) and not F(1, 3)


def test_descendant_fails_downward_condition_under_post():
    t = POST_EXAMPLE
    assert [int(next(iter(t.labels[v]))[1:]) - 1 for v in t.nodes] == list(t.post_rank)
    hit = check_downward_condition(t, Axis.CHILD_PLUS, OrderTag.POST)
    assert hit is not None
    n0, n1, n2, n3 = hit
    rank = t.post_rank
    assert rank[n0] < rank[n1] <= rank[n2] < rank[n3]
    R = lambda a, b: t.holds(Axis.CHILD_PLUS, a, b)  # noqa: E731
    assert R(n2, n1) and R(n3, n0) and not R(n2, n0)


@settings(max_examples=60)
@given(trees(max_nodes=9))
def test_vectorized_check_matches_quartic(t):
    for axis, order in itertools.product(ALL_AXES, OrderTag):
        fast = check_xbar(t, axis, order)
        slow = check_xbar_bruteforce(t, axis, order)
        assert (fast is None) == (slow is None)
        rank = t.rank(order.value)
        if fast is not None:
            assert tuple(rank[v] for v in fast) == tuple(rank[v] for v in slow)
        assert (check_xbar_restricted(t, axis, order) is None) == \
            (check_xbar_bruteforce(t, axis, order, restricted=True) is None)


@settings(max_examples=60)
@given(trees(max_nodes=9))
def test_restricted_check_suffices_inside_order(t):
    # relations contained in the order: Child*, Child+ and Following under pre, siblings under bflr
    for axis, order in [(Axis.CHILD_STAR, OrderTag.PRE), (Axis.CHILD_PLUS, OrderTag.PRE),
                        (Axis.FOLLOWING, OrderTag.PRE), (Axis.FOLLOWING, OrderTag.POST),
                        (Axis.NEXT_SIBLING_PLUS, OrderTag.BFLR), (Axis.CHILD, OrderTag.PRE)]:
        assert (check_xbar(t, axis, order) is None) == (check_xbar_restricted(t, axis, order) is None)


def test_classify_examples():
    C, CP, NP, F = Axis.CHILD, Axis.CHILD_PLUS, Axis.NEXT_SIBLING_PLUS, Axis.FOLLOWING
    assert classify({C, NP}).order is OrderTag.BFLR
    v = classify({C, CP})
    assert not v.tractable and set(v.witness) == {C, CP}
    assert v.describe() == "NP-hard (5.1)"
    assert classify({F}).order is OrderTag.POST
    assert classify(set()).order is OrderTag.BFLR
    assert str(classify(set())) == "Tractable(bflr)"


def test_table1_matches():
    assert table1_diff() == []
    grid = table1_grid()
    assert sum(len(r) for r in grid) == 28
    assert [r[0] for r in grid] == [row[0] for row in TABLE1_EXPECTED]


def test_tractable_verdicts_use_one_family():
    for k in range(len(ALL_AXES) + 1):
        for sig in itertools.combinations(ALL_AXES, k):
            v = classify(sig)
            if v.tractable:
                assert set(sig) <= FAMILIES[v.order]
            else:
                a, b = v.witness
                assert not any(a in f and b in f for f in FAMILIES.values())


def test_table1_axes_cover_all():
    assert set(TABLE1_AXES) == set(ALL_AXES)
