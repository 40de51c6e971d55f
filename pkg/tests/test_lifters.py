import itertools

import pytest

from treecq.lifters import (
    ADMISSIBLE, ADDED_AXES, FOLLOWING_TABLE_PUBLISHED, MODE_TABLES, TREE_TABLE, Conj, LifterError,
    Mode, axes_used, conj_holds, lifter, lifter_counterexample,
)
from treecq.tree import Axis, Tree, parse_tree, tree_shapes

C, CP, CS = Axis.CHILD, Axis.CHILD_PLUS, Axis.CHILD_STAR
N, NP, NS, F = Axis.NEXT_SIBLING, Axis.NEXT_SIBLING_PLUS, Axis.NEXT_SIBLING_STAR, Axis.FOLLOWING


def test_child_child():
    assert lifter(C, C) == (Conj("e", C),)


def test_nextsib_childstar():
    lif = lifter(N, CS)
    assert set(lif) == {Conj("c", N), Conj("b", CP, N)}
    assert CP in axes_used(lif)


def test_following_following():
    lif = lifter(F, F, "69")
    assert len(lif) == 3
    assert Conj("a", F, F) in lif


def test_pair_outside_mode():
    with pytest.raises(LifterError):
        lifter(N, F, "66c")
    with pytest.raises(LifterError):
        lifter(N, C, "66a")


@pytest.mark.parametrize("mode", [m for m in Mode if m is not Mode.M69])
def test_tree_lifters_are_equivalences(mode):
    for (r, s), lif in MODE_TABLES[mode].items():
        assert lifter_counterexample(r, s, lif) is None, (r, s)


def test_tables_respect_output_signature():
    for mode, table in MODE_TABLES.items():
        for lif in table.values():
            assert axes_used(lif) <= ADMISSIBLE[mode] | ADDED_AXES[mode]


def test_six_axis_table_is_complete():
    six = [C, CP, CS, N, NP, NS]
    assert set(TREE_TABLE) == set(itertools.product(six, six))


def test_symmetry_rows():
    for (r, s), lif in TREE_TABLE.items():
        swapped = TREE_TABLE[s, r]
        t = parse_tree("(- (- (-) (-)) (- (-)))")
        for a, b, c in itertools.product(t.nodes, repeat=3):
            assert any(conj_holds(t, cj, a, b, c) for cj in lif) == \
                any(conj_holds(t, cj, b, a, c) for cj in swapped)


# The published Following lifters are not equivalences; these are the witnesses.
def _psi(lif, t, a, b, c):
    return any(conj_holds(t, cj, a, b, c) for cj in lif)


@pytest.mark.parametrize("r", [N, NP, NS, F])
def test_published_following_lifters_miss_descendants(r):
    t = parse_tree("(- (- (-)) (-))")
    # x = 1, y = 2 is a proper descendant of x, z = 3 follows both
    if r in (N, NP, NS):
        assert t.holds(r, 1, 3)
    else:
        t = parse_tree("(- (- (- (-))) (-))")
        assert t.holds(F, 1, 4)
    z = len(t) - 1
    assert t.holds(F, 2, z)
    assert not _psi(FOLLOWING_TABLE_PUBLISHED[r, F], t, 1, 2, z)


def test_published_child_following_is_unsound():
    t = parse_tree("(- (-))")
    lif = FOLLOWING_TABLE_PUBLISHED[C, F]
    assert _psi(lif, t, 0, 0, 1)
    assert not t.holds(F, 0, 1)


def _catalog():
    axes = list(Axis)
    out = [Conj(s, p, p2) for s in "ab" for p in axes for p2 in axes]
    return out + [Conj(s, p) for s in "cde" for p in axes]


@pytest.mark.slow
@pytest.mark.parametrize("r", [N, NP, NS, C, F])
def test_no_following_lifter_exists(r):
    """Even the disjunction of every sound five-shape conjunction misses a triple."""
    shapes = [Tree.from_parents(p) for p in tree_shapes(5)]
    triples = [(t, a, b, c) for t in shapes for a, b, c in itertools.product(t.nodes, repeat=3)]
    sound = [cj for cj in _catalog()
             if all(not conj_holds(t, cj, a, b, c) or (t.holds(r, a, c) and t.holds(F, b, c))
                    for t, a, b, c in triples)]
    missed = [(t, a, b, c) for t, a, b, c in triples
              if t.holds(r, a, c) and t.holds(F, b, c) and not _psi(sound, t, a, b, c)]
    assert missed
