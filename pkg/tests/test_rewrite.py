import random
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treecq.evaluate import answer_tensor
from treecq.query import (
    ConjunctiveQuery, canonical_key, is_acyclic, parse_query, random_query, serialize_query,
)
from treecq.rewrite import (
    RewriteError, RewriteLimitError, UnsoundLifterWarning, collapse_directed_cycles,
    expand_child_star, expand_following, is_equivalent_sampled, output_axes_bound, pick_mode,
    rewrite_to_apq, rewrite_with_stats, sample_corpus,
)
from treecq.lifters import Mode
from treecq.tree import ALL_AXES, Axis, Tree, parse_tree, tree_shapes

C, CP, CS = Axis.CHILD, Axis.CHILD_PLUS, Axis.CHILD_STAR
N, NP, NS, F = Axis.NEXT_SIBLING, Axis.NEXT_SIBLING_PLUS, Axis.NEXT_SIBLING_STAR, Axis.FOLLOWING

INTRO_DESCENDANT = "q(z) :- S(x), child+(x,y), NP(y), child+(x,z), PP(z), following(y,z)."


def test_collapse_irreflexive_cycle():
    assert collapse_directed_cycles(parse_query("q() :- child(x,y), child(y,x).")) is None


def test_collapse_reflexive_cycle():
    out = collapse_directed_cycles(parse_query("q() :- child*(x,y), child*(y,x)."))
    assert serialize_query(out) == "q() :- node(x)."


def test_collapse_leaves_dag_alone():
    q = parse_query("q() :- child(x,y), child*(y,z).")
    assert collapse_directed_cycles(q) is q


def test_star_identity():
    p, stats = rewrite_with_stats(parse_query("q(x,y) :- child*(x,y), nextsib*(x,y)."))
    assert [serialize_query(d) for d in p] == ["q(x,x) :- node(x)."]
    assert stats.dropped == 1


def test_acyclic_input_is_unchanged():
    q = parse_query("q(x) :- A(x), child(x,y), nextsib+(y,z).")
    p = rewrite_to_apq(q)
    assert len(p) == 1 and p.disjuncts[0] == q


def test_child_cycle_rewrites_to_empty_union():
    p = rewrite_to_apq(parse_query("q() :- child(x,y), child+(y,x)."))
    assert len(p) == 0 and p.arity == 0


def test_pick_mode():
    assert pick_mode({C, CS}) is Mode.M66A
    assert pick_mode({C, N, NP}) is Mode.M66B
    assert pick_mode({CS, N}) is Mode.M66C
    assert pick_mode({F, N}) is Mode.M610


def test_mode_mismatch():
    with pytest.raises(RewriteError):
        rewrite_to_apq(parse_query("q() :- following(x,y)."), "66c")


def test_mode_69_warns():
    with pytest.warns(UnsoundLifterWarning):
        rewrite_to_apq(parse_query("q() :- nextsib(x,z), following(y,z)."), "69")


def test_cap():
    with pytest.raises(RewriteLimitError):
        rewrite_to_apq(parse_query(
            "q() :- child+(a,b), child+(a,c), child+(b,d), child+(c,d), child+(d,e), child+(d,f), "
            "child+(e,g), child+(f,g)."), cap=2)


def test_expand_following():
    e = expand_following(parse_query("q() :- following(x,y)."))
    assert serialize_query(e) == "q() :- child*(w1,x), nextsib+(w1,w2), child*(w2,y)."


def test_expand_child_star_count():
    q = parse_query("q() :- child*(x,y), child*(y,z), A(z).")
    copies = expand_child_star(q)
    assert len(copies) == 4
    assert all(CS not in c.signature() for c in copies)


def test_sampled_equivalence_examples():
    q = parse_query("q() :- A(x).")
    assert is_equivalent_sampled(q, q)
    v = is_equivalent_sampled(q, parse_query("q() :- B(x)."))
    assert not v
    assert v.counterexample is not None and len(v.counterexample) == 1


def _satisfiable(q: ConjunctiveQuery, max_nodes: int = 7) -> bool:
    labels = frozenset(q.labels())
    boolean = ConjunctiveQuery((), q.unary, q.binary)
    for parent in tree_shapes(max_nodes):
        t = Tree.from_parents(parent, [labels] * len(parent))
        if answer_tensor([t], boolean).any():
            return True
    return False


def test_descendant_intro_query_disjuncts():
    """Each Child* copy keeps exactly one satisfiable disjunct."""
    q = parse_query(INTRO_DESCENDANT)
    p = rewrite_to_apq(q)
    assert p.is_apq()
    sat = [d for d in p if _satisfiable(d)]
    assert len(sat) == 4
    assert len({canonical_key(d) for d in sat}) == 4
    assert is_equivalent_sampled(q, p)


CORPUS = sample_corpus(["A", "B"], max_nodes=5, trials=30, random_nodes=10, seed=0)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_rewrite_is_equivalent(seed):
    rng = random.Random(seed)
    q = random_query(rng, ALL_AXES, max_atoms=5, variables=4, arity=rng.randint(0, 2))
    p, stats = rewrite_with_stats(q, "610")
    assert p.is_apq()
    assert p.signature() <= output_axes_bound(q, "610") <= (q.signature() - {F, CS}) | {CP, NP}
    assert stats.max_atoms_before_merge <= stats.max_source_atoms
    assert is_equivalent_sampled(q, p, corpus=CORPUS)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9))
def test_auto_mode_signature_bounds(seed):
    rng = random.Random(seed)
    six = [C, CP, CS, N, NP, NS]
    q = random_query(rng, rng.sample(six, rng.randint(1, 3)), max_atoms=5, variables=4)
    p, stats = rewrite_with_stats(q)
    mode = Mode(stats.mode)
    assert p.is_apq()
    assert stats.max_atoms <= len(q)
    if mode in (Mode.M66A, Mode.M66B):
        assert p.signature() <= q.signature()
    else:
        assert p.signature() <= q.signature() | {CP}
    assert is_equivalent_sampled(q, p, corpus=CORPUS)


def test_rewrite_is_deterministic():
    q = parse_query(INTRO_DESCENDANT)
    assert str(rewrite_to_apq(q)) == str(rewrite_to_apq(q))
