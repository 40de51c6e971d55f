"""Rewriting conjunctive queries into unions of acyclic conjunctive queries.

The worklist repeatedly takes a disjunct whose query graph is not a forest,
removes or collapses its directed cycles, and then replaces the two in-edges
of a bottommost cycle variable by the disjuncts of a join lifter.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .evaluate import TreeBatch, group_by_shape, union_tensor
from .lifters import ADDED_AXES, ADMISSIBLE, MODE_TABLES, LifterError, Mode, lifter
from .query import (NODE, BinaryAtom, ConjunctiveQuery, PositiveQuery, UnaryAtom,
                    canonical_key, find_undirected_cycle_indices,
                    strongly_connected_components)
from .tree import Axis, Tree, enumerate_trees, random_tree

__all__ = [
    "Mode", "RewriteError", "RewriteLimitError", "RewriteStats", "UnsoundLifterWarning",
    "collapse_directed_cycles", "expand_following", "expand_child_star", "lifter",
    "pick_mode", "rewrite_to_apq", "rewrite_with_stats", "EquivalenceVerdict",
    "is_equivalent_sampled", "sample_corpus",
]

REFLEXIVE = frozenset({Axis.CHILD_STAR, Axis.NEXT_SIBLING_STAR})
DEFAULT_CAP = 100_000


class RewriteError(ValueError):
    pass


class RewriteLimitError(RuntimeError):
    pass


class UnsoundLifterWarning(UserWarning):
    """The Following lifters used by mode 69 are not equivalences on all trees."""


@dataclass
class RewriteStats:
    mode: str = ""
    steps: int = 0
    dropped: int = 0
    sources: int = 1
    max_source_atoms: int = 0
    disjuncts_before_merge: int = 0
    atoms_before_merge: int = 0
    max_atoms_before_merge: int = 0
    disjuncts: int = 0
    total_atoms: int = 0
    max_atoms: int = 0

    def lines(self) -> list[str]:
        return [
            f"mode: {self.mode}",
            f"lifting steps: {self.steps}",
            f"unsatisfiable disjuncts dropped: {self.dropped}",
            f"disjuncts before merge: {self.disjuncts_before_merge} "
            f"(total atoms {self.atoms_before_merge}, max {self.max_atoms_before_merge})",
            f"disjuncts: {self.disjuncts} (total atoms {self.total_atoms}, max {self.max_atoms})",
        ]


# ------------------------------------------------------------ cycle collapse

def collapse_directed_cycles(q: ConjunctiveQuery) -> ConjunctiveQuery | None:
    """Identify variables on reflexive directed cycles; None if a cycle is irreflexive.

    Every atom whose endpoints lie in one strongly connected component is on
    a directed cycle, so a component is either collapsed to its least variable
    or proves the query unsatisfiable.
    """
    mapping: dict[str, str] = {}
    for comp in strongly_connected_components(q):
        members = set(comp)
        inner = [a for a in q.binary if a.src in members and a.dst in members]
        if not inner:
            continue
        if any(a.axis not in REFLEXIVE for a in inner):
            return None
        keep = min(members)
        for v in members:
            mapping[v] = keep
    if not mapping:
        return q
    merged = q.substitute(mapping)
    binary = [a for a in merged.binary if not (a.src == a.dst and a.axis in REFLEXIVE)]
    unary = list(merged.unary)
    used = {a.var for a in unary} | {v for a in binary for v in (a.src, a.dst)}
    for v in sorted(set(mapping.values())):
        if v not in used:
            unary.append(UnaryAtom(NODE, v))
    return ConjunctiveQuery(merged.head, unary, binary, merged.name)


# ---------------------------------------------------------- preprocessing

def _fresh(taken: set[str], prefix: str = "w"):
    i = 1
    while True:
        name = f"{prefix}{i}"
        if name not in taken:
            taken.add(name)
            yield name
        i += 1


def expand_following(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Replace Following(x, y) by Child*(z1, x), NextSibling+(z1, z2), Child*(z2, y)."""
    if all(a.axis is not Axis.FOLLOWING for a in q.binary):
        return q
    fresh = _fresh(set(q.variables))
    binary: list[BinaryAtom] = []
    for a in q.binary:
        if a.axis is Axis.FOLLOWING:
            z1, z2 = next(fresh), next(fresh)
            binary += [BinaryAtom(Axis.CHILD_STAR, z1, a.src),
                       BinaryAtom(Axis.NEXT_SIBLING_PLUS, z1, z2),
                       BinaryAtom(Axis.CHILD_STAR, z2, a.dst)]
        else:
            binary.append(a)
    return ConjunctiveQuery(q.head, q.unary, binary, q.name)


def expand_child_star(q: ConjunctiveQuery) -> list[ConjunctiveQuery]:
    """The 2^n copies of ``q``: bit k of copy m picks Child+ (1) or identification (0)."""
    stars = [i for i, a in enumerate(q.binary) if a.axis is Axis.CHILD_STAR]
    out = []
    for m in range(2 ** len(stars)):
        rep = {v: v for v in q.variables}
        binary = list(q.binary)
        dropped = set()
        for k, pos in enumerate(stars):
            a = binary[pos]
            if m >> k & 1:
                binary[pos] = BinaryAtom(Axis.CHILD_PLUS, a.src, a.dst)
                continue
            dropped.add(pos)
            if a.src == a.dst:
                continue
            binary = [BinaryAtom(b.axis, a.src if b.src == a.dst else b.src,
                                 a.src if b.dst == a.dst else b.dst) for b in binary]
            rep = {v: a.src if r == a.dst else r for v, r in rep.items()}
        binary = [b for i, b in enumerate(binary) if i not in dropped]
        renamed = q.substitute(rep)
        used = {u.var for u in renamed.unary} | {v for b in binary for v in (b.src, b.dst)}
        unary = list(renamed.unary) + [UnaryAtom(NODE, v) for v in sorted(set(rep.values()) - used)]
        out.append(ConjunctiveQuery(renamed.head, unary, binary, q.name))
    return out


# ---------------------------------------------------------------- lifting

def pick_mode(sig) -> Mode:
    """Least axis-adding mode whose admissible set covers the signature.

    Mode 69 is never chosen: its Following lifters are not equivalences.
    """
    sig = frozenset(sig)
    for mode in (Mode.M66A, Mode.M66B, Mode.M66C):
        if sig <= ADMISSIBLE[mode]:
            return mode
    return Mode.M610


def _lift_once(q: ConjunctiveQuery, table) -> list[ConjunctiveQuery] | None:
    """One lifting step on a directed-acyclic query, or None if it is already a forest."""
    hit = find_undirected_cycle_indices(q)
    if hit is None:
        return None
    z, i, j = hit
    r, s = q.binary[i], q.binary[j]
    try:
        lif = table[r.axis, s.axis]
    except KeyError:
        raise LifterError(f"no lifter for ({r.axis.value}, {s.axis.value})") from None
    rest = [a for k, a in enumerate(q.binary) if k not in (i, j)]
    out = []
    for conj in lif:
        atoms, eq = conj.atoms(r.src, s.src, z)
        new = ConjunctiveQuery(q.head, q.unary, rest + [BinaryAtom(*a) for a in atoms], q.name)
        if eq is not None and eq[0] != eq[1]:
            kept, replaced = eq
            new = new.substitute({replaced: kept})
        out.append(new)
    return out


def _lift_all(source: ConjunctiveQuery, table, stats: RewriteStats, cap: int) -> list[ConjunctiveQuery]:
    done = []
    stack = [source]
    while stack:
        q = collapse_directed_cycles(stack.pop())
        if q is None:
            stats.dropped += 1
            continue
        nxt = _lift_once(q, table)
        if nxt is None:
            done.append(q)
            continue
        stats.steps += 1
        if stats.steps > cap:
            raise RewriteLimitError(f"rewrite exceeded {cap} lifting steps (last query: {q})")
        stack.extend(reversed(nxt))
    return done


def rewrite_with_stats(q: ConjunctiveQuery, mode: Mode | str = "auto",
                       cap: int = DEFAULT_CAP, merge: bool = True) -> tuple[PositiveQuery, RewriteStats]:
    sig = q.signature()
    mode = pick_mode(sig) if mode == "auto" else Mode(mode)
    if not sig <= ADMISSIBLE[mode]:
        extra = ", ".join(sorted(a.value for a in sig - ADMISSIBLE[mode]))
        raise RewriteError(f"mode {mode.value} does not admit axes: {extra}")
    if mode is Mode.M69 and Axis.FOLLOWING in sig:
        warnings.warn("mode 69 Following lifters are not equivalences; the result may differ from the input",
                      UnsoundLifterWarning, stacklevel=2)
    stats = RewriteStats(mode=mode.value)
    sources = [q]
    if mode is Mode.M610:
        sources = expand_child_star(expand_following(q))
    stats.sources = len(sources)
    stats.max_source_atoms = max(len(s) for s in sources)
    table = MODE_TABLES[mode]
    found: list[ConjunctiveQuery] = []
    for src in sources:
        found += _lift_all(src, table, stats, cap)
    stats.disjuncts_before_merge = len(found)
    stats.atoms_before_merge = sum(len(d) for d in found)
    stats.max_atoms_before_merge = max((len(d) for d in found), default=0)
    if merge:
        seen, kept = set(), []
        for d in found:
            key = canonical_key(d)
            if key not in seen:
                seen.add(key)
                kept.append(d)
        found = kept
    stats.disjuncts = len(found)
    stats.total_atoms = sum(len(d) for d in found)
    stats.max_atoms = max((len(d) for d in found), default=0)
    return PositiveQuery(tuple(found), arity=len(q.head)), stats


def rewrite_to_apq(q: ConjunctiveQuery, mode: Mode | str = "auto", cap: int = DEFAULT_CAP) -> PositiveQuery:
    """Equivalent union of acyclic conjunctive queries (see :func:`rewrite_with_stats`)."""
    return rewrite_with_stats(q, mode, cap)[0]


def output_axes_bound(q: ConjunctiveQuery, mode: Mode | str) -> frozenset[Axis]:
    """Axes the rewrite of ``q`` in ``mode`` may use."""
    mode = pick_mode(q.signature()) if mode == "auto" else Mode(mode)
    sig = q.signature()
    if mode is Mode.M610:
        sig = sig - {Axis.FOLLOWING, Axis.CHILD_STAR}
    return sig | ADDED_AXES[mode]


# ------------------------------------------------------ sampled equivalence

@dataclass
class EquivalenceVerdict:
    equivalent: bool
    counterexample: Tree | None = None
    only_left: list[tuple[int, ...]] = field(default_factory=list)
    only_right: list[tuple[int, ...]] = field(default_factory=list)
    trees_checked: int = 0

    def __bool__(self) -> bool:
        return self.equivalent

    def __str__(self) -> str:
        if self.equivalent:
            return f"no difference found ({self.trees_checked} trees)"
        return (f"differ on {self.counterexample}: only left {self.only_left[:5]}, "
                f"only right {self.only_right[:5]}")


def _labels_of(p) -> set[str]:
    return set(p.labels()) - {NODE}


def fresh_label(labels) -> str:
    i = 0
    while f"Fresh{i}" in labels:
        i += 1
    return f"Fresh{i}"


def sample_corpus(labels: Sequence[str], max_nodes: int = 6, trials: int = 50,
                  random_nodes: int = 12, seed: int = 0) -> list[TreeBatch]:
    """Enumerated trees up to ``max_nodes`` plus ``trials`` random larger trees.

    Enumeration uses the given labels (one per node at most); random trees
    may carry several labels per node and also use one label no query mentions.
    """
    labels = sorted(labels)
    trees = list(enumerate_trees(max_nodes, labels))
    rng = random.Random(seed)
    pool = labels + [fresh_label(labels)]
    lo = min(max_nodes + 1, random_nodes)
    for _ in range(trials):
        trees.append(random_tree(rng, rng.randint(lo, random_nodes), pool, multi=True))
    return group_by_shape(trees)


def is_equivalent_sampled(p1, p2, trials: int = 50, seed: int = 0, max_nodes: int = 6,
                          random_nodes: int = 12, corpus: list[TreeBatch] | None = None) -> EquivalenceVerdict:
    """Compare two queries on enumerated small trees and on random larger ones."""
    ar1 = len(p1.head) if isinstance(p1, ConjunctiveQuery) else p1.arity
    ar2 = len(p2.head) if isinstance(p2, ConjunctiveQuery) else p2.arity
    if ar1 != ar2:
        raise ValueError("queries have different head arity")
    if corpus is None:
        corpus = sample_corpus(_labels_of(p1) | _labels_of(p2), max_nodes, trials, random_nodes, seed)
    checked = 0
    for batch in corpus:
        a, b = union_tensor(batch, p1), union_tensor(batch, p2)
        diff = (a != b).reshape(len(batch), -1).any(axis=1)
        if diff.any():
            t = int(diff.nonzero()[0][0])
            left = [tuple(int(x) for x in r) for r in np.argwhere(a[t] & ~b[t])]
            right = [tuple(int(x) for x in r) for r in np.argwhere(b[t] & ~a[t])]
            return EquivalenceVerdict(False, batch.trees[t], left, right, checked + t + 1)
        checked += len(batch)
    return EquivalenceVerdict(True, trees_checked=checked)
