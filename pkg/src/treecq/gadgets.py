"""Reductions from positive 1-in-3 SAT to Boolean conjunctive query evaluation.

Each reduction pairs a fixed data tree with a query built from the instance;
the query is true on the tree exactly when the instance has an assignment
making one literal per clause true. The trees are small, so the queries do
all the work.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .query import BinaryAtom, ConjunctiveQuery, UnaryAtom
from .tree import Axis, Tree, parse_tree

C, CP, CS = Axis.CHILD, Axis.CHILD_PLUS, Axis.CHILD_STAR
N, NP, NS = Axis.NEXT_SIBLING, Axis.NEXT_SIBLING_PLUS, Axis.NEXT_SIBLING_STAR
F = Axis.FOLLOWING


class InstanceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class OneInThreeInstance:
    """Clauses of three distinct positive literals over variables 0..num_vars-1."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for c in self.clauses:
            if len(c) != 3:
                raise ValueError(f"clause {c} does not have three literals")
            if len(set(c)) != 3:
                raise ValueError(f"clause {c} repeats a literal")
            if not all(0 <= v < self.num_vars for v in c):
                raise ValueError(f"clause {c} mentions a variable outside 0..{self.num_vars - 1}")

    @classmethod
    def parse(cls, text: str) -> "OneInThreeInstance":
        """One clause per line, three 1-based variable numbers; ``#`` starts a comment."""
        clauses = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                lits = [int(tok) for tok in line.split()]
            except ValueError:
                raise InstanceFormatError(f"line {lineno}: expected integers") from None
            if len(lits) != 3 or min(lits) < 1:
                raise InstanceFormatError(f"line {lineno}: need three positive variable numbers")
            clauses.append(tuple(v - 1 for v in lits))
        num_vars = max((v for c in clauses for v in c), default=-1) + 1
        try:
            return cls(num_vars, tuple(clauses))
        except ValueError as e:
            raise InstanceFormatError(str(e)) from None

    def format(self) -> str:
        return "".join(" ".join(str(v + 1) for v in c) + "\n" for c in self.clauses)

    def canonical(self) -> "OneInThreeInstance":
        """Rename variables by first occurrence, after sorting clauses by that renaming.

        Two instances equal up to variable renaming and clause order map to the
        same canonical instance (the clause order is fixed by trying all of them).
        """
        best = None
        for perm in itertools.permutations(self.clauses):
            ren: dict[int, int] = {}
            out = []
            for c in perm:
                out.append(tuple(ren.setdefault(v, len(ren)) for v in c))
            key = tuple(out)
            if best is None or key < best:
                best = key
        return OneInThreeInstance(len({v for c in self.clauses for v in c}), best or ())


def solve_1in3(inst: OneInThreeInstance, budget: int = 1 << 22) -> tuple[bool, ...] | None:
    """First satisfying assignment in lexicographic order, or None."""
    if 2 ** inst.num_vars > budget:
        raise ValueError(f"2^{inst.num_vars} assignments exceed budget {budget}")
    for bits in itertools.product((False, True), repeat=inst.num_vars):
        if all(bits[a] + bits[b] + bits[c] == 1 for a, b, c in inst.clauses):
            return bits
    return None


def brute_1in3(inst: OneInThreeInstance, budget: int = 1 << 22) -> bool:
    return solve_1in3(inst, budget) is not None


def small_instances(max_clauses: int = 3, max_vars: int = 5) -> Iterator[OneInThreeInstance]:
    """Every instance with up to max_clauses clauses over up to max_vars variables,
    one representative per canonical form."""
    triples = list(itertools.permutations(range(max_vars), 3))
    seen = set()
    for m in range(max_clauses + 1):
        for clauses in itertools.combinations_with_replacement(triples, m):
            inst = OneInThreeInstance(max_vars, clauses).canonical()
            if inst not in seen:
                seen.add(inst)
                yield inst


def random_instance(rng: random.Random, num_vars: int, num_clauses: int) -> OneInThreeInstance:
    return OneInThreeInstance(num_vars, tuple(tuple(rng.sample(range(num_vars), 3))
                                              for _ in range(num_clauses)))


# ------------------------------------------------------------------ helpers

@dataclass
class GadgetOutput:
    tree: Tree
    query: ConjunctiveQuery
    signature_tag: str


SIGNATURES = {
    "tau4": frozenset({C, CP}),
    "tau5": frozenset({C, CS}),
    "tau6": frozenset({C, F}),
    "tau7": frozenset({CP, F}),
    "tau8": frozenset({CS, F}),
    "tau15": frozenset({F, N}),
    "tau16": frozenset({F, NP}),
    "tau17": frozenset({F, NS}),
}


def _sexpr(node) -> str:
    labels, kids = node
    head = ",".join(labels) if labels else "-"
    return "(" + " ".join([head] + [_sexpr(k) for k in kids]) + ")"


def _node(*labels, kids=()):
    return (tuple(labels), list(kids))


class _Builder:
    """Accumulates query atoms; shortcut chains get fresh middle variables."""

    def __init__(self):
        self.unary: list[UnaryAtom] = []
        self.binary: list[BinaryAtom] = []
        self._fresh = 0

    def label(self, label: str, var: str) -> None:
        self.unary.append(UnaryAtom(label, var))

    def chain(self, axis: Axis, src: str, dst: str, k: int) -> None:
        if k < 1:
            raise ValueError("chains need at least one step")
        prev = src
        for step in range(k - 1):
            self._fresh += 1
            mid = f"m{self._fresh}"
            self.binary.append(BinaryAtom(axis, prev, mid))
            prev = mid
        self.binary.append(BinaryAtom(axis, prev, dst))

    def query(self) -> ConjunctiveQuery:
        return ConjunctiveQuery((), self.unary, self.binary)


def push_down_labels(tree: Tree) -> Tree:
    """Move every label to a new leaf child of its node, so each node has at most one label."""
    def build(v):
        kids = [build(c) for c in tree.children[v]]
        kids += [_node(a) for a in sorted(tree.labels[v])]
        return _node(kids=kids)
    return parse_tree(_sexpr(build(0)))


def push_down_query(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Rewrite each label atom L(v) as Child(v, u), L(u) with a fresh u."""
    unary, binary = [], list(q.binary)
    for i, a in enumerate(q.unary):
        u = f"p{i + 1}_{a.var}"
        binary.append(BinaryAtom(C, a.var, u))
        unary.append(UnaryAtom(a.label, u))
    return ConjunctiveQuery(q.head, unary, binary, q.name)


# ---------------------------------------------------------- Child / Child+*

def tau45_tree(push_down: bool = True) -> Tree:
    """Path v1, v2, v3 (labeled X) with three chains w[k][1..10] below v3.

    w[k][k] is labeled Y, w[k][5+k] carries L_k, and w[k][4..10] carry the two
    other L labels. From v_l, 8+k-l steps down through w[k][k] reach w[k][5+k].
    """
    chains = []
    for k in (1, 2, 3):
        below = None
        for i in range(10, 0, -1):
            labels = set()
            if i == k:
                labels.add("Y")
            if i == 5 + k:
                labels.add(f"L{k}")
            if 4 <= i <= 10:
                labels |= {f"L{j}" for j in (1, 2, 3) if j != k}
            below = _node(*sorted(labels), kids=[below] if below else [])
        chains.append(below)
    v3 = _node("X", kids=chains)
    v2 = _node("X", kids=[v3])
    v1 = _node("X", kids=[v2])
    tree = parse_tree(_sexpr(v1))
    return push_down_labels(tree) if push_down else tree


def _occurrences(inst: OneInThreeInstance):
    """(k, l, i, j), 1-based: the k-th literal of C_i is the l-th literal of C_j, i != j."""
    for i, ci in enumerate(inst.clauses, 1):
        for j, cj in enumerate(inst.clauses, 1):
            if i == j:
                continue
            for k, l in itertools.product((1, 2, 3), repeat=2):
                if ci[k - 1] == cj[l - 1]:
                    yield k, l, i, j


def reduce_tau45(inst: OneInThreeInstance, star: bool = False, push_down: bool = True) -> GadgetOutput:
    """Child with Child+ (star=False) or Child* (star=True)."""
    b = _Builder()
    down = CS if star else CP
    for i in range(1, len(inst.clauses) + 1):
        b.label("X", f"x{i}")
        b.label("Y", f"y{i}")
        b.chain(C, f"x{i}", f"y{i}", 3)
    for k, l, i, j in _occurrences(inst):
        z = f"z{k}_{l}_{i}_{j}"
        b.label(f"L{k}", z)
        b.binary.append(BinaryAtom(down, f"y{i}", z))
        b.chain(C, f"x{j}", z, 8 + k - l)
    q = b.query()
    if push_down:
        q = push_down_query(q)
    return GadgetOutput(tau45_tree(push_down), q, "tau5" if star else "tau4")


# ------------------------------------------------------------ Following

# Both Following gadgets use seven positions per clause tree: 1, 3, 6 are the
# topmost places for v1, v2, v3 and enclose the alternatives 2, (4, 5), 7.
# Mapping v_k to its topmost position means literal k is the true one. Helper
# nodes labeled A/B/C sit next to the positions, and Following-distance atoms
# between positions and helpers admit exactly the triples
# (1, 4, 7), (2, 3, 7), (2, 5, 6).

TOP_POSITIONS = (1, 3, 6)
ADMITTED_TRIPLES = frozenset({(1, 4, 7), (2, 3, 7), (2, 5, 6)})


def tau6_clause_tree():
    """Helpers hang below the positions."""
    p1 = _node("L1", kids=[_node("A"), _node("L1", kids=[_node("A")]), _node()])
    p3 = _node("L2", kids=[_node(), _node("L2", kids=[_node("B")]), _node("B"),
                           _node("L2", kids=[_node("B")]), _node()])
    p6 = _node("L3", kids=[_node(), _node("L3", kids=[_node("C")]), _node("C")])
    return _node(kids=[p1, p3, p6])


def tau15_clause_tree():
    """Helpers are siblings: A before each L1, B on both sides of each L2, C after each L3.

    The inner L2 positions sit in separate sibling lists so that each has one
    B on either side; NextSibling+ and NextSibling* then pick the same helpers.
    """
    p1 = _node("L1", kids=[_node(), _node("A"), _node("L1"), _node()])
    inner = _node(kids=[_node("B"), _node("L2"), _node("B")])
    p3 = _node("L2", kids=[_node(), inner, inner, _node()])
    p6 = _node("L3", kids=[_node(), _node("L3"), _node("C"), _node()])
    return _node(kids=[_node("A"), p1, _node("B"), p3, _node("B"), p6, _node("C")])


def _doubled(clause_tree) -> Tree:
    return parse_tree(_sexpr(_node(kids=[clause_tree, clause_tree])))


def tau6_tree() -> Tree:
    """Two copies of the clause tree under a common root."""
    return _doubled(tau6_clause_tree())


def tau15_tree() -> Tree:
    return _doubled(tau15_clause_tree())


def _leaf_profile(clause_tree) -> list[tuple[int, int]]:
    """(leaves before, leaves after) for each topmost position inside one clause tree."""
    t = parse_tree(_sexpr(clause_tree))
    leaf = [not t.children[v] for v in t.nodes]
    total = sum(leaf)
    tops = [v for v in t.children[0] if t.labels[v] & {"L1", "L2", "L3"}]
    return [(sum(leaf[:v]), total - sum(leaf[:t.subtree_end[v] + 1])) for v in tops]


def nand_table(clause_tree) -> dict[tuple[int, int], int]:
    """Smallest d such that Following^d fails exactly between the two topmost positions.

    With the clause tree twice under a root, Following^d(u, w) for u in the
    left copy and w in the right one holds iff at least d - 1 leaves lie
    strictly between them; the topmost positions have the fewest.
    """
    prof = _leaf_profile(clause_tree)
    return {(k, l): prof[k - 1][1] + prof[l - 1][0] + 2 for k in (1, 2, 3) for l in (1, 2, 3)}


TAU6_NAND = nand_table(tau6_clause_tree())
TAU15_NAND = nand_table(tau15_clause_tree())


def _names(prefix: str, *vs: str) -> dict[str, str]:
    return {v: f"{prefix}{v}" for v in vs}


def _tau6_clause(b: _Builder, prefix: str, child_axis: Axis) -> None:
    n = _names(prefix, "v1", "v2", "v3", "a", "b", "c")
    for k, h in zip((1, 2, 3), "abc"):
        b.label(f"L{k}", n[f"v{k}"])
        b.label(h.upper(), n[h])
        b.binary.append(BinaryAtom(child_axis, n[f"v{k}"], n[h]))
    for x, y, d in (("v1", "v2", 2), ("a", "b", 4), ("v1", "v3", 7), ("v2", "v3", 2), ("b", "c", 4)):
        b.chain(F, n[x], n[y], d)


def _tau15_clause(b: _Builder, prefix: str, sibling_axis: Axis) -> None:
    # a before v1, b2 after v2, b1 before v2, c after v3
    n = _names(prefix, "v1", "v2", "v3", "a", "b1", "b2", "c")
    for k in (1, 2, 3):
        b.label(f"L{k}", n[f"v{k}"])
    for h, lab in (("a", "A"), ("b1", "B"), ("b2", "B"), ("c", "C")):
        b.label(lab, n[h])
    for x, y in (("a", "v1"), ("v2", "b2"), ("b1", "v2"), ("v3", "c")):
        b.binary.append(BinaryAtom(sibling_axis, n[x], n[y]))
    for x, y, d in (("v1", "v2", 3), ("a", "b2", 8), ("v1", "v3", 12), ("v2", "v3", 3), ("b1", "c", 8)):
        b.chain(F, n[x], n[y], d)


def _wire_nand(b: _Builder, inst: OneInThreeInstance, nand: dict[tuple[int, int], int],
               left: str = "q", right: str = "r") -> None:
    """Following^NAND(k,l) from left-copy gadgets to right-copy gadgets.

    Added whenever literal k of clause i also occurs in clause j but is not
    literal l there, so the two cannot both be the chosen literal.
    """
    for i, ci in enumerate(inst.clauses, 1):
        for j, cj in enumerate(inst.clauses, 1):
            for k, l in itertools.product((1, 2, 3), repeat=2):
                lit = ci[k - 1]
                if lit in cj and lit != cj[l - 1]:
                    b.chain(F, f"{left}{i}_v{k}", f"{right}{j}_v{l}", nand[k, l])


def _following_reduction(inst, clause, axis, tree, nand, tag) -> GadgetOutput:
    b = _Builder()
    for i in range(1, len(inst.clauses) + 1):
        clause(b, f"q{i}_", axis)
        clause(b, f"r{i}_", axis)
    _wire_nand(b, inst, nand)
    return GadgetOutput(tree, b.query(), tag)


def reduce_tau6(inst: OneInThreeInstance, child_axis: Axis = C) -> GadgetOutput:
    """Child and Following; child_axis Child+ or Child* gives the tau7/tau8 variants."""
    tag = {C: "tau6", CP: "tau7", CS: "tau8"}[child_axis]
    return _following_reduction(inst, _tau6_clause, child_axis, tau6_tree(), TAU6_NAND, tag)


def reduce_tau15(inst: OneInThreeInstance, sibling_axis: Axis = N) -> GadgetOutput:
    """NextSibling and Following; NextSibling+ or NextSibling* gives tau16/tau17."""
    tag = {N: "tau15", NP: "tau16", NS: "tau17"}[sibling_axis]
    return _following_reduction(inst, _tau15_clause, sibling_axis, tau15_tree(), TAU15_NAND, tag)


# -------------------------------------------------------------- subdivision

def subdivide_edges(tree: Tree) -> Tree:
    """Insert an unlabeled node in the middle of every parent-child edge."""
    def build(v):
        node = _node(*sorted(tree.labels[v]), kids=[_node(kids=[build(c)]) for c in tree.children[v]])
        return node
    return parse_tree(_sexpr(build(0)))
