"""Diamond queries, path structures and the APQ size experiment.

A path structure is a :class:`~treecq.tree.Tree` whose Child graph is a
single path; here it is built from, and read back as, a list of label sets
from top to bottom.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .evaluate import TreeBatch, eval_backtracking, group_by_shape
from .query import BinaryAtom, ConjunctiveQuery, UnaryAtom, is_acyclic, is_directed_acyclic
from .rewrite import is_equivalent_sampled, rewrite_with_stats
from .tree import Axis, Tree, enumerate_trees, random_tree

CP, CS = Axis.CHILD_PLUS, Axis.CHILD_STAR


def X(i: int) -> str:
    return f"X{i}"


def Xp(i: int) -> str:
    return f"X'{i}"


def Y(i: int) -> str:
    return f"Y{i}"


# ------------------------------------------------------------- structures

def path_structure(label_sets: Sequence[Iterable[str]]) -> Tree:
    if not label_sets:
        raise ValueError("a path structure needs at least one node")
    n = len(label_sets)
    return Tree.from_parents([None] + list(range(n - 1)), [frozenset(s) for s in label_sets])


def is_path_structure(tree: Tree) -> bool:
    return all(len(tree.children[v]) <= 1 for v in tree.nodes)


def label_sequence(tree: Tree) -> list[frozenset[str]]:
    if not is_path_structure(tree):
        raise ValueError("not a path structure")
    return [tree.labels[v] for v in tree.nodes]


def format_path(label_sets: Iterable[Iterable[str]]) -> str:
    """``Y1._.X1`` style; several labels on one node are joined by commas."""
    return ".".join(",".join(sorted(s)) or "_" for s in label_sets)


def gen_diamond(n: int) -> ConjunctiveQuery:
    if n < 1:
        raise ValueError("n must be at least 1")
    unary = [UnaryAtom(Y(1), "y1")]
    binary = []
    for i in range(1, n + 1):
        y, y2, x, xp = f"y{i}", f"y{i + 1}", f"x{i}", f"x'{i}"
        unary += [UnaryAtom(X(i), x), UnaryAtom(Xp(i), xp), UnaryAtom(Y(i + 1), y2)]
        binary += [BinaryAtom(CP, y, x), BinaryAtom(CP, x, y2),
                   BinaryAtom(CP, y, xp), BinaryAtom(CP, xp, y2)]
    return ConjunctiveQuery((), unary, binary, f"D{n}")


def ps_length(n: int, p: int) -> int:
    return (3 * n + 1) + (3 * n + 2) * p


def gen_ps(n: int, p: int, bits: Sequence[bool]) -> Tree:
    """Y1, then per i the pair X_i, X'_i (swapped when bits[i]) and Y_{i+1};
    every labeled node is separated from its neighbours and the ends by p blank nodes."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be at least 1")
    if len(bits) != n:
        raise ValueError(f"expected {n} bits, got {len(bits)}")
    labeled = [Y(1)]
    for i, b in enumerate(bits, 1):
        pair = [Xp(i), X(i)] if b else [X(i), Xp(i)]
        labeled += pair + [Y(i + 1)]
    seq: list[frozenset[str]] = []
    for lab in labeled:
        seq += [frozenset()] * p + [frozenset({lab})]
    seq += [frozenset()] * p
    return path_structure(seq)


def all_ps(n: int, p: int) -> list[Tree]:
    return [gen_ps(n, p, bits) for bits in itertools.product((False, True), repeat=n)]


def is_k_scattered(ps: Tree, k: int) -> bool:
    """Labels single and distinct, and each labeled node at distance at least k
    from the top node, the bottom node, and every other labeled node."""
    seq = label_sequence(ps)
    if len(seq) < k:
        return False
    seen: set[str] = set()
    marked = []
    for depth, labels in enumerate(seq):
        if len(labels) > 1:
            return False
        if labels:
            (lab,) = labels
            if lab in seen:
                return False
            seen.add(lab)
            marked.append(depth)
    bottom = len(seq) - 1
    for i, d in enumerate(marked):
        if d < k or bottom - d < k:
            return False
        if i and d - marked[i - 1] < k:
            return False
    return True


# --------------------------------------------------------------- paths

def variable_paths(q: ConjunctiveQuery) -> list[tuple[str, ...]]:
    """All directed paths from in-degree-0 to out-degree-0 variables, sorted."""
    if not is_directed_acyclic(q):
        raise ValueError("query graph has a directed cycle")
    succ: dict[str, set[str]] = {v: set() for v in q.variables}
    indeg = {v: 0 for v in succ}
    for a in q.binary:
        if a.dst not in succ[a.src]:
            succ[a.src].add(a.dst)
            indeg[a.dst] += 1
    out: list[tuple[str, ...]] = []

    def walk(path: list[str]) -> None:
        nxt = succ[path[-1]]
        if not nxt:
            out.append(tuple(path))
            return
        for w in sorted(nxt):
            walk(path + [w])

    for v in sorted(succ):
        if indeg[v] == 0:
            walk([v])
    return sorted(out)


def label_path(q: ConjunctiveQuery, path: Sequence[str]) -> tuple[frozenset[str], ...]:
    labels: dict[str, set[str]] = {}
    for a in q.unary:
        labels.setdefault(a.var, set()).add(a.label)
    return tuple(frozenset(labels.get(v, ())) for v in path)


def label_paths(q: ConjunctiveQuery) -> list[tuple[frozenset[str], ...]]:
    return [label_path(q, p) for p in variable_paths(q)]


# ------------------------------------------------------- separating models

def lemma73_structure(q: ConjunctiveQuery, gamma: Sequence[str]) -> Tree:
    """Path structure on which q is true although it separates gamma.

    Label paths of q are grouped by the first label of gamma they miss: those
    without gamma[0] come first, then those with gamma[0] but not gamma[1],
    and so on. Inside a group the order is lexicographic on :func:`format_path`.
    """
    if not q.signature() <= {CS, CP}:
        raise ValueError("query may only use child* and child+")
    if not gamma:
        raise ValueError("gamma must name at least one label")
    lps = label_paths(q)
    groups: list[list[tuple[frozenset[str], ...]]] = [[] for _ in gamma]
    for lp in lps:
        present = set().union(*lp)
        miss = next((i for i, e in enumerate(gamma) if e not in present), None)
        if miss is None:
            raise ValueError(f"label path {format_path(lp)} contains every label of gamma")
        groups[miss].append(lp)
    seq: list[frozenset[str]] = []
    for g in groups:
        for lp in sorted(g, key=format_path):
            seq += lp
    return path_structure(seq)


def example78_query() -> ConjunctiveQuery:
    """Tree-shaped query with label paths Y1.X1.Y2.X2.Y3, Y1.X1.Y2.X'2.Y3, Y1.X'1.Y2.X2.Y3."""
    unary = [UnaryAtom(Y(1), "y1"), UnaryAtom(X(1), "a1"), UnaryAtom(Y(2), "a2"),
             UnaryAtom(X(2), "a3"), UnaryAtom(Y(3), "a4"), UnaryAtom(Xp(2), "b3"), UnaryAtom(Y(3), "b4"),
             UnaryAtom(Xp(1), "c1"), UnaryAtom(Y(2), "c2"), UnaryAtom(X(2), "c3"), UnaryAtom(Y(3), "c4")]
    edges = [("y1", "a1"), ("a1", "a2"), ("a2", "a3"), ("a3", "a4"), ("a2", "b3"), ("b3", "b4"),
             ("y1", "c1"), ("c1", "c2"), ("c2", "c3"), ("c3", "c4")]
    return ConjunctiveQuery((), unary, [BinaryAtom(CP, s, d) for s, d in edges], "Q")


def example78() -> tuple[ConjunctiveQuery, Tree, bool, bool]:
    """The separating structure for the query above and D2 with gamma = (X'1, X'2)."""
    q = example78_query()
    m = lemma73_structure(q, [Xp(1), Xp(2)])
    return q, m, bool(eval_backtracking(m, q)), bool(eval_backtracking(m, gen_diamond(2)))


# ----------------------------------------------------------- experiment

@dataclass
class BlowupRow:
    n: int
    query_atoms: int
    disjuncts_before_merge: int
    atoms_before_merge: int
    disjuncts: int
    total_atoms: int
    max_atoms: int
    acyclic: bool
    equivalent: bool
    trees_checked: int


@dataclass
class BlowupReport:
    mode: str
    rows: list[BlowupRow] = field(default_factory=list)

    COLUMNS = ("n", "query_atoms", "disjuncts_before_merge", "atoms_before_merge",
               "disjuncts", "total_atoms", "max_atoms", "acyclic", "equivalent", "trees_checked")

    def grows(self) -> bool:
        sizes = [r.total_atoms for r in self.rows]
        return all(a < b for a, b in zip(sizes, sizes[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for r in self.rows:
            w.writerow([getattr(r, c) for c in self.COLUMNS])
        return buf.getvalue()

    def to_text(self) -> str:
        head = ["n", "|Dn|", "disj(raw)", "atoms(raw)", "disj", "atoms", "max", "acyclic", "equiv", "trees"]
        body = [[str(getattr(r, c)) for c in self.COLUMNS] for r in self.rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
        lines = [f"APQ size for the n-diamond query (mode {self.mode})",
                 "  ".join(h.rjust(w) for h, w in zip(head, widths))]
        lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
        verdict = "grows strictly" if self.grows() else "does not grow strictly"
        lines.append(f"total APQ size {verdict} over the measured n")
        return "\n".join(lines) + "\n"


def diamond_corpus(n: int, max_nodes: int = 4, random_trees: int = 200, seed: int = 0) -> list[TreeBatch]:
    """Trees for comparing D_n with its rewriting.

    Enumerated small trees over two of D_n's labels, every structure of
    PS(n, 1), each of those with one labeled node blanked out, and random
    trees carrying several labels per node.
    """
    labels = sorted({a.label for a in gen_diamond(n).unary})
    rng = random.Random(seed)
    trees: list[Tree] = list(enumerate_trees(max_nodes, [Y(1), Y(2)]))
    for ps in all_ps(n, 1):
        trees.append(ps)
        seq = label_sequence(ps)
        for i, s in enumerate(seq):
            if s:
                trees.append(path_structure(seq[:i] + [frozenset()] + seq[i + 1:]))
    for _ in range(random_trees):
        trees.append(random_tree(rng, rng.randint(2 * n + 2, 4 * n + 6), labels, multi=True))
    return group_by_shape(trees)


def blowup_experiment(n_max: int, mode: str = "auto", seed: int = 0, cap: int | None = None) -> BlowupReport:
    report = BlowupReport(mode)
    for n in range(1, n_max + 1):
        d = gen_diamond(n)
        kw = {} if cap is None else {"cap": cap}
        apq, stats = rewrite_with_stats(d, mode, **kw)
        report.mode = stats.mode
        verdict = is_equivalent_sampled(d, apq, corpus=diamond_corpus(n, seed=seed))
        report.rows.append(BlowupRow(
            n=n, query_atoms=len(d),
            disjuncts_before_merge=stats.disjuncts_before_merge,
            atoms_before_merge=stats.atoms_before_merge,
            disjuncts=stats.disjuncts, total_atoms=stats.total_atoms, max_atoms=stats.max_atoms,
            acyclic=all(is_acyclic(c) for c in apq), equivalent=bool(verdict),
            trees_checked=verdict.trees_checked,
        ))
    return report
