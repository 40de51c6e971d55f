"""Query evaluation: arc consistency, minimum valuations, backtracking and brute force.

Candidate sets are Python ints used as bitsets over node ids.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

import numpy as np

from .query import NODE, ConjunctiveQuery, PositiveQuery
from .tree import Tree
from .xbar import FAMILIES, OrderTag, classify

PreValuation = dict[str, frozenset[int]]
Valuation = dict[str, int]

DEFAULT_BUDGET = 2_000_000


class NotTractableError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _initial_domains(tree: Tree, q: ConjunctiveQuery,
                     fixed: Mapping[str, int] | None = None) -> dict[str, int] | None:
    full = (1 << len(tree)) - 1
    dom = {v: full for v in q.variables}
    for a in q.unary:
        if a.label == NODE:
            continue
        m = 0
        for v in tree.nodes:
            if a.label in tree.labels[v]:
                m |= 1 << v
        dom[a.var] &= m
    if fixed:
        for var, node in fixed.items():
            dom[var] &= 1 << node
    if any(m == 0 for m in dom.values()):
        return None
    return dom


def _revise_naive(tree: Tree, q: ConjunctiveQuery, dom: dict[str, int]) -> bool:
    """Recompute-to-fixpoint arc consistency in place; False when a domain empties."""
    atoms = [(_masks(tree, a.axis, True), _masks(tree, a.axis, False), a.src, a.dst)
             for a in q.binary]
    changed = True
    while changed:
        changed = False
        for succ, pred, x, y in atoms:
            dx, dy = dom[x], dom[y]
            nx = 0
            for v in _bits(dx):
                if succ[v] & dy:
                    nx |= 1 << v
            if nx != dx:
                if not nx:
                    return False
                dom[x] = nx
                changed = True
            dx = dom[x]
            dy = dom[y]
            ny = 0
            for w in _bits(dy):
                if pred[w] & dx:
                    ny |= 1 << w
            if ny != dy:
                if not ny:
                    return False
                dom[y] = ny
                changed = True
    return True


def _masks(tree: Tree, axis, forward: bool):
    tree.successor_mask(axis, 0)
    return tree._succ[axis] if forward else tree._pred[axis]


def _revise_support(tree: Tree, q: ConjunctiveQuery, dom: dict[str, int]) -> bool:
    """Arc consistency with per-(atom, node) support counters and deletion propagation."""
    atoms = []
    for a in q.binary:
        atoms.append((_masks(tree, a.axis, True), _masks(tree, a.axis, False), a.src, a.dst))
    by_src: dict[str, list[int]] = {}
    by_dst: dict[str, list[int]] = {}
    for i, (_, _, x, y) in enumerate(atoms):
        by_src.setdefault(x, []).append(i)
        by_dst.setdefault(y, []).append(i)

    fwd: list[dict[int, int]] = []
    back: list[dict[int, int]] = []
    queue: list[tuple[str, int]] = []
    removed: dict[str, int] = {v: 0 for v in dom}

    def delete(var: str, node: int) -> None:
        if not (removed[var] >> node) & 1:
            removed[var] |= 1 << node
            queue.append((var, node))

    for succ, pred, x, y in atoms:
        f = {}
        for v in _bits(dom[x]):
            c = (succ[v] & dom[y]).bit_count()
            f[v] = c
            if c == 0:
                delete(x, v)
        b = {}
        for w in _bits(dom[y]):
            c = (pred[w] & dom[x]).bit_count()
            b[w] = c
            if c == 0:
                delete(y, w)
        fwd.append(f)
        back.append(b)

    while queue:
        var, node = queue.pop()
        # node leaves var's domain: supports it provided elsewhere drop by one
        for i in by_dst.get(var, ()):
            succ, pred, x, _ = atoms[i]
            for v in _bits(pred[node] & dom[x]):
                fwd[i][v] -= 1
                if fwd[i][v] == 0:
                    delete(x, v)
        for i in by_src.get(var, ()):
            succ, pred, _, y = atoms[i]
            for w in _bits(succ[node] & dom[y]):
                back[i][w] -= 1
                if back[i][w] == 0:
                    delete(y, w)
    for v in dom:
        dom[v] &= ~removed[v]
        if not dom[v]:
            return False
    return True


_METHODS = {"support": _revise_support, "naive": _revise_naive}


def _arc_consistent(tree: Tree, q: ConjunctiveQuery, fixed=None, method: str = "support"):
    dom = _initial_domains(tree, q, fixed)
    if dom is None:
        return None
    for a in q.binary:
        _masks(tree, a.axis, True)
    if not _METHODS[method](tree, q, dom):
        return None
    return dom


def arc_consistent_prevaluation(tree: Tree, q: ConjunctiveQuery, method: str = "support",
                                fixed: Mapping[str, int] | None = None) -> PreValuation | None:
    """The subset-maximal arc-consistent pre-valuation, or None if none exists."""
    dom = _arc_consistent(tree, q, fixed, method)
    if dom is None:
        return None
    return {v: frozenset(_bits(m)) for v, m in dom.items()}


def _order_for(q: ConjunctiveQuery, order: OrderTag | None) -> OrderTag:
    sig = q.signature()
    if order is None:
        verdict = classify(sig)
        if not verdict.tractable:
            raise NotTractableError(f"signature is not tractable: {verdict}")
        return verdict.order
    if not sig <= FAMILIES[order]:
        raise NotTractableError(f"axes {sorted(a.value for a in sig)} lack the X-property "
                                f"w.r.t. the {order.value} order")
    return order


def eval_xbar(tree: Tree, q: ConjunctiveQuery, order: OrderTag | None = None,
              method: str = "support", fixed: Mapping[str, int] | None = None) -> Valuation | None:
    """Minimum valuation of the maximal arc-consistent pre-valuation, or None.

    Only sound when every axis of ``q`` has the X-property w.r.t. ``order``;
    anything else raises :class:`NotTractableError`.
    """
    order = _order_for(q, order)
    dom = _arc_consistent(tree, q, fixed, method)
    if dom is None:
        return None
    rank = tree.rank(order.value)
    return {v: min(_bits(m), key=rank.__getitem__) for v, m in dom.items()}


def satisfies(tree: Tree, q: ConjunctiveQuery, valuation: Mapping[str, int]) -> bool:
    """Atom-by-atom check of a total valuation."""
    for a in q.unary:
        if a.label != NODE and a.label not in tree.labels[valuation[a.var]]:
            return False
    return all(tree.holds(a.axis, valuation[a.src], valuation[a.dst]) for a in q.binary)


# -------------------------------------------------------------- backtracking

class _Compiled:
    """Binary constraints as successor/predecessor mask tables.

    Parallel atoms are intersected, and non-head variables touching at most
    two other variables are eliminated by composing the relations around
    them; this keeps the head projection of the answer set unchanged.
    ``dom`` is narrowed in place and loses the eliminated variables;
    ``ok`` is False when elimination already shows there is no solution.
    """

    def __init__(self, tree: Tree, q: ConjunctiveQuery, dom: dict[str, int], keep: Iterable[str] = ()):
        self.n = len(tree)
        self.ok = True
        rel: dict[tuple[str, str], tuple[list[int], list[int]]] = {}
        for a in q.binary:
            succ = _masks(tree, a.axis, True)
            if a.src == a.dst:
                loop = 0
                for v in _bits(dom[a.src]):
                    if succ[v] >> v & 1:
                        loop |= 1 << v
                dom[a.src] = loop
                continue
            self._add(rel, a.src, a.dst, (succ, _masks(tree, a.axis, False)))
        if any(m == 0 for m in dom.values()):
            self.ok = False
        else:
            self._eliminate(rel, dom, set(keep))
        self.atoms = [(succ, pred, x, y) for (x, y), (succ, pred) in sorted(rel.items())]
        self.incident: dict[str, list[int]] = {}
        for i, (_, _, x, y) in enumerate(self.atoms):
            self.incident.setdefault(x, []).append(i)
            self.incident.setdefault(y, []).append(i)

    @staticmethod
    def _add(rel, x: str, y: str, tables) -> None:
        if (y, x) in rel or ((x, y) not in rel and y < x):
            x, y, tables = y, x, tables[::-1]
        if (x, y) in rel:
            old = rel[x, y]
            rel[x, y] = tuple([a & b for a, b in zip(o, t)] for o, t in zip(old, tables))
        else:
            rel[x, y] = (list(tables[0]), list(tables[1]))

    @staticmethod
    def _oriented(rel, x: str, m: str):
        """(successor, predecessor) tables of the constraint read from x to m."""
        return rel[x, m] if (x, m) in rel else rel[m, x][::-1]

    @staticmethod
    def _compose(first: Sequence[int], second: Sequence[int], src: int, mid: int, n: int) -> list[int]:
        out = [0] * n
        for v in _bits(src):
            acc = 0
            for w in _bits(first[v] & mid):
                acc |= second[w]
            out[v] = acc
        return out

    def _eliminate(self, rel, dom: dict[str, int], keep: set[str]) -> None:
        nbrs: dict[str, set[str]] = {v: set() for v in dom}
        for x, y in rel:
            nbrs[x].add(y)
            nbrs[y].add(x)
        work = sorted((v for v in dom if v not in keep), reverse=True)
        while work:
            m = work.pop()
            if m not in dom or m in keep or len(nbrs[m]) > 2:
                continue
            dm = dom[m]
            around = sorted(nbrs[m])
            if len(around) == 1:
                (x,) = around
                succ, _ = self._oriented(rel, x, m)
                dx = 0
                for v in _bits(dom[x]):
                    if succ[v] & dm:
                        dx |= 1 << v
                dom[x] = dx
                if not dx:
                    self.ok = False
                    return
            elif len(around) == 2:
                x, y = around
                (sxm, pxm), (smy, pmy) = self._oriented(rel, x, m), self._oriented(rel, m, y)
                succ = self._compose(sxm, smy, dom[x], dm, self.n)
                pred = self._compose(pmy, pxm, dom[y], dm, self.n)
                self._add(rel, x, y, (succ, pred))
                nbrs[x].add(y)
                nbrs[y].add(x)
            for x in around:
                rel.pop((x, m), None)
                rel.pop((m, x), None)
                nbrs[x].discard(m)
                work.append(x)
            del dom[m], nbrs[m]


def _propagate(comp: _Compiled, dom: dict[str, int], changed: Iterable[str] | None = None) -> bool:
    """AC-3 style revision starting from the atoms around ``changed`` (all atoms if None)."""
    if changed is None:
        queue = list(range(len(comp.atoms)))
    else:
        queue = [i for v in changed for i in comp.incident.get(v, ())]
    pending = set(queue)
    while queue:
        i = queue.pop()
        pending.discard(i)
        succ, pred, x, y = comp.atoms[i]
        dx, dy = dom[x], dom[y]
        nx = 0
        for v in _bits(dx):
            if succ[v] & dy:
                nx |= 1 << v
        if nx != dx:
            if not nx:
                return False
            dom[x] = dx = nx
            for j in comp.incident[x]:
                if j != i and j not in pending:
                    pending.add(j)
                    queue.append(j)
        ny = 0
        for w in _bits(dy):
            if pred[w] & dx:
                ny |= 1 << w
        if ny != dy:
            if not ny:
                return False
            dom[y] = ny
            for j in comp.incident[y]:
                if j not in pending:
                    pending.add(j)
                    queue.append(j)
    return True


def _open_part_is_forest(comp: _Compiled, dom: dict[str, int]) -> bool:
    """Atoms between non-singleton variables form a forest (no loops, no parallel atoms)."""
    root: dict[str, str] = {}

    def find(v: str) -> str:
        while root.get(v, v) != v:
            v = root[v]
        return v

    for _, _, x, y in comp.atoms:
        if dom[x] & (dom[x] - 1) and dom[y] & (dom[y] - 1):
            rx, ry = find(x), find(y)
            if rx == ry:
                return False
            root[rx] = ry
    return True


def _search(comp: _Compiled, dom: dict[str, int], changed: list[str] | None, head_vars: list[str],
            answers: set[tuple[int, ...]], head: tuple[str, ...], first: bool = False) -> bool:
    """Depth-first search; returns True once a full solution is found below this point.

    With ``first`` the search stops at the first answer instead of collecting all.
    """
    if not _propagate(comp, dom, changed):
        return False
    open_head = [v for v in head_vars if dom[v] & (dom[v] - 1)]
    pool = open_head or [v for v in dom if dom[v] & (dom[v] - 1)]
    if not pool or (not open_head and _open_part_is_forest(comp, dom)):
        # arc consistency on a forest of open variables extends to a solution
        answers.add(tuple(dom[v].bit_length() - 1 for v in head))
        return True
    var = min(pool, key=lambda v: (dom[v].bit_count(), v))
    found = False
    for node in _bits(dom[var]):
        child = dict(dom)
        child[var] = 1 << node
        if _search(comp, child, [var], head_vars, answers, head, first):
            found = True
            if first or not open_head:
                return True
    return found


def eval_backtracking(tree: Tree, q: ConjunctiveQuery,
                      fixed: Mapping[str, int] | None = None) -> set[tuple[int, ...]]:
    """Exact answer set by arc-consistency-pruned search (exponential worst case)."""
    dom = _initial_domains(tree, q, fixed)
    if dom is None:
        return set()
    answers: set[tuple[int, ...]] = set()
    head_vars = sorted(set(q.head))
    comp = _Compiled(tree, q, dom, keep=head_vars)
    if comp.ok:
        _search(comp, dom, None, head_vars, answers, q.head)
    return answers


def eval_bruteforce(tree: Tree, q: ConjunctiveQuery,
                    budget: int = DEFAULT_BUDGET) -> set[tuple[int, ...]]:
    """Exact answer set by enumerating every valuation (testing oracle)."""
    vs = q.variables
    n = len(tree)
    if n ** len(vs) > budget:
        raise BudgetExceeded(f"{n}^{len(vs)} valuations exceed budget {budget}")
    pos = {v: i for i, v in enumerate(vs)}
    unary = [(pos[a.var], a.label) for a in q.unary if a.label != NODE]
    binary = [(pos[a.src], pos[a.dst], a.axis) for a in q.binary]
    head = [pos[v] for v in q.head]
    out = set()
    for val in itertools.product(range(n), repeat=len(vs)):
        if all(lab in tree.labels[val[i]] for i, lab in unary) and \
                all(tree.holds(ax, val[i], val[j]) for i, j, ax in binary):
            out.add(tuple(val[i] for i in head))
    return out


# ------------------------------------------------------------------ k-ary

def _fixed_from_tuple(q: ConjunctiveQuery, t: tuple[int, ...]) -> dict[str, int] | None:
    if len(t) != len(q.head):
        raise ValueError(f"tuple arity {len(t)} does not match head arity {len(q.head)}")
    fixed: dict[str, int] = {}
    for var, node in zip(q.head, t):
        if fixed.setdefault(var, node) != node:
            return None
    return fixed


def check_tuple(tree: Tree, q: ConjunctiveQuery, t: tuple[int, ...]) -> bool:
    """Membership of ``t`` in the answer, via singleton constraints on the head variables."""
    fixed = _fixed_from_tuple(q, tuple(t))
    if fixed is None:
        return False
    for node in fixed.values():
        tree._check(node)
    boolean = ConjunctiveQuery((), q.unary, q.binary, q.name)
    verdict = classify(q.signature())
    if verdict.tractable:
        return eval_xbar(tree, boolean, verdict.order, fixed=fixed) is not None
    return bool(eval_backtracking(tree, boolean, fixed=fixed))


def enumerate_answers(tree: Tree, q: ConjunctiveQuery,
                      budget: int = DEFAULT_BUDGET) -> set[tuple[int, ...]]:
    n = len(tree)
    k = len(q.head)
    if n ** k > budget:
        raise BudgetExceeded(f"{n}^{k} candidate tuples exceed budget {budget}")
    pre = arc_consistent_prevaluation(tree, q)
    if pre is None:
        return set()
    candidates = itertools.product(*(sorted(pre[v]) for v in q.head))
    return {t for t in candidates if check_tuple(tree, q, t)}


# --------------------------------------------------------------- dispatch

STRATEGIES = ("auto", "xbar", "backtrack", "brute")


def evaluate(tree: Tree, q: ConjunctiveQuery | PositiveQuery, strategy: str = "auto",
             budget: int = DEFAULT_BUDGET) -> set[tuple[int, ...]]:
    """Answer set of a conjunctive or positive query."""
    if isinstance(q, PositiveQuery):
        out: set[tuple[int, ...]] = set()
        for d in q.disjuncts:
            out |= evaluate(tree, d, strategy, budget)
        return out
    if strategy == "brute":
        return eval_bruteforce(tree, q, budget)
    if strategy == "backtrack":
        return eval_backtracking(tree, q)
    tractable = classify(q.signature()).tractable
    if strategy == "xbar" or (strategy == "auto" and tractable):
        if q.is_boolean:
            return {()} if eval_xbar(tree, q) is not None else set()
        if strategy == "xbar" and not tractable:
            raise NotTractableError("signature is not tractable")
        return enumerate_answers(tree, q, budget)
    if strategy == "auto":
        return eval_backtracking(tree, q)
    raise ValueError(f"unknown strategy {strategy!r}")


def is_true(tree: Tree, q: ConjunctiveQuery | PositiveQuery) -> bool:
    """Boolean truth (for k-ary queries: nonempty answer)."""
    if isinstance(q, PositiveQuery):
        return any(is_true(tree, d) for d in q.disjuncts)
    dom = _initial_domains(tree, q)
    if dom is None:
        return False
    boolean = ConjunctiveQuery((), q.unary, q.binary, q.name) if q.head else q
    if classify(q.signature()).tractable:
        return eval_xbar(tree, boolean) is not None
    return bool(eval_backtracking(tree, boolean))


def witness(tree: Tree, q: ConjunctiveQuery) -> Valuation | None:
    """A satisfying valuation of every variable, or None.

    Tractable signatures take the minimum valuation; otherwise the first
    solution of the backtracking search is returned.
    """
    if classify(q.signature()).tractable:
        return eval_xbar(tree, q)
    dom = _initial_domains(tree, q)
    if dom is None:
        return None
    vs = list(q.variables)
    comp = _Compiled(tree, q, dom, keep=vs)
    answers: set[tuple[int, ...]] = set()
    if not comp.ok or not _search(comp, dom, None, vs, answers, tuple(vs), first=True):
        return None
    return dict(zip(vs, answers.pop()))


# ----------------------------------------------------- batched (one shape)

class TreeBatch:
    """Trees sharing one shape (parent array) but differing in their labels."""

    def __init__(self, trees: Sequence[Tree]):
        if not trees:
            raise ValueError("need at least one tree")
        self.trees = list(trees)
        self.base = self.trees[0]
        for t in self.trees:
            if t.parent != self.base.parent:
                raise ValueError("batched evaluation needs trees of identical shape")
        self._labels: dict[str, np.ndarray] = {}
        self._rels: dict = {}

    def __len__(self) -> int:
        return len(self.trees)

    def label_matrix(self, label: str) -> np.ndarray:
        m = self._labels.get(label)
        if m is None:
            m = np.array([[label in ls for ls in t.labels] for t in self.trees], dtype=bool)
            self._labels[label] = m
        return m

    def relation(self, axis) -> np.ndarray:
        r = self._rels.get(axis)
        if r is None:
            n = len(self.base)
            r = np.array([[self.base.holds(axis, u, v) for v in range(n)] for u in range(n)])
            self._rels[axis] = r
        return r


def group_by_shape(trees: Iterable[Tree]) -> list[TreeBatch]:
    groups: dict[tuple, list[Tree]] = {}
    for t in trees:
        groups.setdefault(t.parent, []).append(t)
    return [TreeBatch(g) for g in groups.values()]


def _as_batch(trees) -> TreeBatch:
    return trees if isinstance(trees, TreeBatch) else TreeBatch(trees)


def eval_xbar_batch(trees: TreeBatch | Sequence[Tree], q: ConjunctiveQuery,
                    order: OrderTag | None = None) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """:func:`eval_xbar` over many labelings of one tree shape at once.

    Domains become boolean arrays of shape (trees, nodes) and each revision
    is a boolean matrix product; the fixpoint is the same maximal pre-valuation.
    Returns the per-tree Boolean answer and the minimum valuation as one node
    array per variable (meaningful only where the answer is true).
    """
    order = _order_for(q, order)
    batch = _as_batch(trees)
    count, n = len(batch), len(batch.base)
    dom = {v: np.ones((count, n), dtype=bool) for v in q.variables}
    for a in q.unary:
        if a.label != NODE:
            dom[a.var] = dom[a.var] & batch.label_matrix(a.label)
    changed = True
    while changed:
        changed = False
        for a in q.binary:
            r = batch.relation(a.axis).astype(np.uint8)
            dx, dy = dom[a.src], dom[a.dst]
            nx = dx & ((dy.astype(np.uint8) @ r.T) > 0)
            ny = (nx if a.src == a.dst else dy) & ((nx.astype(np.uint8) @ r) > 0)
            if not (np.array_equal(nx, dx) and np.array_equal(ny, dy)):
                changed = True
                dom[a.src] = nx
                dom[a.dst] = ny
    alive = np.ones(count, dtype=bool)
    for m in dom.values():
        alive &= m.any(axis=1)
    by_pos = np.argsort(np.array(batch.base.rank(order.value)))
    valuation = {v: by_pos[np.argmax(m[:, by_pos], axis=1)] for v, m in dom.items()}
    return alive, valuation


def _structural_valuations(batch: TreeBatch, q: ConjunctiveQuery, budget: int) -> np.ndarray:
    vs = q.variables
    n, k = len(batch.base), len(vs)
    if n ** k > budget:
        raise BudgetExceeded(f"{n}^{k} valuations exceed budget {budget}")
    pos = {v: i for i, v in enumerate(vs)}
    grid = np.ones((n,) * k, dtype=bool)
    for a in q.binary:
        i, j = pos[a.src], pos[a.dst]
        rel = batch.relation(a.axis)
        shape = [1] * k
        shape[i] = n
        if i == j:
            grid = grid & np.diagonal(rel).reshape(shape)
        else:
            shape[j] = n
            grid = grid & (rel if i < j else rel.T).reshape(shape)
    return np.argwhere(grid)


def _label_ok(batch: TreeBatch, q: ConjunctiveQuery, vals: np.ndarray) -> np.ndarray:
    pos = {v: i for i, v in enumerate(q.variables)}
    ok = np.ones((len(batch), len(vals)), dtype=bool)
    for a in q.unary:
        if a.label != NODE:
            ok &= batch.label_matrix(a.label)[:, vals[:, pos[a.var]]]
    return ok


def eval_bruteforce_batch(trees: TreeBatch | Sequence[Tree], q: ConjunctiveQuery,
                          budget: int = DEFAULT_BUDGET) -> list[set[tuple[int, ...]]]:
    """:func:`eval_bruteforce` over many labelings of one shape.

    Every valuation is enumerated once against the structural atoms; label
    atoms are then checked for all labelings together.
    """
    batch = _as_batch(trees)
    vals = _structural_valuations(batch, q, budget)
    ok = _label_ok(batch, q, vals)
    pos = {v: i for i, v in enumerate(q.variables)}
    head = [pos[v] for v in q.head]
    return [{tuple(int(x) for x in r[head]) for r in vals[ok[i]]} for i in range(len(batch))]


def bruteforce_batch_boolean(trees: TreeBatch | Sequence[Tree], q: ConjunctiveQuery,
                             budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Per-tree truth of the existential closure of ``q`` by exhaustive enumeration."""
    batch = _as_batch(trees)
    vals = _structural_valuations(batch, q, budget)
    return _label_ok(batch, q, vals).any(axis=1)


def _broadcast(arr: np.ndarray, vs: tuple[str, ...], scope: list[str], n: int) -> np.ndarray:
    """Reorder a factor's variable axes to ``scope`` order and pad missing ones."""
    order = sorted(range(len(vs)), key=lambda i: scope.index(vs[i]))
    arr = arr.transpose([0] + [1 + i for i in order])
    return arr.reshape([arr.shape[0]] + [n if s in vs else 1 for s in scope])


def answer_tensor(trees: TreeBatch | Sequence[Tree], q: ConjunctiveQuery,
                  max_cells: int = 50_000_000) -> np.ndarray:
    """Exact answers of ``q`` on every tree of one shape, by variable elimination.

    The result has shape ``(trees,) + (nodes,) * len(head)``; entry
    ``[t, a1, .., ak]`` is true iff ``(a1, .., ak)`` is an answer on tree t.
    Non-head variables are summed out one at a time, smallest scope first.
    """
    batch = _as_batch(trees)
    count, n = len(batch), len(batch.base)
    factors: list[tuple[tuple[str, ...], np.ndarray]] = [((v,), np.ones((1, n), dtype=bool))
                                                         for v in q.variables]
    for a in q.unary:
        if a.label != NODE:
            factors.append(((a.var,), batch.label_matrix(a.label)))
    for a in q.binary:
        rel = batch.relation(a.axis)
        if a.src == a.dst:
            factors.append(((a.src,), np.diagonal(rel)[None, :]))
        else:
            factors.append(((a.src, a.dst), rel[None]))

    def join(group, scope):
        rows = max(f[1].shape[0] for f in group)
        if rows * n ** len(scope) > max_cells:
            raise BudgetExceeded(f"intermediate factor over {len(scope)} variables too large")
        out = np.ones((1,) + (n,) * len(scope), dtype=bool)
        for vs, arr in group:
            out = out & _broadcast(arr, vs, scope, n)
        return out

    keep = list(dict.fromkeys(q.head))
    todo = [v for v in q.variables if v not in keep]
    while todo:
        def scope_of(v):
            return sorted({u for vs, _ in factors if v in vs for u in vs})
        v = min(todo, key=lambda u: (len(scope_of(u)), u))
        scope = scope_of(v)
        group = [f for f in factors if v in f[0]]
        factors = [f for f in factors if v not in f[0]]
        joined = join(group, scope).any(axis=1 + scope.index(v))
        factors.append((tuple(u for u in scope if u != v), joined))
        todo.remove(v)
    res = join(factors, keep)
    res = np.broadcast_to(res, (count,) + res.shape[1:])
    if len(keep) == len(q.head):
        return np.ascontiguousarray(_broadcast(res, tuple(keep), list(q.head), n)) if keep else res.copy()
    # repeated head variables: take diagonals
    grids = np.meshgrid(*[np.arange(n)] * len(q.head), indexing="ij")
    first = {v: q.head.index(v) for v in keep}
    picked = res[(slice(None),) + tuple(grids[first[v]] for v in keep)]
    for i, v in enumerate(q.head):
        picked = picked & (grids[i] == grids[first[v]])[None]
    return picked


def union_tensor(trees: TreeBatch | Sequence[Tree], p: ConjunctiveQuery | PositiveQuery,
                 max_cells: int = 50_000_000) -> np.ndarray:
    batch = _as_batch(trees)
    if isinstance(p, ConjunctiveQuery):
        return answer_tensor(batch, p, max_cells)
    n = len(batch.base)
    out = np.zeros((len(batch),) + (n,) * max(p.arity, 0), dtype=bool)
    for d in p.disjuncts:
        out |= answer_tensor(batch, d, max_cells)
    return out


def tensor_answers(tensor: np.ndarray) -> list[set[tuple[int, ...]]]:
    """Convert an answer tensor into one answer set per tree."""
    return [{tuple(int(x) for x in r) for r in np.argwhere(t)} for t in tensor]
