"""Conjunctive and positive queries over tree axes, plus their query graphs."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .tree import Axis

NODE = "node"


class UnaryAtom(NamedTuple):
    label: str
    var: str

    def __str__(self) -> str:
        return f"{self.label}({self.var})"


class BinaryAtom(NamedTuple):
    axis: Axis
    src: str
    dst: str

    def __str__(self) -> str:
        return f"{self.axis.value}({self.src},{self.dst})"


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class ConjunctiveQuery:
    head: tuple[str, ...]
    unary: tuple[UnaryAtom, ...] = ()
    binary: tuple[BinaryAtom, ...] = ()
    name: str = "q"

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(self.head))
        # unary atoms form a set, binary atoms a multiset
        object.__setattr__(self, "unary", tuple(sorted(set(UnaryAtom(*a) for a in self.unary))))
        object.__setattr__(self, "binary", tuple(BinaryAtom(*a) for a in self.binary))
        body = self.body_variables()
        for v in self.head:
            if v not in body:
                raise ValueError(f"unsafe head variable {v!r}")

    def body_variables(self) -> set[str]:
        out = {a.var for a in self.unary}
        for a in self.binary:
            out.add(a.src)
            out.add(a.dst)
        return out

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(self.body_variables()))

    @property
    def is_boolean(self) -> bool:
        return not self.head

    def __len__(self) -> int:
        return len(self.unary) + len(self.binary)

    size = property(__len__)

    def signature(self) -> frozenset[Axis]:
        return frozenset(a.axis for a in self.binary)

    def labels(self) -> frozenset[str]:
        return frozenset(a.label for a in self.unary if a.label != NODE)

    def substitute(self, mapping: Mapping[str, str]) -> "ConjunctiveQuery":
        def s(v: str) -> str:
            return mapping.get(v, v)

        return ConjunctiveQuery(
            tuple(s(v) for v in self.head),
            tuple(UnaryAtom(a.label, s(a.var)) for a in self.unary),
            tuple(BinaryAtom(a.axis, s(a.src), s(a.dst)) for a in self.binary),
            self.name,
        )

    def with_atoms(self, unary: Iterable[UnaryAtom] = (), binary: Iterable[BinaryAtom] = ()) -> "ConjunctiveQuery":
        return ConjunctiveQuery(self.head, self.unary + tuple(unary), self.binary + tuple(binary), self.name)

    def __str__(self) -> str:
        return serialize_query(self)


@dataclass(frozen=True)
class PositiveQuery:
    """Finite union of conjunctive queries sharing the head arity."""

    disjuncts: tuple[ConjunctiveQuery, ...]
    arity: int = field(default=-1)

    def __post_init__(self):
        ds = tuple(self.disjuncts)
        object.__setattr__(self, "disjuncts", ds)
        arities = {len(d.head) for d in ds}
        if len(arities) > 1:
            raise ValueError("disjuncts disagree on head arity")
        if ds:
            object.__setattr__(self, "arity", arities.pop())
        elif self.arity < 0:
            raise ValueError("an empty union needs an explicit arity")

    def __len__(self) -> int:
        return len(self.disjuncts)

    def __iter__(self):
        return iter(self.disjuncts)

    @property
    def size(self) -> int:
        return sum(len(d) for d in self.disjuncts)

    def is_apq(self) -> bool:
        return all(is_acyclic(d) for d in self.disjuncts)

    def signature(self) -> frozenset[Axis]:
        return frozenset().union(*(d.signature() for d in self.disjuncts))

    def labels(self) -> frozenset[str]:
        return frozenset().union(*(d.labels() for d in self.disjuncts))

    def __str__(self) -> str:
        return "\n".join(serialize_query(d) for d in self.disjuncts)


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_']*[+*]?)|(?P<sym>:-|[(),.]))")
_AXIS_NAMES = {a.value: a for a in Axis}


def _tokens(text: str):
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start("id") if m.group("id") else m.start("sym")
        yield (m.group("id") or m.group("sym")), start
        pos = m.end()


def parse_query(text: str) -> ConjunctiveQuery:
    """Parse ``name(vars) :- atom, ..., atom.``"""
    toks = list(_tokens(text))
    toks.append(("<eof>", len(text)))
    i = 0

    def peek():
        return toks[i][0]

    def take(expected: str | None = None):
        nonlocal i
        tok, pos = toks[i]
        if expected is not None and tok != expected:
            raise QuerySyntaxError(f"expected {expected!r}, got {tok!r}", pos)
        i += 1
        return tok, pos

    def ident():
        tok, pos = take()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*[+*]?", tok):
            raise QuerySyntaxError(f"expected identifier, got {tok!r}", pos)
        return tok, pos

    def arglist():
        take("(")
        args = []
        if peek() != ")":
            while True:
                tok, pos = ident()
                if tok[-1] in "+*":
                    raise QuerySyntaxError(f"bad variable name {tok!r}", pos)
                args.append(tok)
                if peek() == ",":
                    take(",")
                    continue
                break
        take(")")
        return args

    name, _ = ident()
    head = arglist()
    unary: list[UnaryAtom] = []
    binary: list[BinaryAtom] = []
    if peek() == ":-":
        take(":-")
        if peek() != ".":
            while True:
                pred, pos = ident()
                args = arglist()
                axis = _AXIS_NAMES.get(pred.lower())
                if axis is not None:
                    if len(args) != 2:
                        raise QuerySyntaxError(f"axis {pred!r} takes two arguments", pos)
                    binary.append(BinaryAtom(axis, args[0], args[1]))
                else:
                    if pred[-1] in "+*" or len(args) != 1:
                        raise QuerySyntaxError(f"unknown predicate {pred!r}/{len(args)}", pos)
                    label = NODE if pred.lower() == NODE else pred
                    unary.append(UnaryAtom(label, args[0]))
                if peek() == ",":
                    take(",")
                    continue
                break
    take(".")
    if peek() != "<eof>":
        raise QuerySyntaxError("trailing input", toks[i][1])
    try:
        return ConjunctiveQuery(tuple(head), tuple(unary), tuple(binary), name)
    except ValueError as exc:
        raise QuerySyntaxError(str(exc), 0) from None


def serialize_query(q: ConjunctiveQuery) -> str:
    atoms = [str(a) for a in q.unary] + [str(a) for a in q.binary]
    head = f"{q.name}({','.join(q.head)})"
    if not atoms:
        return head + "."
    return f"{head} :- {', '.join(atoms)}."


def parse_union(text: str) -> PositiveQuery:
    """One rule per non-blank line; lines starting with ``%`` or ``#`` are comments."""
    rules = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] in "%#":
            continue
        rules.append(parse_query(line))
    if not rules:
        raise QuerySyntaxError("no rules", 0)
    names = {(r.name, len(r.head)) for r in rules}
    if len(names) != 1:
        raise QuerySyntaxError("all rules of a union need the same head name and arity", 0)
    return PositiveQuery(tuple(rules))


# ------------------------------------------------------------ graph analysis

def signature(q: ConjunctiveQuery) -> frozenset[Axis]:
    return q.signature()


def _out_edges(q: ConjunctiveQuery) -> dict[str, list[tuple[str, int]]]:
    out: dict[str, list[tuple[str, int]]] = {v: [] for v in q.variables}
    for i, a in enumerate(q.binary):
        out[a.src].append((a.dst, i))
    for v in out:
        out[v].sort()
    return out


def find_directed_cycle(q: ConjunctiveQuery) -> list[BinaryAtom] | None:
    """Lexicographically least directed cycle (by variable sequence), or None."""
    out = _out_edges(q)
    best: list[int] | None = None
    for start in q.variables:
        # cycles whose least variable is ``start``, explored in lexicographic order
        path: list[int] = []
        on_path = {start}

        def dfs(v: str) -> bool:
            for w, idx in out[v]:
                if w == start:
                    path.append(idx)
                    return True
                if w > start and w not in on_path:
                    on_path.add(w)
                    path.append(idx)
                    if dfs(w):
                        return True
                    path.pop()
                    on_path.discard(w)
            return False

        if dfs(start):
            best = path
            break
    if best is None:
        return None
    return [q.binary[i] for i in best]


def strongly_connected_components(q: ConjunctiveQuery) -> list[list[str]]:
    """Tarjan's algorithm; components are sorted and listed by least member."""
    out = _out_edges(q)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    comps: list[list[str]] = []
    counter = itertools.count()

    def visit(v: str) -> None:
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w, _ in out[v]:
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            comps.append(sorted(comp))

    for v in q.variables:
        if v not in index:
            visit(v)
    return sorted(comps)


def is_directed_acyclic(q: ConjunctiveQuery) -> bool:
    return find_directed_cycle(q) is None


def _connected_without(q: ConjunctiveQuery, a: str, b: str, removed: str,
                       skip: Sequence[int] = ()) -> bool:
    adj: dict[str, set[str]] = {}
    for i, at in enumerate(q.binary):
        if i in skip or removed in (at.src, at.dst):
            continue
        adj.setdefault(at.src, set()).add(at.dst)
        adj.setdefault(at.dst, set()).add(at.src)
    seen = {a}
    todo = [a]
    while todo:
        v = todo.pop()
        if v == b:
            return True
        for w in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return False


def _on_common_cycle(q: ConjunctiveQuery, v: str, i: int, j: int) -> bool:
    """Whether binary atoms i and j, both incident to v, lie on one undirected cycle."""
    ai, aj = q.binary[i], q.binary[j]
    oi = ai.dst if ai.src == v else ai.src
    oj = aj.dst if aj.src == v else aj.src
    if oi == v or oj == v:
        return False
    if oi == oj:
        return True
    return _connected_without(q, oi, oj, v)


def cycle_variables(q: ConjunctiveQuery) -> set[str]:
    """Variables lying on some cycle of the undirected shadow (self-loops included)."""
    incident: dict[str, list[int]] = {}
    out = set()
    for i, a in enumerate(q.binary):
        if a.src == a.dst:
            out.add(a.src)
            continue
        incident.setdefault(a.src, []).append(i)
        incident.setdefault(a.dst, []).append(i)
    for v, edges in incident.items():
        if v in out:
            continue
        if any(_on_common_cycle(q, v, i, j) for i, j in itertools.combinations(edges, 2)):
            out.add(v)
    return out


def is_acyclic(q: ConjunctiveQuery) -> bool:
    """True iff the undirected shadow of the query multigraph is a forest."""
    return not cycle_variables(q)


def _reachable(q: ConjunctiveQuery, start: str) -> set[str]:
    out = _out_edges(q)
    seen: set[str] = set()
    todo = [start]
    while todo:
        v = todo.pop()
        for w, _ in out[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


class CycleError(ValueError):
    pass


def find_undirected_cycle(q: ConjunctiveQuery) -> tuple[str, BinaryAtom, BinaryAtom] | None:
    """A bottommost cycle variable z and two of its in-atoms on a common undirected cycle.

    Returns None iff the shadow graph is a forest. Requires a directed-acyclic query.
    """
    r = find_undirected_cycle_indices(q)
    if r is None:
        return None
    z, i, j = r
    return z, q.binary[i], q.binary[j]


def find_undirected_cycle_indices(q: ConjunctiveQuery) -> tuple[str, int, int] | None:
    if find_directed_cycle(q) is not None:
        raise CycleError("query graph contains a directed cycle")
    cyc = cycle_variables(q)
    if not cyc:
        return None
    for z in sorted(cyc):
        if _reachable(q, z) & (cyc - {z}):
            continue
        ins = [i for i, a in enumerate(q.binary) if a.dst == z]
        for i, j in itertools.combinations(ins, 2):
            if _on_common_cycle(q, z, i, j):
                return z, i, j
    raise AssertionError("no bottommost cycle variable found")  # pragma: no cover


# ---------------------------------------------------------- canonical forms

def canonical_key(q: ConjunctiveQuery, budget: int = 5000) -> str:
    """A serialization invariant under variable renaming (exact within ``budget`` permutations)."""
    vs = q.variables
    color = {v: (tuple(i for i, h in enumerate(q.head) if h == v),
                 tuple(sorted(a.label for a in q.unary if a.var == v))) for v in vs}
    for _ in range(len(vs)):
        sig = {}
        for v in vs:
            nb = []
            for a in q.binary:
                if a.src == v:
                    nb.append(("o", a.axis.value, color[a.dst], a.dst == v))
                if a.dst == v:
                    nb.append(("i", a.axis.value, color[a.src], a.src == v))
            sig[v] = (color[v], tuple(sorted(nb, key=repr)))
        ranks = {s: k for k, s in enumerate(sorted(set(sig.values()), key=repr))}
        new = {v: ranks[sig[v]] for v in vs}
        if len(set(new.values())) == len(set(color.values())):
            color = new
            break
        color = new
    classes: dict = {}
    for v in vs:
        classes.setdefault(color[v], []).append(v)
    groups = [classes[c] for c in sorted(classes, key=repr)]
    total = 1
    for g in groups:
        for k in range(2, len(g) + 1):
            total *= k
    if total > budget:
        groups = [[v] for g in groups for v in g]
    best = None
    for perm in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = [v for part in perm for v in part]
        ren = {v: f"v{i}" for i, v in enumerate(order)}
        r = q.substitute(ren)
        key = (",".join(r.head) + "|" + ";".join(str(a) for a in r.unary) + "|"
               + ";".join(sorted(str(a) for a in r.binary)))
        if best is None or key < best:
            best = key
    return best or ""


def rename_canonically(q: ConjunctiveQuery) -> ConjunctiveQuery:
    """Rename variables to x0, x1, ... in order of first appearance."""
    order: list[str] = []
    for v in q.head:
        if v not in order:
            order.append(v)
    for a in q.binary:
        for v in (a.src, a.dst):
            if v not in order:
                order.append(v)
    for a in q.unary:
        if a.var not in order:
            order.append(a.var)
    return q.substitute({v: f"x{i}" for i, v in enumerate(order)})


def random_query(rng, axes, max_atoms: int = 5, variables: int = 4, labels=("A", "B"),
                 arity: int = 0, p_label: float = 0.5) -> ConjunctiveQuery:
    """Random safe conjunctive query with 1..max_atoms binary atoms.

    Variables come from a pool of ``variables`` names; each used variable gets
    a label atom with probability ``p_label``. Head variables are drawn from
    the used ones.
    """
    axes = list(axes)
    pool = ["x", "y", "z", "u", "v", "w", "s", "t"][:variables]
    binary = []
    for _ in range(rng.randint(1, max_atoms)):
        src, dst = rng.choice(pool), rng.choice(pool)
        binary.append(BinaryAtom(rng.choice(axes), src, dst))
    used = sorted({v for a in binary for v in (a.src, a.dst)})
    unary = [UnaryAtom(rng.choice(list(labels)), v) for v in used if labels and rng.random() < p_label]
    head = tuple(rng.choice(used) for _ in range(arity))
    return ConjunctiveQuery(head, unary, binary)
