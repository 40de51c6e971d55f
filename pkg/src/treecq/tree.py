"""Unranked ordered labeled trees and the seven structural axes.

Nodes are dense integers assigned in pre-order, so ``pre_rank[v] == v``.
Post-order and breadth-first-left-to-right ranks are precomputed at
construction time, as is the last pre-order position inside each subtree,
which turns descendant and following tests into integer comparisons.
"""

from __future__ import annotations

import enum
import itertools
import random
import re
from collections import deque
from typing import Iterable, Iterator, Sequence


class Axis(enum.Enum):
    CHILD = "child"
    CHILD_PLUS = "child+"
    CHILD_STAR = "child*"
    NEXT_SIBLING = "nextsib"
    NEXT_SIBLING_PLUS = "nextsib+"
    NEXT_SIBLING_STAR = "nextsib*"
    FOLLOWING = "following"

    def __str__(self) -> str:
        return self.value

    @property
    def reflexive(self) -> bool:
        return self in (Axis.CHILD_STAR, Axis.NEXT_SIBLING_STAR)

    @classmethod
    def parse(cls, name: str) -> "Axis":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown axis {name!r}") from None


ALL_AXES: tuple[Axis, ...] = tuple(Axis)


class TreeSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class Tree:
    """Immutable ordered tree. Build with :func:`parse_tree` or :meth:`from_parents`."""

    __slots__ = (
        "parent", "children", "labels", "pre_rank", "post_rank", "bflr_rank",
        "depth", "subtree_end", "sibling_index", "_succ", "_pred",
    )

    def __init__(self, parent: Sequence[int | None], children: Sequence[Sequence[int]],
                 labels: Sequence[Iterable[str]]):
        n = len(parent)
        if n == 0:
            raise ValueError("a tree needs at least one node")
        if len(children) != n or len(labels) != n:
            raise ValueError("parent, children and labels must have equal length")
        roots = [v for v in range(n) if parent[v] is None]
        if roots != [0]:
            raise ValueError("node 0 must be the unique root")
        for v in range(n):
            for c in children[v]:
                if parent[c] != v:
                    raise ValueError(f"inconsistent parent/children at node {v}")
        self.parent = tuple(parent)
        self.children = tuple(tuple(cs) for cs in children)
        self.labels = tuple(frozenset(ls) for ls in labels)

        order = []
        post = []
        stack = [(0, False)]
        while stack:
            v, done = stack.pop()
            if done:
                post.append(v)
                continue
            order.append(v)
            stack.append((v, True))
            for c in reversed(self.children[v]):
                stack.append((c, False))
        if order != list(range(n)):
            raise ValueError("node ids must be assigned in pre-order")
        self.pre_rank = tuple(range(n))
        post_rank = [0] * n
        for i, v in enumerate(post):
            post_rank[v] = i
        self.post_rank = tuple(post_rank)

        bflr = [0] * n
        queue = deque([0])
        i = 0
        while queue:
            v = queue.popleft()
            bflr[v] = i
            i += 1
            queue.extend(self.children[v])
        self.bflr_rank = tuple(bflr)

        depth = [0] * n
        end = list(range(n))
        sib = [0] * n
        for v in range(n):
            for k, c in enumerate(self.children[v]):
                depth[c] = depth[v] + 1
                sib[c] = k
        for v in reversed(range(n)):
            if self.children[v]:
                end[v] = end[self.children[v][-1]]
        self.depth = tuple(depth)
        self.subtree_end = tuple(end)
        self.sibling_index = tuple(sib)
        self._succ: dict[Axis, tuple[int, ...]] = {}
        self._pred: dict[Axis, tuple[int, ...]] = {}

    @classmethod
    def from_parents(cls, parent: Sequence[int | None],
                     labels: Sequence[Iterable[str]] | None = None) -> "Tree":
        """Build from a parent array; children keep ascending id order."""
        n = len(parent)
        children: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            if parent[v] is not None:
                children[parent[v]].append(v)
        if labels is None:
            labels = [()] * n
        return cls(parent, children, labels)

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def nodes(self) -> range:
        return range(len(self.parent))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tree):
            return NotImplemented
        return self.parent == other.parent and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.parent, self.labels))

    def __repr__(self) -> str:
        return f"Tree({serialize_tree(self)!r})"

    def label_set(self) -> frozenset[str]:
        return frozenset().union(*self.labels)

    def nodes_with_label(self, label: str) -> list[int]:
        return [v for v in self.nodes if label in self.labels[v]]

    def rank(self, order: str) -> tuple[int, ...]:
        if order == "pre":
            return self.pre_rank
        if order == "post":
            return self.post_rank
        if order == "bflr":
            return self.bflr_rank
        raise ValueError(f"unknown order {order!r}")

    def _check(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < len(self.parent)):
            raise IndexError(f"invalid node id {v!r}")

    def holds(self, axis: Axis, u: int, v: int) -> bool:
        self._check(u)
        self._check(v)
        return _holds(self, axis, u, v)

    def successor_mask(self, axis: Axis, u: int) -> int:
        """Bitmask of ``{v | axis(u, v)}``."""
        masks = self._succ.get(axis)
        if masks is None:
            masks = self._build_masks(axis)
        return masks[u]

    def predecessor_mask(self, axis: Axis, v: int) -> int:
        """Bitmask of ``{u | axis(u, v)}``."""
        masks = self._pred.get(axis)
        if masks is None:
            self._build_masks(axis)
            masks = self._pred[axis]
        return masks[v]

    def _build_masks(self, axis: Axis) -> tuple[int, ...]:
        n = len(self.parent)
        succ = [0] * n
        pred = [0] * n
        for u in range(n):
            for v in range(n):
                if _holds(self, axis, u, v):
                    succ[u] |= 1 << v
                    pred[v] |= 1 << u
        self._succ[axis] = tuple(succ)
        self._pred[axis] = tuple(pred)
        return self._succ[axis]


def _holds(t: Tree, axis: Axis, u: int, v: int) -> bool:
    if axis is Axis.CHILD:
        return t.parent[v] == u
    if axis is Axis.CHILD_PLUS:
        return u < v <= t.subtree_end[u]
    if axis is Axis.CHILD_STAR:
        return u <= v <= t.subtree_end[u]
    if axis is Axis.FOLLOWING:
        return v > t.subtree_end[u]
    same_parent = u != 0 and v != 0 and t.parent[u] == t.parent[v]
    if axis is Axis.NEXT_SIBLING:
        return same_parent and t.sibling_index[v] == t.sibling_index[u] + 1
    if axis is Axis.NEXT_SIBLING_PLUS:
        return same_parent and t.sibling_index[v] > t.sibling_index[u]
    if axis is Axis.NEXT_SIBLING_STAR:
        return u == v or (same_parent and t.sibling_index[v] > t.sibling_index[u])
    raise ValueError(f"unknown axis {axis!r}")


def axis_holds(tree: Tree, axis: Axis, u: int, v: int) -> bool:
    return tree.holds(axis, u, v)


def _mask_to_set(mask: int) -> set[int]:
    out = set()
    i = 0
    while mask:
        if mask & 1:
            out.add(i)
        mask >>= 1
        i += 1
    return out


def axis_successors(tree: Tree, axis: Axis, u: int) -> set[int]:
    tree._check(u)
    return _mask_to_set(tree.successor_mask(axis, u))


def axis_predecessors(tree: Tree, axis: Axis, v: int) -> set[int]:
    tree._check(v)
    return _mask_to_set(tree.predecessor_mask(axis, v))


# ---------------------------------------------------------------- text format

_LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")

def parse_tree(text: str) -> Tree:
    """Parse ``(LABELS child...)`` where LABELS is ``-`` or ``A,B,...``."""
    if not text or not text.strip():
        raise TreeSyntaxError("empty input", 0)
    parent: list[int | None] = []
    labels: list[frozenset[str]] = []
    stack: list[int] = []
    pos = 0
    n = len(text)
    done = False
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if done:
            raise TreeSyntaxError("trailing input after tree", pos)
        if ch == "(":
            start = pos + 1
            end = start
            while end < n and text[end] not in "()":
                end += 1
            raw = text[start:end].strip()
            if not raw:
                raise TreeSyntaxError("missing label set (use '-' for none)", start)
            if raw == "-":
                names: frozenset[str] = frozenset()
            else:
                parts = [p.strip() for p in raw.split(",")]
                for p in parts:
                    if not _LABEL_RE.fullmatch(p):
                        raise TreeSyntaxError(f"bad label {p!r}", start)
                names = frozenset(parts)
            parent.append(stack[-1] if stack else None)
            labels.append(names)
            stack.append(len(parent) - 1)
            pos = end
        elif ch == ")":
            if not stack:
                raise TreeSyntaxError("unbalanced ')'", pos)
            stack.pop()
            if not stack:
                done = True
            pos += 1
        else:
            raise TreeSyntaxError(f"unexpected character {ch!r}", pos)
    if stack or not parent:
        raise TreeSyntaxError("unbalanced parentheses", n)
    return Tree.from_parents(parent, labels)


def serialize_tree(tree: Tree) -> str:
    def render(v: int) -> str:
        head = ",".join(sorted(tree.labels[v])) or "-"
        parts = [head] + [render(c) for c in tree.children[v]]
        return "(" + " ".join(parts) + ")"

    return render(0)


# ---------------------------------------------------------------- generators

def _shapes(n: int) -> list[tuple]:
    """All ordered tree shapes with exactly n nodes, as nested child tuples."""
    return [tuple(f) for f in _forests(n - 1)]


_FOREST_CACHE: dict[int, list[tuple]] = {0: [()]}


def _forests(m: int) -> list[tuple]:
    if m not in _FOREST_CACHE:
        out = []
        for k in range(1, m + 1):
            for first in _shapes(k):
                for rest in _forests(m - k):
                    out.append((first,) + rest)
        _FOREST_CACHE[m] = out
    return _FOREST_CACHE[m]


def _shape_parents(shape: tuple) -> list[int | None]:
    parent: list[int | None] = [None]

    def walk(kids: tuple, p: int) -> None:
        for k in kids:
            parent.append(p)
            walk(k, len(parent) - 1)

    walk(shape, 0)
    return parent


def tree_shapes(max_nodes: int) -> Iterator[list[int | None]]:
    """Parent arrays of every ordered tree shape with 1..max_nodes nodes."""
    for n in range(1, max_nodes + 1):
        for shape in _shapes(n):
            yield _shape_parents(shape)


def enumerate_trees(max_nodes: int, labels: Iterable[str] = ()) -> Iterator[Tree]:
    """Every ordered tree with <= max_nodes nodes, each node carrying at most one label."""
    options: list[tuple[str, ...]] = [()] + [(a,) for a in sorted(set(labels))]
    for parent in tree_shapes(max_nodes):
        for assignment in itertools.product(options, repeat=len(parent)):
            yield Tree.from_parents(parent, assignment)


def random_tree(rng: random.Random, n: int, labels: Sequence[str] = (),
                p_label: float = 0.7, multi: bool = False) -> Tree:
    """Random recursive tree: node i attaches below a uniformly chosen earlier node.

    Children are then renumbered in pre-order.
    """
    raw_parent = [None] + [rng.randrange(i) for i in range(1, n)]
    kids: list[list[int]] = [[] for _ in range(n)]
    for v in range(1, n):
        kids[raw_parent[v]].append(v)
    for ks in kids:
        rng.shuffle(ks)
    order: list[int] = []
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(kids[v]))
    new_id = {v: i for i, v in enumerate(order)}
    parent = [None if raw_parent[v] is None else new_id[raw_parent[v]] for v in order]
    lab: list[tuple[str, ...]] = []
    for _ in range(n):
        if labels and rng.random() < p_label:
            if multi:
                k = rng.randint(1, len(labels))
                lab.append(tuple(rng.sample(list(labels), k)))
            else:
                lab.append((rng.choice(list(labels)),))
        else:
            lab.append(())
    return Tree.from_parents(parent, lab)
