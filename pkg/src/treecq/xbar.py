"""X-underbar property checks on concrete trees and the signature classifier."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .tree import ALL_AXES, Axis, Tree

Quad = tuple[int, int, int, int]


class OrderTag(enum.Enum):
    PRE = "pre"
    POST = "post"
    BFLR = "bflr"

    def __str__(self) -> str:
        return self.value


# maximal tractable families, each with the order it is tractable under
FAMILIES: dict[OrderTag, frozenset[Axis]] = {
    OrderTag.BFLR: frozenset({Axis.CHILD, Axis.NEXT_SIBLING, Axis.NEXT_SIBLING_STAR,
                              Axis.NEXT_SIBLING_PLUS}),
    OrderTag.PRE: frozenset({Axis.CHILD_PLUS, Axis.CHILD_STAR}),
    OrderTag.POST: frozenset({Axis.FOLLOWING}),
}
_FAMILY_CELL_TAG = {OrderTag.PRE: "4.2", OrderTag.POST: "4.3", OrderTag.BFLR: "4.4"}

# table cell tag for each intractable pair
_C, _CP, _CS = Axis.CHILD, Axis.CHILD_PLUS, Axis.CHILD_STAR
_N, _NP, _NS, _F = Axis.NEXT_SIBLING, Axis.NEXT_SIBLING_PLUS, Axis.NEXT_SIBLING_STAR, Axis.FOLLOWING
HARDNESS_CELL_TAG: dict[frozenset[Axis], str] = {
    frozenset({_C, _CP}): "5.1", frozenset({_C, _CS}): "5.1", frozenset({_C, _F}): "5.2",
    frozenset({_CP, _N}): "5.7", frozenset({_CP, _NP}): "5.7", frozenset({_CP, _NS}): "5.7",
    frozenset({_CP, _F}): "5.3", frozenset({_CS, _F}): "5.3",
    frozenset({_CS, _N}): "5.5", frozenset({_CS, _NP}): "5.4", frozenset({_CS, _NS}): "5.6",
    frozenset({_N, _F}): "5.8", frozenset({_NP, _F}): "5.8", frozenset({_NS, _F}): "5.8",
}

# Table I as published, upper triangle in axis order (row <= column)
TABLE1_EXPECTED: tuple[tuple[str, ...], ...] = (
    ("in P (4.4)", "NP-hard (5.1)", "NP-hard (5.1)", "in P (4.4)", "in P (4.4)", "in P (4.4)", "NP-hard (5.2)"),
    ("in P (4.2)", "in P (4.2)", "NP-hard (5.7)", "NP-hard (5.7)", "NP-hard (5.7)", "NP-hard (5.3)"),
    ("in P (4.2)", "NP-hard (5.5)", "NP-hard (5.4)", "NP-hard (5.6)", "NP-hard (5.3)"),
    ("in P (4.4)", "in P (4.4)", "in P (4.4)", "NP-hard (5.8)"),
    ("in P (4.4)", "in P (4.4)", "NP-hard (5.8)"),
    ("in P (4.4)", "NP-hard (5.8)"),
    ("in P (4.3)",),
)
TABLE1_AXES: tuple[Axis, ...] = (_C, _CP, _CS, _N, _NP, _NS, _F)


@dataclass(frozen=True)
class TractabilityVerdict:
    order: OrderTag | None = None
    witness: tuple[Axis, Axis] | None = None

    @property
    def tractable(self) -> bool:
        return self.order is not None

    def describe(self) -> str:
        if self.tractable:
            return f"in P ({_FAMILY_CELL_TAG[self.order]})"
        tag = HARDNESS_CELL_TAG.get(frozenset(self.witness), "?")
        return f"NP-hard ({tag})"

    def __str__(self) -> str:
        if self.tractable:
            return f"Tractable({self.order.value})"
        a, b = self.witness
        return f"Intractable({a.value}, {b.value})"


def classify(sig: Iterable[Axis]) -> TractabilityVerdict:
    sig = frozenset(sig)
    for order in (OrderTag.BFLR, OrderTag.PRE, OrderTag.POST):
        if sig <= FAMILIES[order]:
            return TractabilityVerdict(order=order)
    ordered = [a for a in ALL_AXES if a in sig]
    for a, b in itertools.combinations(ordered, 2):
        if not any(a in f and b in f for f in FAMILIES.values()):
            return TractabilityVerdict(witness=(a, b))
    raise AssertionError("unreachable: families partition the axes")  # pragma: no cover


def table1_grid() -> list[list[str]]:
    """Computed verdict strings for the upper triangle of Table I."""
    rows = []
    for i, a in enumerate(TABLE1_AXES):
        rows.append([classify({a, b}).describe() for b in TABLE1_AXES[i:]])
    return rows


def table1_diff() -> list[tuple[Axis, Axis, str, str]]:
    out = []
    for i, (row, exp_row) in enumerate(zip(table1_grid(), TABLE1_EXPECTED)):
        for j, (got, exp) in enumerate(zip(row, exp_row)):
            if got != exp:
                out.append((TABLE1_AXES[i], TABLE1_AXES[i + j], got, exp))
    return out


# ------------------------------------------------------------- concrete checks

def relation_matrix(tree: Tree, axis: Axis, order: OrderTag) -> tuple[np.ndarray, list[int]]:
    """Axis relation as a boolean matrix indexed by order position, plus position->node."""
    rank = tree.rank(order.value)
    by_pos = sorted(tree.nodes, key=rank.__getitem__)
    n = len(by_pos)
    m = np.zeros((n, n), dtype=bool)
    for i, u in enumerate(by_pos):
        mask = tree.successor_mask(axis, u)
        for j, v in enumerate(by_pos):
            if mask >> v & 1:
                m[i, j] = True
    return m, by_pos


def _strict_suffix_any(m: np.ndarray, axis: int) -> np.ndarray:
    """out[i, j] = any(m[k, j] for k > i) along axis 0 (or the transpose for axis 1)."""
    if axis == 1:
        return _strict_suffix_any(m.T, 0).T
    rev = np.logical_or.accumulate(m[::-1], axis=0)[::-1]
    out = np.zeros_like(m)
    out[:-1] = rev[1:]
    return out


def _least_violation(r: np.ndarray, restricted: bool) -> Quad | None:
    """Lexicographically least (p0, p1, p2, p3) of positions violating the condition."""
    n = r.shape[0]
    has_n3 = _strict_suffix_any(r, axis=1)  # [p0, p2]: some p3 > p2 with r[p0, p3]
    if restricted:
        # p1 ranges over (p0, p2]
        cum = np.cumsum(r, axis=0)  # cum[k, j] = #{i <= k : r[i, j]}
        has_n1 = (cum[np.arange(n)[None, :], np.arange(n)[None, :]]
                  - cum) > 0  # [p0, p2]: count over (p0, p2]
        has_n1 &= np.arange(n)[:, None] < np.arange(n)[None, :]
    else:
        has_n1 = _strict_suffix_any(r, axis=0)
    bad = has_n1 & has_n3 & ~r
    if not bad.any():
        return None
    for p0 in range(n):
        p2s = np.nonzero(bad[p0])[0]
        if not len(p2s):
            continue
        best = None
        for p2 in p2s:
            hi = p2 + 1 if restricted else n
            p1 = next(k for k in range(p0 + 1, hi) if r[k, p2])
            p3 = next(k for k in range(p2 + 1, n) if r[p0, k])
            cand = (p0, p1, int(p2), p3)
            if best is None or cand < best:
                best = cand
        return best
    return None  # pragma: no cover


def check_xbar(tree: Tree, axis: Axis, order: OrderTag) -> Quad | None:
    """Least counterexample (n0, n1, n2, n3) to the X-underbar property, or None.

    ``n0 < n1``, ``n2 < n3`` in the order, ``axis(n1, n2)`` and ``axis(n0, n3)``
    hold but ``axis(n0, n2)`` does not. Quadruples compare by order position.
    """
    r, by_pos = relation_matrix(tree, axis, order)
    hit = _least_violation(r, restricted=False)
    return None if hit is None else tuple(by_pos[p] for p in hit)


def check_xbar_restricted(tree: Tree, axis: Axis, order: OrderTag) -> Quad | None:
    """Same condition, only over quadruples with ``n0 < n1 <= n2 < n3``."""
    r, by_pos = relation_matrix(tree, axis, order)
    hit = _least_violation(r, restricted=True)
    return None if hit is None else tuple(by_pos[p] for p in hit)


def check_downward_condition(tree: Tree, axis: Axis, order: OrderTag) -> Quad | None:
    """Condition for relations contained in the reverse order.

    Searches ``n0 < n1 <= n2 < n3`` with ``axis(n2, n1)``, ``axis(n3, n0)`` but
    not ``axis(n2, n0)``; that is the restricted check on the inverse relation.
    """
    r, by_pos = relation_matrix(tree, axis, order)
    hit = _least_violation(r.T.copy(), restricted=True)
    return None if hit is None else tuple(by_pos[p] for p in hit)


def check_xbar_bruteforce(tree: Tree, axis: Axis, order: OrderTag,
                          restricted: bool = False) -> Quad | None:
    """Quartic reference check over all node quadruples (test oracle)."""
    rank = tree.rank(order.value)
    by_pos = sorted(tree.nodes, key=rank.__getitem__)
    n = len(by_pos)
    R = lambda a, b: tree.holds(axis, by_pos[a], by_pos[b])  # noqa: E731
    for p0 in range(n):
        for p1 in range(p0 + 1, n):
            for p2 in range(p1 if restricted else 0, n):
                if not R(p1, p2) or R(p0, p2):
                    continue
                for p3 in range(p2 + 1, n):
                    if R(p0, p3):
                        return tuple(by_pos[p] for p in (p0, p1, p2, p3))
    return None
