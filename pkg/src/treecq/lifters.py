"""Join lifter tables.

A lifter for (R, S) is a DNF equivalent to ``R(x, z) & S(y, z)`` in which
every conjunction has one of five shapes:

    a  P(x, y) & P'(y, z)
    b  P(y, x) & P'(x, z)
    c  P(x, z) & y = z
    d  P(y, z) & x = z
    e  P(x, z) & x = y

Tables are plain data; :func:`validate_tables` checks every entry against
the shapes when the module is imported.
"""

from __future__ import annotations

import enum
import itertools
from typing import NamedTuple

from .tree import Axis, Tree, tree_shapes

C, CP, CS = Axis.CHILD, Axis.CHILD_PLUS, Axis.CHILD_STAR
N, NP, NS = Axis.NEXT_SIBLING, Axis.NEXT_SIBLING_PLUS, Axis.NEXT_SIBLING_STAR
F = Axis.FOLLOWING

SHAPES = ("a", "b", "c", "d", "e")
_BINARY_ONLY = {"a", "b"}


class Conj(NamedTuple):
    shape: str
    p: Axis
    p2: Axis | None = None

    def atoms(self, x: str, y: str, z: str) -> tuple[list[tuple[Axis, str, str]], tuple[str, str] | None]:
        """Binary atoms and the (kept, replaced) equality, instantiated on x, y, z."""
        if self.shape == "a":
            return [(self.p, x, y), (self.p2, y, z)], None
        if self.shape == "b":
            return [(self.p, y, x), (self.p2, x, z)], None
        if self.shape == "c":
            return [(self.p, x, z)], (y, z)
        if self.shape == "d":
            return [(self.p, y, z)], (x, z)
        if self.shape == "e":
            return [(self.p, x, z)], (x, y)
        raise ValueError(self.shape)

    def __str__(self) -> str:
        return {
            "a": "{p}(x,y) & {q}(y,z)", "b": "{p}(y,x) & {q}(x,z)", "c": "{p}(x,z) & y=z",
            "d": "{p}(y,z) & x=z", "e": "{p}(x,z) & x=y",
        }[self.shape].format(p=self.p.value, q=self.p2.value if self.p2 else "")


Lifter = tuple[Conj, ...]


class Mode(enum.Enum):
    """Rewrite pipelines and the lifter tables they may use."""

    M66A = "66a"   # F within {Child, Child*, Child+}
    M66B = "66b"   # F within {Child, Child+, NextSibling, NextSibling*, NextSibling+}
    M66C = "66c"   # F within all non-Following axes; may add Child+
    M69 = "69"     # F within {Child, NextSibling, NextSibling*, NextSibling+, Following}
    M610 = "610"   # any F; Following and Child* are expanded first

    def __str__(self) -> str:
        return self.value


def _swap(conj: Conj) -> Conj:
    """Exchange the roles of x and y."""
    if conj.shape == "a":
        return Conj("b", conj.p, conj.p2)
    if conj.shape == "b":
        return Conj("a", conj.p, conj.p2)
    if conj.shape == "c":
        return Conj("d", conj.p)
    if conj.shape == "d":
        return Conj("c", conj.p)
    # P(y, z) & x = y is P(x, z) & x = y
    return conj


def _tree_table() -> dict[tuple[Axis, Axis], Lifter]:
    t: dict[tuple[Axis, Axis], Lifter] = {}
    for r in (C, N):
        t[r, r] = (Conj("e", r),)
    for r in (CS, NS):
        t[r, r] = (Conj("b", r, r), Conj("a", r, r))
    for r in (CP, NP):
        t[r, r] = (Conj("b", r, r), Conj("a", r, r), Conj("e", r))
    for r, star, plus in ((C, CS, CP), (N, NS, NP)):
        t[r, star] = (Conj("c", r), Conj("b", star, r))
        t[r, plus] = (Conj("e", r), Conj("b", plus, r))
        t[plus, star] = (Conj("c", plus), Conj("b", star, plus), Conj("a", star, plus))
    for r in (N, NS, NP):
        for s in (C, CP):
            t[r, s] = (Conj("b", s, r),)
        t[r, CS] = (Conj("c", r), Conj("b", CP, r))
    for (r, s), lif in list(t.items()):
        if (s, r) not in t:
            t[s, r] = tuple(_swap(c) for c in lif)
    return t


def _following_table() -> dict[tuple[Axis, Axis], Lifter]:
    """Lifters with S = Following, as published."""
    return {
        (N, F): (Conj("e", N), Conj("b", F, N)),
        (NP, F): (Conj("e", NP), Conj("b", F, NP), Conj("a", NP, NP)),
        (NS, F): (Conj("b", F, NS), Conj("a", NS, NP)),
        (C, F): (Conj("e", C), Conj("b", F, C), Conj("a", C, NP)),
        (F, F): (Conj("e", F), Conj("b", F, F), Conj("a", F, F)),
    }


TREE_TABLE = _tree_table()
FOLLOWING_TABLE_PUBLISHED = _following_table()


def _with_swaps(table: dict[tuple[Axis, Axis], Lifter]) -> dict[tuple[Axis, Axis], Lifter]:
    out = dict(table)
    for (r, s), lif in table.items():
        out.setdefault((s, r), tuple(_swap(c) for c in lif))
    return out


SIX_AXES = frozenset({C, CP, CS, N, NP, NS})

# axes a query may use in each mode, and the axes the output may add
ADMISSIBLE: dict[Mode, frozenset[Axis]] = {
    Mode.M66A: frozenset({C, CS, CP}),
    Mode.M66B: frozenset({C, CP, N, NS, NP}),
    Mode.M66C: SIX_AXES,
    Mode.M69: frozenset({C, N, NS, NP, F}),
    Mode.M610: frozenset(Axis),
}
ADDED_AXES: dict[Mode, frozenset[Axis]] = {
    Mode.M66A: frozenset(),
    Mode.M66B: frozenset(),
    Mode.M66C: frozenset({CP}),
    Mode.M69: frozenset({NP}),
    Mode.M610: frozenset({CP, NP}),
}


def _mode_table(mode: Mode) -> dict[tuple[Axis, Axis], Lifter]:
    if mode is Mode.M69:
        base = {k: v for k, v in TREE_TABLE.items() if k[0] in ADMISSIBLE[mode] and k[1] in ADMISSIBLE[mode]}
        base.update(_with_swaps(FOLLOWING_TABLE_PUBLISHED))
        return base
    # after preprocessing, mode 610 lifts with the six-axis table
    allowed = SIX_AXES if mode is Mode.M610 else ADMISSIBLE[mode]
    return {k: v for k, v in TREE_TABLE.items() if k[0] in allowed and k[1] in allowed}


MODE_TABLES: dict[Mode, dict[tuple[Axis, Axis], Lifter]] = {m: _mode_table(m) for m in Mode}


class LifterError(KeyError):
    pass


def lifter(r: Axis, s: Axis, mode: Mode | str = Mode.M66C) -> Lifter:
    """DNF replacing ``R(x, z) & S(y, z)`` in the given mode."""
    mode = Mode(mode)
    try:
        return MODE_TABLES[mode][r, s]
    except KeyError:
        raise LifterError(f"no lifter for ({r.value}, {s.value}) in mode {mode.value}") from None


def axes_used(lif: Lifter) -> frozenset[Axis]:
    return frozenset(a for c in lif for a in (c.p, c.p2) if a is not None)


def conj_holds(tree: Tree, conj: Conj, a: int, b: int, c: int) -> bool:
    env = {"x": a, "y": b, "z": c}
    atoms, eq = conj.atoms("x", "y", "z")
    if eq is not None and env[eq[0]] != env[eq[1]]:
        return False
    return all(tree.holds(ax, env[u], env[v]) for ax, u, v in atoms)


def lifter_counterexample(r: Axis, s: Axis, lif: Lifter,
                          max_nodes: int = 5) -> tuple[Tree, int, int, int] | None:
    """First tree and triple (x, y, z) on which ``R(x,z) & S(y,z)`` and the lifter disagree."""
    for parent in tree_shapes(max_nodes):
        t = Tree.from_parents(parent)
        for a, b, c in itertools.product(t.nodes, repeat=3):
            phi = t.holds(r, a, c) and t.holds(s, b, c)
            if phi != any(conj_holds(t, cj, a, b, c) for cj in lif):
                return t, a, b, c
    return None


def validate_tables() -> None:
    for table in (TREE_TABLE, FOLLOWING_TABLE_PUBLISHED, *MODE_TABLES.values()):
        for key, lif in table.items():
            for conj in lif:
                if conj.shape not in SHAPES:
                    raise AssertionError(f"lifter {key}: unknown shape {conj.shape}")
                if (conj.p2 is not None) != (conj.shape in _BINARY_ONLY):
                    raise AssertionError(f"lifter {key}: malformed conjunction {conj}")
    for mode, table in MODE_TABLES.items():
        allowed = ADMISSIBLE[mode] | ADDED_AXES[mode]
        for key, lif in table.items():
            if not axes_used(lif) <= allowed:
                raise AssertionError(f"lifter {key} leaves the output signature of mode {mode.value}")


validate_tables()
