"""Command-line entry point: ``treecq <command> [options]``.

Exit status is 0 on success, 1 for a negative result (query false, signature
not tractable, counterexample or difference found) and 2 for usage or input
errors. Every random choice is drawn from ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import io
import random
import sys
from pathlib import Path

from . import gadgets, succinct
from .evaluate import DEFAULT_BUDGET, STRATEGIES, BudgetExceeded, NotTractableError, evaluate, witness
from .lifters import Mode
from .query import ConjunctiveQuery, PositiveQuery, QuerySyntaxError, parse_union, serialize_query
from .rewrite import DEFAULT_CAP, RewriteLimitError, is_equivalent_sampled, rewrite_with_stats
from .tree import Axis, TreeSyntaxError, parse_tree, random_tree, serialize_tree
from .xbar import (TABLE1_AXES, TABLE1_EXPECTED, OrderTag, check_downward_condition, check_xbar,
                   classify, table1_diff, table1_grid)

OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load_query(path: str) -> ConjunctiveQuery | PositiveQuery:
    p = parse_union(_read(path))
    return p.disjuncts[0] if len(p) == 1 else p


def _axes(text: str) -> list[Axis]:
    try:
        return [Axis.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise UsageError(str(e)) from None


def _table(rows: list[list[str]], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    widths = [max(len(r[i]) for r in rows if i < len(r)) for i in range(max(map(len, rows)))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows)


# ------------------------------------------------------------- commands

def cmd_eval(args, out) -> int:
    tree = parse_tree(_read(args.tree))
    q = _load_query(args.query)
    arity = q.arity if isinstance(q, PositiveQuery) else len(q.head)
    if arity == 0 and isinstance(q, ConjunctiveQuery) and args.strategy in ("auto", "backtrack"):
        val = witness(tree, q)
        if val is None:
            out.write("false\n")
            return NEGATIVE
        out.write("true\n")
        for v in sorted(val):
            out.write(f"{v} = {val[v]}\n")
        return OK
    answers = evaluate(tree, q, args.strategy, args.budget)
    if arity == 0:
        out.write("true\n" if answers else "false\n")
    for t in sorted(answers):
        out.write(" ".join(map(str, t)) + "\n")
    return OK if answers else NEGATIVE


def cmd_rewrite(args, out) -> int:
    q = _load_query(args.query)
    if isinstance(q, PositiveQuery):
        raise UsageError("rewrite takes a single conjunctive query")
    apq, stats = rewrite_with_stats(q, args.mode, cap=args.cap)
    if not apq.disjuncts:
        out.write("% empty union: the query is unsatisfiable\n")
    for d in apq:
        out.write(serialize_query(d) + "\n")
    for line in stats.lines():
        out.write(f"% {line}\n")
    if args.check:
        verdict = is_equivalent_sampled(q, apq, trials=args.trials, seed=args.seed)
        if verdict:
            out.write(f"% sampled equivalence: no difference on {verdict.trees_checked} trees\n")
        else:
            out.write(f"% sampled equivalence: difference on {serialize_tree(verdict.counterexample)}\n")
            return NEGATIVE
    return OK


def cmd_classify(args, out) -> int:
    axes = _axes(args.axes)
    if not axes:
        raise UsageError("--axes needs at least one axis")
    verdict = classify(axes)
    text = verdict.describe()
    kind, ref = text.split(" (")
    out.write(f"{kind} (Table I: {ref}\n")
    if verdict.tractable:
        out.write(f"order: {verdict.order.value}\n")
        return OK
    a, b = verdict.witness
    out.write(f"offending pair: {a.value}, {b.value}\n")
    return NEGATIVE


def cmd_xbar_check(args, out) -> int:
    axis = Axis.parse(args.axis)
    order = OrderTag(args.order)
    check = check_downward_condition if args.downward else check_xbar
    if args.tree:
        trees = [parse_tree(_read(args.tree))]
    else:
        rng = random.Random(args.seed)
        trees = [random_tree(rng, rng.randint(1, args.max_nodes)) for _ in range(args.trees)]
    for i, t in enumerate(trees):
        hit = check(t, axis, order)
        if hit is not None:
            out.write(f"counterexample in tree {i}: {serialize_tree(t)}\n")
            out.write("nodes (n0, n1, n2, n3): " + " ".join(map(str, hit)) + "\n")
            return NEGATIVE
    out.write(f"no counterexample on {len(trees)} tree(s)\n")
    return OK


_REDUCTIONS = {
    "tau4": lambda inst: gadgets.reduce_tau45(inst, star=False),
    "tau5": lambda inst: gadgets.reduce_tau45(inst, star=True),
    "tau6": lambda inst: gadgets.reduce_tau6(inst),
    "tau7": lambda inst: gadgets.reduce_tau6(inst, Axis.CHILD_PLUS),
    "tau8": lambda inst: gadgets.reduce_tau6(inst, Axis.CHILD_STAR),
    "tau15": lambda inst: gadgets.reduce_tau15(inst),
    "tau16": lambda inst: gadgets.reduce_tau15(inst, Axis.NEXT_SIBLING_PLUS),
    "tau17": lambda inst: gadgets.reduce_tau15(inst, Axis.NEXT_SIBLING_STAR),
}


def cmd_gadget(args, out) -> int:
    try:
        inst = gadgets.OneInThreeInstance.parse(_read(args.instance))
    except gadgets.InstanceFormatError as e:
        raise UsageError(f"instance: {e}") from None
    g = _REDUCTIONS[args.signature](inst)
    tree_text = serialize_tree(g.tree) + "\n"
    query_text = serialize_query(g.query) + "\n"
    if args.out_tree:
        Path(args.out_tree).write_text(tree_text)
    if args.out_query:
        Path(args.out_query).write_text(query_text)
    if not args.out_tree and not args.out_query:
        out.write(tree_text + query_text)
    out.write(f"% {g.signature_tag}: {len(g.tree)} tree nodes, {len(g.query.variables)} variables, "
              f"{len(g.query)} atoms\n")
    if args.verify:
        expected = gadgets.brute_1in3(inst)
        got = bool(evaluate(g.tree, g.query, "backtrack"))
        out.write(f"% instance satisfiable: {str(expected).lower()}, query true: {str(got).lower()}\n")
        if got != expected:
            return NEGATIVE
    return OK


def cmd_diamond(args, out) -> int:
    out.write(serialize_query(succinct.gen_diamond(args.n)) + "\n")
    return OK


def cmd_ps(args, out) -> int:
    if args.bits is None:
        bits = [False] * args.n
    elif set(args.bits) <= {"0", "1"}:
        bits = [b == "1" for b in args.bits]
    else:
        raise UsageError("--bits takes a string of 0s and 1s")
    ps = succinct.gen_ps(args.n, args.p, bits)
    out.write(serialize_tree(ps) + "\n")
    out.write(f"% labels: {succinct.format_path(succinct.label_sequence(ps))}\n")
    out.write(f"% {len(ps)} nodes, {args.p}-scattered: {str(succinct.is_k_scattered(ps, args.p)).lower()}\n")
    return OK


def cmd_blowup(args, out) -> int:
    report = succinct.blowup_experiment(args.n_max, args.mode, seed=args.seed, cap=args.cap)
    out.write(report.to_csv() if args.format == "csv" else report.to_text())
    ok = all(r.acyclic and r.equivalent for r in report.rows)
    return OK if ok else NEGATIVE


def cmd_table1(args, out) -> int:
    header = [""] + [a.value for a in TABLE1_AXES]
    rows = [header]
    for i, (a, row) in enumerate(zip(TABLE1_AXES, table1_grid())):
        rows.append([a.value] + [""] * i + row)
    out.write(_table(rows, args.format))
    diff = table1_diff()
    if args.format != "csv":
        if diff:
            for a, b, got, exp in diff:
                out.write(f"differs at ({a.value}, {b.value}): computed {got!r}, expected {exp!r}\n")
        else:
            cells = sum(len(r) for r in TABLE1_EXPECTED)
            out.write(f"all {cells} cells match the expected table\n")
    return NEGATIVE if diff else OK


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="work budget for exhaustive evaluation")
    common.add_argument("--format", choices=("text", "csv"), default="text")

    parser = argparse.ArgumentParser(prog="treecq", description="Conjunctive queries over trees.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("eval", parents=[common], help="evaluate a query on a tree")
    p.add_argument("--tree", required=True, help="tree file (s-expression), '-' for stdin")
    p.add_argument("--query", required=True, help="query file, one rule per line")
    p.add_argument("--strategy", choices=STRATEGIES, default="auto")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rewrite", parents=[common], help="rewrite a query into an acyclic union")
    p.add_argument("--query", required=True)
    p.add_argument("--mode", choices=["auto"] + [m.value for m in Mode], default="auto")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of disjuncts")
    p.add_argument("--check", action="store_true", help="compare input and output on sample trees")
    p.add_argument("--trials", type=int, default=50, help="random trees for --check")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("classify", parents=[common], help="complexity of a set of axes")
    p.add_argument("--axes", required=True, help="comma-separated axis names")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("xbar-check", parents=[common], help="search for X-underbar violations")
    p.add_argument("--axis", required=True)
    p.add_argument("--order", choices=[o.value for o in OrderTag], required=True)
    p.add_argument("--tree", help="check this tree instead of random ones")
    p.add_argument("--trees", type=int, default=200, help="number of random trees")
    p.add_argument("--max-nodes", type=int, default=60)
    p.add_argument("--downward", action="store_true", help="check the condition for reversed relations")
    p.set_defaults(func=cmd_xbar_check)

    p = sub.add_parser("gadget", parents=[common], help="build a hardness gadget from a 1-in-3 instance")
    p.add_argument("--instance", required=True, help="one clause per line, three variable numbers")
    p.add_argument("--signature", choices=sorted(_REDUCTIONS, key=lambda s: int(s[3:])), default="tau6")
    p.add_argument("--out-tree")
    p.add_argument("--out-query")
    p.add_argument("--verify", action="store_true", help="compare with a brute-force solver")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("diamond", parents=[common], help="print the n-diamond query")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_diamond)

    p = sub.add_parser("ps", parents=[common], help="print a scattered path structure")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--bits", help="n characters 0/1; 1 puts X' above X")
    p.set_defaults(func=cmd_ps)

    p = sub.add_parser("blowup", parents=[common], help="APQ size of the n-diamond queries")
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--mode", choices=["auto"] + [m.value for m in Mode], default="auto")
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("table1", parents=[common], help="print the complexity grid")
    p.set_defaults(func=cmd_table1)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return args.func(args, out)
    except (BudgetExceeded, NotTractableError, RewriteLimitError) as e:
        print(f"treecq {args.command}: {e}", file=sys.stderr)
        return NEGATIVE
    except (UsageError, TreeSyntaxError, QuerySyntaxError, ValueError) as e:
        print(f"treecq {args.command}: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
