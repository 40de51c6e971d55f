"""Conjunctive queries over unranked labeled trees."""

from .evaluate import (
    NotTractableError, arc_consistent_prevaluation, check_tuple, enumerate_answers, eval_backtracking,
    eval_bruteforce, eval_xbar, evaluate, is_true, witness,
)
from .gadgets import (
    OneInThreeInstance, brute_1in3, reduce_tau6, reduce_tau15, reduce_tau45, small_instances,
)
from .lifters import Mode, lifter
from .query import (
    BinaryAtom, ConjunctiveQuery, PositiveQuery, UnaryAtom, find_directed_cycle, find_undirected_cycle,
    is_acyclic, parse_query, parse_union, serialize_query,
)
from .rewrite import is_equivalent_sampled, rewrite_to_apq, rewrite_with_stats
from .succinct import (
    blowup_experiment, gen_diamond, gen_ps, is_k_scattered, label_paths, lemma73_structure, variable_paths,
)
from .tree import (
    ALL_AXES, Axis, Tree, axis_holds, axis_predecessors, axis_successors, enumerate_trees, parse_tree,
    serialize_tree,
)
from .xbar import OrderTag, check_xbar, classify, table1_grid

__all__ = [
    "ALL_AXES", "Axis", "Tree", "axis_holds", "axis_successors", "axis_predecessors",
    "enumerate_trees", "parse_tree", "serialize_tree",
    "BinaryAtom", "ConjunctiveQuery", "PositiveQuery", "UnaryAtom", "find_directed_cycle",
    "find_undirected_cycle", "is_acyclic", "parse_query", "parse_union", "serialize_query",
    "OrderTag", "check_xbar", "classify", "table1_grid",
    "NotTractableError", "arc_consistent_prevaluation", "check_tuple", "enumerate_answers",
    "eval_backtracking", "eval_bruteforce", "eval_xbar", "evaluate", "is_true", "witness",
    "Mode", "lifter", "is_equivalent_sampled", "rewrite_to_apq", "rewrite_with_stats",
    "OneInThreeInstance", "brute_1in3", "reduce_tau6", "reduce_tau15", "reduce_tau45", "small_instances",
    "blowup_experiment", "gen_diamond", "gen_ps", "is_k_scattered", "label_paths", "lemma73_structure",
    "variable_paths",
]
