"""Pruned LD-trees for logic programs with cut, plus declarative checkers."""

from .terms import (
    CUT,
    Alphabet,
    Clause,
    Compound,
    CutUnificationError,
    EMPTY_SUBST,
    Pred,
    Subst,
    Var,
    apply,
    compose,
    const,
    make_list,
    match,
    rename_apart,
    unify,
    vars_of,
)
from .verdicts import REFUTED, UNKNOWN, VERIFIED, Verdict, weakest
from .atomsets import (
    UNIVERSAL,
    AtomPattern,
    Extensional,
    Guard,
    Intensional,
    UnionSet,
    contains,
    enumerate_atoms,
    max_generalizations,
)
from .levels import LevelMapping, atom_level_bound, level_of
from .engine import Budget, LdTree, Program, build_tree, preorder
from .pruning import PrunedTree, answers_of_pruned, cutting_sequence_of, prolog_search, prune
from .syntax import ParseError, SpecSuite, parse_program, parse_query, parse_spec
from .dot import tree_dot
from .verify import (
    CheckReport,
    acceptable_check,
    bounded_query,
    c_covered,
    completeness_check,
    correct_check,
    covered,
    cs_correct,
    oracle_tree_complete,
    query_transform,
    recurrent_check,
    semi_complete,
    well_asserted_clause,
    well_asserted_query,
)

__version__ = "0.1.0"

__all__ = [
    "CUT",
    "Alphabet",
    "AtomPattern",
    "Budget",
    "CheckReport",
    "Clause",
    "Compound",
    "CutUnificationError",
    "EMPTY_SUBST",
    "Extensional",
    "Guard",
    "Intensional",
    "LdTree",
    "LevelMapping",
    "ParseError",
    "Pred",
    "Program",
    "PrunedTree",
    "REFUTED",
    "SpecSuite",
    "Subst",
    "UNIVERSAL",
    "UNKNOWN",
    "UnionSet",
    "VERIFIED",
    "Var",
    "Verdict",
    "acceptable_check",
    "answers_of_pruned",
    "apply",
    "atom_level_bound",
    "bounded_query",
    "build_tree",
    "c_covered",
    "completeness_check",
    "compose",
    "const",
    "contains",
    "correct_check",
    "covered",
    "cs_correct",
    "cutting_sequence_of",
    "enumerate_atoms",
    "level_of",
    "make_list",
    "match",
    "max_generalizations",
    "oracle_tree_complete",
    "parse_program",
    "parse_query",
    "parse_spec",
    "preorder",
    "prolog_search",
    "prune",
    "query_transform",
    "recurrent_check",
    "rename_apart",
    "semi_complete",
    "tree_dot",
    "unify",
    "vars_of",
    "weakest",
    "well_asserted_clause",
    "well_asserted_query",
]
