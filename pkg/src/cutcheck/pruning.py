"""Cut pruning: cutting sequences, the pruned LD-tree, and an independent
depth-first search oracle.

An *executing node* is one whose query starts with ``!``.  Its cutting
sequence runs from the node that introduced that cut occurrence (by applying
a clause whose body contains the cut; for cuts already present in the initial
query, from the root) down to the executing node.  The nodes it prunes are
the children of each node on that path lying strictly to the right of the
path, together with their descendants.

The pruned tree is computed by the iterative fixpoint: repeatedly take the
i-th executing node in the current preorder sequence and remove what its
cutting sequence prunes, until the sequence contains no unprocessed
executing node; finally only the nodes occurring in the preorder sequence of
the fixpoint are kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine import (
    Budget,
    LdTree,
    Program,
    SUCCESS,
    preorder,
)
from .terms import (
    CUT,
    EMPTY_SUBST,
    FreshNames,
    apply,
    compose,
    rename_apart,
    unify,
    vars_of,
)


def is_executing(tree: LdTree, nid: int) -> bool:
    node = tree.nodes[nid]
    return bool(node.query) and node.query[0] is CUT


@dataclass(frozen=True)
class CuttingSequence:
    """The path from the introducing node (or root) to the executing node."""

    introducing: Optional[int]  # None for cuts of the initial query
    path: tuple  # node ids, introducing (or root) first, executing last
    executing: int
    cut_position: int  # index of the tracked ! occurrence in the first path node's child


def cutting_sequence_of(tree: LdTree, executing: int) -> CuttingSequence:
    if not is_executing(tree, executing):
        raise ValueError(f"node {executing} does not start with !")
    intro = tree.nodes[executing].origins[0]
    chain = tree.ancestors(executing)
    if intro is None:
        path = tuple(chain)  # Q_0 .. Q_m
    else:
        path = tuple(chain[chain.index(intro):])  # Q_{j-1} .. Q_m
    # Track the cut occurrence upward to find its position where introduced.
    pos = 0
    cut_position = 0
    for nid in reversed(path[1:] if intro is not None else path):
        node = tree.nodes[nid]
        cut_position = pos
        if nid == (path[1] if intro is not None else path[0]):
            break
        step = node.step
        if step.clause_index is None:
            pos = pos + 1
        else:
            pos = pos - len(step.clause_variant.body) + 1
    return CuttingSequence(intro, path, executing, cut_position)


def pruned_by_sequence(tree: LdTree, cs: CuttingSequence, kept=None) -> set:
    """Nodes pruned by a cutting sequence: right-of-path children and their
    descendants, restricted to ``kept`` when given."""
    removed: set = set()
    for above, below in zip(cs.path, cs.path[1:]):
        children = tree.nodes[above].children
        if kept is not None:
            children = [c for c in children if c in kept]
        idx = children.index(below)
        for c in children[idx + 1 :]:
            stack = [c]
            while stack:
                nid = stack.pop()
                if kept is not None and nid not in kept:
                    continue
                removed.add(nid)
                stack.extend(tree.nodes[nid].children)
    return removed


@dataclass
class PrunedTree:
    """The result of pruning: which nodes survive and who pruned the rest."""

    base: LdTree
    kept: set
    pruned_by: dict  # removed node id -> executing node id
    iteration_log: list  # (executing node id, frozenset of removed ids) per round
    exact: bool

    @property
    def pruned(self) -> set:
        return set(self.pruned_by)


def prune(tree: LdTree, kept: Optional[set] = None) -> PrunedTree:
    """Iterate the cutting-sequence fixpoint on the (sub)tree."""
    kept = set(kept) if kept is not None else {n.id for n in tree.nodes}
    pruned_by: dict = {}
    log: list = []
    i = 1
    while True:
        seq = preorder(tree, kept)
        executing = [nid for nid in seq.ids if is_executing(tree, nid)]
        if len(executing) < i:
            break
        ex = executing[i - 1]
        cs = cutting_sequence_of(tree, ex)
        removed = pruned_by_sequence(tree, cs, kept)
        for r in removed:
            pruned_by[r] = ex
        kept -= removed
        log.append((ex, frozenset(removed)))
        i += 1
    final = preorder(tree, kept)
    kept = set(final.ids)
    return PrunedTree(tree, kept, pruned_by, log, final.exact)


def answers_of_pruned(pt: PrunedTree) -> list:
    """Computed answers of the pruned tree, in preorder order."""
    seq = preorder(pt.base, pt.kept)
    return [
        apply(pt.base.nodes[nid].subst, pt.base.query)
        for nid in seq.ids
        if pt.base.nodes[nid].status == SUCCESS
    ]


# ---------------------------------------------------------------------------
# Independent oracle: a classic choice-point-stack interpreter.
#
# This deliberately shares no traversal or pruning code with the tree
# machinery above: cut discards choice points younger than the barrier
# recorded when the clause that introduced it was invoked.
# ---------------------------------------------------------------------------


@dataclass
class _Frame:
    goals: tuple  # of (atom, barrier)
    subst: object
    alternatives: list  # clause indices left to try
    pos: int
    height: int  # stack height at call time == barrier for the body's cuts


@dataclass
class SearchResult:
    answers: list
    exact: bool
    steps: int


def prolog_search(program: Program, query: tuple, budget: Optional[Budget] = None) -> SearchResult:
    """Depth-first, left-to-right search with standard cut semantics.

    Returns the computed answers (instances of the query) in discovery
    order; ``exact`` is False when the step budget ran out first.
    """
    budget = budget or Budget()
    fresh = FreshNames()
    forbidden = set(vars_of(query))
    answers: list = []
    steps = 0
    exact = True

    stack: list = []
    current = (tuple((a, 0) for a in query), EMPTY_SUBST)

    def advance(frame: _Frame):
        nonlocal steps
        atom = apply(frame.subst, frame.goals[0][0])
        while frame.pos < len(frame.alternatives):
            steps += 1
            if steps > budget.steps:
                raise _OutOfSteps
            idx = frame.alternatives[frame.pos]
            frame.pos += 1
            variant = rename_apart(program.clauses[idx], forbidden, fresh)
            theta = unify(atom, variant.head)
            if theta is None:
                continue
            forbidden.update(vars_of(variant))
            body = tuple((b, frame.height) for b in variant.body)
            return (body + frame.goals[1:], compose(frame.subst, theta))
        return None

    class _OutOfSteps(Exception):
        pass

    try:
        while True:
            if current is None:
                while stack:
                    current = advance(stack[-1])
                    if current is not None:
                        break
                    stack.pop()
                if current is None:
                    break
                continue
            goals, subst = current
            current = None
            if not goals:
                answers.append(apply(subst, query))
                continue
            atom, barrier = goals[0]
            if atom is CUT:
                del stack[barrier:]
                current = (goals[1:], subst)
                continue
            alternatives = [i for i, _ in program.matching(atom)]
            stack.append(_Frame(goals, subst, alternatives, 0, len(stack)))
    except _OutOfSteps:
        exact = False

    return SearchResult(answers, exact, steps)
