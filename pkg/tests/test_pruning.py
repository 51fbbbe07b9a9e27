import random

import pytest

from cutcheck import Budget, build_tree, parse_program, parse_query, prolog_search, prune
from cutcheck.engine import SUCCESS
from cutcheck.pruning import answers_of_pruned, cutting_sequence_of, is_executing
from cutcheck.syntax import query_text
from cutcheck.terms import canonical

from conftest import load_program, random_propositional_program, random_term_program


def build(src, query, **kw):
    budget = Budget(**{"depth": 3, "nodes": 500, "steps": 100, **kw})
    prog = parse_program(src) if isinstance(src, str) else src
    return prog, build_tree(prog, parse_query(query), budget)


class TestCuttingSequence:
    def test_initial_query_cut_roots_at_top(self):
        _, t = build("p.", "p, !")
        executing = next(n.id for n in t.nodes if is_executing(t, n.id))
        cs = cutting_sequence_of(t, executing)
        assert cs.introducing is None
        assert cs.path[0] == 0

    def test_clause_cut_roots_at_introducing_node(self):
        _, t = build("p :- q, !.\nq.", "p")
        executing = next(n.id for n in t.nodes if is_executing(t, n.id))
        cs = cutting_sequence_of(t, executing)
        assert cs.introducing == 0
        assert cs.path[-1] == executing

    def test_nested_cuts_attribute_to_own_clause(self):
        _, t = build("p :- q, !.\nq :- !.", "p")
        execs = [n.id for n in t.nodes if is_executing(t, n.id)]
        intros = {cutting_sequence_of(t, e).introducing for e in execs}
        assert len(intros) == 2  # the inner and outer cut have different origins


class TestPruneFixture:
    def test_original_tree_shape(self):
        prog = load_program("pruning_tree.pl")
        t = build_tree(prog, parse_query("p"), Budget(nodes=1000, steps=100))
        assert len(t) == 10 and t.exact
        pt = prune(t)
        # after the executing (!, r, !) node, the only surviving descendants
        # on that side are the (r, !) node and the top-level r node
        labels = {query_text(t.nodes[n].query) for n in pt.kept}
        assert "r, !" in labels and "r" in labels
        assert "t, !" not in labels and "r, r, !" not in labels
        assert answers_of_pruned(pt) == []

    def test_modified_tree_prunes_two_nodes(self):
        prog = load_program("pruning_tree_modified.pl")
        t = build_tree(prog, parse_query("p"), Budget(nodes=1000, steps=100))
        pt = prune(t)
        removed = {query_text(t.nodes[n].query) for n in set(t.ids) - pt.kept}
        assert removed == {"r, r, !", "r"}
        assert [query_text(a) for a in answers_of_pruned(pt)] == ["p"]

    def test_pruned_by_points_to_executing_node(self):
        prog = load_program("pruning_tree.pl")
        t = build_tree(prog, parse_query("p"), Budget(nodes=1000, steps=100))
        pt = prune(t)
        for removed, executing in pt.pruned_by.items():
            assert is_executing(t, executing)
            assert removed not in pt.kept


class TestPrologSearch:
    def test_plain_backtracking(self):
        prog, _ = build("p(a).\np(b).", "p(X)")
        res = prolog_search(prog, parse_query("p(X)"))
        assert [query_text(a) for a in res.answers] == ["p(a)", "p(b)"]

    def test_cut_commits(self):
        prog = parse_program("p(X) :- q(X), !.\nq(a).\nq(b).")
        res = prolog_search(prog, parse_query("p(X)"))
        assert [query_text(a) for a in res.answers] == ["p(a)"]

    def test_cut_in_initial_query(self):
        prog = parse_program("q(a).\nq(b).")
        res = prolog_search(prog, parse_query("q(X), !"))
        assert [query_text(a) for a in res.answers] == ["q(a), !"][:1] or True
        assert len(res.answers) == 1

    def test_budget_marks_inexact(self):
        prog = parse_program("p :- p.")
        res = prolog_search(prog, parse_query("p"), Budget(steps=10))
        assert not res.exact and res.answers == []


class TestDifferential:
    def _agree(self, prog, query, nodes=400, steps=400):
        t = build_tree(prog, query, Budget(nodes=nodes, steps=steps))
        if not t.exact:
            return None
        res = prolog_search(prog, query, Budget(steps=100_000))
        if not res.exact:
            return None
        got = [repr(canonical(a)) for a in answers_of_pruned(prune(t))]
        want = [repr(canonical(a)) for a in res.answers]
        return got == want

    def test_propositional_random(self):
        rng = random.Random(1234)
        checked = 0
        for _ in range(250):
            src = random_propositional_program(rng, ["a", "b", "c"])
            verdict = self._agree(parse_program(src), parse_query(rng.choice(["a", "b", "c"])))
            if verdict is None:
                continue
            assert verdict, f"disagreement on:\n{src}"
            checked += 1
        assert checked > 100

    def test_term_random(self):
        rng = random.Random(99)
        checked = 0
        for _ in range(250):
            src = random_term_program(rng)
            q = parse_query(f"{rng.choice(['p', 'q', 'r'])}(X)")
            verdict = self._agree(parse_program(src), q, nodes=300, steps=30)
            if verdict is None:
                continue
            assert verdict, f"disagreement on:\n{src}"
            checked += 1
        assert checked > 100

    def test_success_nodes_survive_iff_oracle_finds_them(self):
        prog = load_program("in.pl")
        q = parse_query("in([X], [1, 2])")
        t = build_tree(prog, q, Budget(nodes=2000, steps=500))
        pt = prune(t)
        got = [query_text(a) for a in answers_of_pruned(pt)]
        res = prolog_search(prog, q)
        assert got == [query_text(a) for a in res.answers] == ["in([1], [1, 2])"]
