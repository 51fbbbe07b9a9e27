import json
import os

import pytest

from cutcheck.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def program_path(fixtures_dir):
    return str(fixtures_dir / "pruning_tree.pl")


class TestRun:
    def test_answers(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "run", str(fixtures_dir / "artificial.pl"), "p(a, Z)")
        assert code == 0
        assert out.strip() == "p(a, c)"

    def test_no_answers(self, capsys, program_path):
        code, out, _ = run(capsys, "run", program_path, "p")
        assert code == 0 and "no answers" in out

    def test_json(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "run", str(fixtures_dir / "artificial.pl"),
                           "p(a, Z)", "--json")
        obj = json.loads(out)
        assert obj == {"answers": ["p(a, c)"], "exact": True}

    def test_budget_exhausted_exit_3(self, capsys, tmp_path):
        p = tmp_path / "loop.pl"
        p.write_text("p :- p.\n")
        code, out, _ = run(capsys, "run", str(p), "p", "--nodes", "5", "--steps", "5")
        assert code == 3


class TestTreeAndPrune:
    def test_tree_json(self, capsys, program_path):
        code, out, _ = run(capsys, "tree", program_path, "p", "--json")
        obj = json.loads(out)
        assert code == 0 and obj["nodes"] == 10 and obj["pruned"] == []

    def test_prune_json(self, capsys, program_path):
        code, out, _ = run(capsys, "prune", program_path, "p", "--json")
        obj = json.loads(out)
        assert obj["kept"] == [0, 1, 2, 3, 5, 8]
        assert obj["pruned"] == [4, 6, 7, 9]

    def test_golden_dot(self, capsys, program_path, fixtures_dir, tmp_path):
        target = tmp_path / "out.dot"
        code, _, _ = run(capsys, "prune", program_path, "p", "--dot", str(target))
        assert code == 0
        assert target.read_text() == (fixtures_dir / "pruning_tree.dot").read_text()


class TestOracle:
    def test_answers(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "oracle", str(fixtures_dir / "in.pl"),
                           "in([X], [1, 2])", "--json")
        obj = json.loads(out)
        assert code == 0 and obj["answers"] == ["in([1], [1, 2])"] and obj["exact"]


class TestCheck:
    def test_complete_verified_exit_0(self, capsys, fixtures_dir):
        code, out, _ = run(
            capsys, "check", "complete", str(fixtures_dir / "artificial.pl"),
            "--spec", str(fixtures_dir / "artificial.spec"), "--query", "p(a, Z)",
        )
        assert code == 0 and "verdict: verified" in out

    def test_correct_refuted_exit_1(self, capsys, fixtures_dir):
        code, out, _ = run(
            capsys, "check", "correct", str(fixtures_dir / "append.pl"),
            "--spec", str(fixtures_dir / "append.spec"), "--depth", "2",
        )
        assert code == 1 and "verdict: refuted" in out and "witness:" in out

    def test_json_report_shape(self, capsys, fixtures_dir):
        code, out, _ = run(
            capsys, "check", "recurrent", str(fixtures_dir / "in.pl"),
            "--spec", str(fixtures_dir / "in.spec"), "--depth", "1",
        )
        assert code == 0
        code, out, _ = run(
            capsys, "check", "recurrent", str(fixtures_dir / "in.pl"),
            "--spec", str(fixtures_dir / "in.spec"), "--depth", "1", "--json",
        )
        obj = json.loads(out)
        assert list(obj) == ["check", "verdict", "bounds", "witnesses", "per_atom", "timing_ms"]
        assert obj["verdict"]["status"] == "verified"
        assert set(obj["bounds"]) == {"depth", "nodes", "steps"}

    def test_semicomplete(self, capsys, fixtures_dir):
        code, out, _ = run(
            capsys, "check", "semicomplete", str(fixtures_dir / "append.pl"),
            "--spec", str(fixtures_dir / "append.spec"), "--depth", "2",
        )
        assert code == 0

    def test_acceptable(self, capsys, fixtures_dir):
        code, out, _ = run(
            capsys, "check", "acceptable", str(fixtures_dir / "artificial.pl"),
            "--spec", str(fixtures_dir / "artificial.spec"),
        )
        assert code in (0, 1)


class TestErrorsAndEnv:
    def test_parse_error_exit_2(self, capsys, tmp_path):
        p = tmp_path / "bad.pl"
        p.write_text("p(a\n")
        code, _, err = run(capsys, "run", str(p), "p")
        assert code == 2 and "parse error" in err

    def test_missing_file_exit_2(self, capsys):
        code, _, err = run(capsys, "run", "/nonexistent.pl", "p")
        assert code == 2

    def test_env_budget(self, capsys, tmp_path, monkeypatch):
        p = tmp_path / "loop.pl"
        p.write_text("p :- p.\n")
        monkeypatch.setenv("CUTCHECK_BUDGET_NODES", "5")
        code, _, _ = run(capsys, "run", str(p), "p", "--steps", "5")
        assert code == 3

    def test_flag_overrides_env(self, capsys, fixtures_dir, monkeypatch):
        monkeypatch.setenv("CUTCHECK_BUDGET_NODES", "1")
        code, _, _ = run(capsys, "run", str(fixtures_dir / "artificial.pl"),
                         "p(a, Z)", "--nodes", "1000")
        assert code == 0
