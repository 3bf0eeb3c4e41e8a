import hashlib
import io
import json

import pytest

from shortcoder.cli import main
from shortcoder.dataset import CodePair, emit, load_pairs


def run(capsys, argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimplify:
    def test_stdin_joint(self, capsys, monkeypatch):
        code, out, err = run(
            capsys, ["simplify"], stdin="x = x + 1\n", monkeypatch=monkeypatch
        )
        assert code == 0
        assert out == "x += 1\n"

    def test_file_input(self, capsys, tmp_path):
        src = tmp_path / "in.py"
        src.write_text("del a\ndel b\n")
        code, out, _ = run(capsys, ["simplify", str(src)])
        assert code == 0
        assert out == "del a, b\n"

    def test_metrics_on_stderr(self, capsys, monkeypatch):
        code, out, err = run(
            capsys,
            ["simplify", "--metrics"],
            stdin="x = x + 1\n",
            monkeypatch=monkeypatch,
        )
        assert code == 0
        assert "6 -> 4" in err
        assert "reduction" in err

    def test_rule_subset(self, capsys, monkeypatch):
        source = "def f(x):\n    x = x + 1\n    return (x)\n"
        code, out, _ = run(
            capsys,
            ["simplify", "--rules", "R2"],
            stdin=source,
            monkeypatch=monkeypatch,
        )
        assert code == 0
        assert out == "def f(x):\n    x = x + 1\n    return x\n"

    def test_strictness_dial(self, capsys, monkeypatch):
        source = "if c:\n    f = True\nelse:\n    f = False\n"
        _, paper_out, _ = run(
            capsys, ["simplify"], stdin=source, monkeypatch=monkeypatch
        )
        assert paper_out == "f = c\n"
        _, strict_out, _ = run(
            capsys,
            ["simplify", "--strictness", "strict"],
            stdin=source,
            monkeypatch=monkeypatch,
        )
        assert strict_out == "f = bool(c)\n"

    def test_independent_mode_json_lines(self, capsys, monkeypatch):
        source = "def f(x):\n    x = x + 1\n    return (x)\n"
        code, out, _ = run(
            capsys,
            ["simplify", "--mode", "independent"],
            stdin=source,
            monkeypatch=monkeypatch,
        )
        assert code == 0
        rows = [json.loads(line) for line in out.splitlines()]
        assert [r["rule"] for r in rows] == ["R2", "R3"]

    def test_parse_error_exit_1(self, capsys, monkeypatch):
        code, _, err = run(
            capsys, ["simplify"], stdin="def f(:\n", monkeypatch=monkeypatch
        )
        assert code == 1
        assert "error" in err

    def test_missing_file_exit_1(self, capsys):
        code, _, err = run(capsys, ["simplify", "/nonexistent/input.py"])
        assert code == 1

    def test_unknown_rule_exit_2(self, capsys, monkeypatch):
        with pytest.raises(SystemExit) as excinfo:
            main(["simplify", "--rules", "R99"])
        assert excinfo.value.code == 2


class TestDatasetBuild:
    def test_build_and_stats(self, capsys, corpus_path, tmp_path):
        out_path = tmp_path / "pairs.jsonl"
        code, out, _ = run(
            capsys,
            [
                "dataset",
                "build",
                "--input",
                str(corpus_path),
                "--output",
                str(out_path),
            ],
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["total"] == len(load_pairs(str(out_path)))
        assert summary["validation_pass_rate"] == 1.0

    def test_deterministic(self, capsys, corpus_path, tmp_path):
        digests = []
        for name in ("one.jsonl", "two.jsonl"):
            out_path = tmp_path / name
            code, _, _ = run(
                capsys,
                [
                    "dataset",
                    "build",
                    "--input",
                    str(corpus_path),
                    "--output",
                    str(out_path),
                ],
            )
            assert code == 0
            digests.append(hashlib.sha256(out_path.read_bytes()).hexdigest())
        assert digests[0] == digests[1]

    def test_llm_fills_uncovered_rules(self, capsys, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        corpus.write_text(
            json.dumps(
                {
                    "task_id": 1,
                    "text": "inc",
                    "code": "def f(x):\n    x = x + 1\n    return x\n",
                    "test_list": ["assert f(1) == 2"],
                }
            )
            + "\n"
        )
        out_path = tmp_path / "pairs.jsonl"
        code, out, _ = run(
            capsys,
            [
                "dataset",
                "build",
                "--input",
                str(corpus),
                "--output",
                str(out_path),
                "--llm",
                "--seed",
                "3",
            ],
        )
        assert code == 0
        pairs = load_pairs(str(out_path))
        covered = {rid for p in pairs for rid in p.rules_applied}
        assert covered == {f"R{i}" for i in range(1, 11)}
        assert sum(1 for p in pairs if p.mode == "llm") == 9

    def test_missing_input_exit_1(self, capsys, tmp_path):
        code, _, err = run(
            capsys,
            [
                "dataset",
                "build",
                "--input",
                "/nonexistent.jsonl",
                "--output",
                str(tmp_path / "o.jsonl"),
            ],
        )
        assert code == 1


class TestValidate:
    def _pairs_file(self, tmp_path, corpus_path, capsys):
        out_path = tmp_path / "pairs.jsonl"
        run(
            capsys,
            [
                "dataset",
                "build",
                "--input",
                str(corpus_path),
                "--output",
                str(out_path),
                "--mode",
                "joint",
            ],
        )
        return out_path

    def test_all_equivalent(self, capsys, corpus_path, tmp_path):
        pairs_path = self._pairs_file(tmp_path, corpus_path, capsys)
        code, out, err = run(
            capsys,
            [
                "validate",
                "--pairs",
                str(pairs_path),
                "--corpus",
                str(corpus_path),
            ],
        )
        assert code == 0
        rows = [json.loads(line) for line in out.splitlines()]
        assert rows and all(r["status"] == "equivalent" for r in rows)
        assert "0 inequivalent" in err

    def test_inequivalent_pair_exit_1(self, capsys, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        corpus.write_text(
            json.dumps(
                {
                    "task_id": 7,
                    "text": "t",
                    "code": "def f(x):\n    return x + 1\n",
                    "test_list": ["assert f(0) == 1"],
                }
            )
            + "\n"
        )
        bad_pair = CodePair(
            pair_id="7/joint/R3",
            source_task_id="7",
            mode="joint",
            rules_applied=("R3",),
            original_code="def f(x):\n    return x + 1\n",
            simplified_code="def f(x):\n    return x + 2\n",
            original_tokens=12,
            simplified_tokens=12,
            reduction_pct=0.0,
            validated="static",
        )
        pairs_path = tmp_path / "pairs.jsonl"
        emit([bad_pair], str(pairs_path))
        code, out, err = run(
            capsys,
            ["validate", "--pairs", str(pairs_path), "--corpus", str(corpus)],
        )
        assert code == 1
        [row] = [json.loads(line) for line in out.splitlines()]
        assert row["status"] == "inequivalent"

    def test_without_corpus_inconclusive(self, capsys, corpus_path, tmp_path):
        pairs_path = self._pairs_file(tmp_path, corpus_path, capsys)
        code, out, err = run(capsys, ["validate", "--pairs", str(pairs_path)])
        assert code == 0
        rows = [json.loads(line) for line in out.splitlines()]
        assert all(r["status"] == "inconclusive" for r in rows)
        assert "inconclusive" in err


class TestReport:
    def test_json_on_stdout_table_on_stderr(self, capsys, corpus_path, tmp_path):
        pairs_path = tmp_path / "pairs.jsonl"
        run(
            capsys,
            [
                "dataset",
                "build",
                "--input",
                str(corpus_path),
                "--output",
                str(pairs_path),
            ],
        )
        code, out, err = run(capsys, ["report", "--pairs", str(pairs_path)])
        assert code == 0
        report = json.loads(out)
        assert set(report["rule_fire_counts"]) == {f"R{i}" for i in range(1, 11)}
        assert 0 < report["reduction_pct"] < 100
        assert "rule" in err and "mean tokens" in err

    def test_missing_pairs_exit_1(self, capsys):
        code, _, _ = run(capsys, ["report", "--pairs", "/nonexistent.jsonl"])
        assert code == 1


class TestPassK:
    def _results(self, tmp_path):
        rows = []
        for pid in range(4):
            for s in range(3):
                rows.append(
                    {
                        "problem_id": f"p{pid}",
                        "sample_index": s,
                        "passed": (pid == 0 and s == 0) or (pid == 1 and s == 2),
                    }
                )
        path = tmp_path / "results.jsonl"
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
        return path

    def test_values(self, capsys, tmp_path):
        code, out, _ = run(
            capsys, ["passk", "--results", str(self._results(tmp_path)), "--k", "1,3"]
        )
        assert code == 0
        assert out.splitlines() == ["pass@1 0.250", "pass@3 0.500"]

    def test_oversized_k_exit_1(self, capsys, tmp_path):
        code, _, err = run(
            capsys, ["passk", "--results", str(self._results(tmp_path)), "--k", "4"]
        )
        assert code == 1
        assert "error" in err
