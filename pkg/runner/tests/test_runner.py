import json
import subprocess
import sys

import pytest

from snippet_runner import run_case


def invoke(payload: str):
    proc = subprocess.run(
        [sys.executable, "-m", "snippet_runner"],
        input=payload,
        capture_output=True,
        text=True,
        timeout=30,
    )
    return proc.returncode, proc.stdout


class TestRunCase:
    def test_pass_fail_error(self):
        response = run_case(
            {
                "code": "def f(x):\n    return x + 1\n",
                "tests": [
                    "assert f(1) == 2",
                    "assert f(1) == 3",
                    "assert g(1) == 2",
                ],
            }
        )
        statuses = [(r["status"], r["error_class"]) for r in response["results"]]
        assert statuses == [
            ("pass", None),
            ("fail", None),
            ("error", "NameError"),
        ]
        assert response["elapsed_ms"] >= 0

    def test_results_ordered_like_input(self):
        tests = ["assert True", "assert False", "assert True"]
        response = run_case({"code": "", "tests": tests})
        assert [r["test"] for r in response["results"]] == tests

    def test_error_class_names(self):
        response = run_case(
            {
                "code": "d = {}\n",
                "tests": ["d['missing']", "1 / 0", "int('x')"],
            }
        )
        classes = [r["error_class"] for r in response["results"]]
        assert classes == ["KeyError", "ZeroDivisionError", "ValueError"]

    def test_setup_failure_poisons_all_tests(self):
        response = run_case(
            {"code": "raise RuntimeError('broken')\n", "tests": ["assert True"] * 2}
        )
        assert all(
            r["status"] == "error" and r["error_class"] == "RuntimeError"
            for r in response["results"]
        )

    def test_tests_share_snippet_namespace(self):
        response = run_case(
            {
                "code": "counter = [0]\n",
                "tests": ["counter.append(1)", "assert counter == [0, 1]"],
            }
        )
        assert [r["status"] for r in response["results"]] == ["pass", "pass"]

    def test_snippet_namespace_is_not_main(self):
        response = run_case(
            {"code": "name = __name__\n", "tests": ["assert name != '__main__'"]}
        )
        assert response["results"][0]["status"] == "pass"

    def test_timeout_reported_and_run_continues(self):
        response = run_case(
            {
                "code": "def spin():\n    while True:\n        pass\n",
                "tests": ["spin()", "assert True"],
                "timeout_ms": 200,
            }
        )
        first, second = response["results"]
        assert first["status"] == "error"
        assert first["error_class"] == "Timeout"
        assert second["status"] == "pass"

    def test_setup_timeout(self):
        response = run_case(
            {
                "code": "while True:\n    pass\n",
                "tests": ["assert True"],
                "timeout_ms": 200,
            }
        )
        assert response["results"][0]["error_class"] == "Timeout"


class TestWireProtocol:
    def test_well_formed_request(self):
        code, out = invoke(
            json.dumps(
                {
                    "code": "x = 1\n",
                    "tests": ["assert x == 1"],
                    "timeout_ms": 1000,
                }
            )
        )
        assert code == 0
        response = json.loads(out)
        assert response["results"] == [
            {"test": "assert x == 1", "status": "pass", "error_class": None}
        ]

    def test_timeout_ms_optional(self):
        code, out = invoke(json.dumps({"code": "", "tests": []}))
        assert code == 0
        assert json.loads(out)["results"] == []

    def test_invalid_json_exit_2(self):
        code, out = invoke("{not json")
        assert code == 2
        assert "error" in json.loads(out)

    @pytest.mark.parametrize(
        "payload",
        [
            {"tests": []},
            {"code": 7, "tests": []},
            {"code": ""},
            {"code": "", "tests": "assert True"},
            {"code": "", "tests": [1]},
            {"code": "", "tests": [], "timeout_ms": 0},
            {"code": "", "tests": [], "timeout_ms": "fast"},
            ["not", "an", "object"],
        ],
    )
    def test_malformed_request_exit_2(self, payload):
        code, out = invoke(json.dumps(payload))
        assert code == 2
        assert "error" in json.loads(out)

    def test_processes_are_isolated(self):
        # state set by one invocation must not leak into the next
        code1, _ = invoke(json.dumps({"code": "leak = 42\n", "tests": []}))
        code2, out = invoke(
            json.dumps({"code": "", "tests": ["assert 'leak' not in globals()"]})
        )
        assert code1 == 0 and code2 == 0
        assert json.loads(out)["results"][0]["status"] == "pass"
