"""One-shot execution harness for code snippets with assertion tests.

Protocol (one request per process invocation):

  stdin:  {"code": str, "tests": [str], "timeout_ms": int}
  stdout: {"results": [{"test": str, "status": "pass"|"fail"|"error",
           "error_class": str|null}], "elapsed_ms": int}

Exit codes: 0 well-formed response, 2 malformed request (a JSON error
object is still written), anything else is a harness crash.

The snippet runs in a fresh namespace; each test string is then executed in
that namespace under a per-test wall-clock cap. A timed-out test reports
status "error" with error_class "Timeout" and does not block the rest.

No sandboxing beyond the timeout is attempted: callers run trusted corpus
code.
"""

from __future__ import annotations

import json
import signal
import sys
import time

__all__ = ["run_case", "main"]


class _Timeout(Exception):
    pass


def _alarm(signum, frame):
    raise _Timeout()


def _with_timeout(fn, timeout_ms: int):
    """Run fn() under SIGALRM; returns (status, error_class)."""
    old = signal.signal(signal.SIGALRM, _alarm)
    signal.setitimer(signal.ITIMER_REAL, timeout_ms / 1000.0)
    try:
        fn()
        return "pass", None
    except _Timeout:
        return "error", "Timeout"
    except AssertionError:
        return "fail", None
    except BaseException as exc:  # noqa: BLE001 - report the class, keep going
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            return "error", type(exc).__name__
        return "error", type(exc).__name__
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0.0)
        signal.signal(signal.SIGALRM, old)


def run_case(request: dict) -> dict:
    code = request["code"]
    tests = request["tests"]
    timeout_ms = int(request.get("timeout_ms", 5000))
    started = time.monotonic()

    namespace: dict = {"__name__": "__snippet__"}
    setup_status, setup_error = _with_timeout(
        lambda: exec(compile(code, "<snippet>", "exec"), namespace), timeout_ms
    )

    results = []
    for test in tests:
        if setup_status != "pass":
            # import-time failure poisons every test
            results.append(
                {"test": test, "status": "error", "error_class": setup_error or "Exception"}
            )
            continue
        status, error_class = _with_timeout(
            lambda t=test: exec(compile(t, "<test>", "exec"), namespace), timeout_ms
        )
        results.append({"test": test, "status": status, "error_class": error_class})

    elapsed_ms = int((time.monotonic() - started) * 1000)
    return {"results": results, "elapsed_ms": elapsed_ms}


def _validate(request) -> str | None:
    if not isinstance(request, dict):
        return "request must be a JSON object"
    if not isinstance(request.get("code"), str):
        return "missing or non-string 'code'"
    tests = request.get("tests")
    if not isinstance(tests, list) or not all(isinstance(t, str) for t in tests):
        return "missing or malformed 'tests'"
    timeout = request.get("timeout_ms", 5000)
    if not isinstance(timeout, int) or timeout < 1:
        return "'timeout_ms' must be a positive integer"
    return None


def main() -> int:
    raw = sys.stdin.read()
    try:
        request = json.loads(raw)
    except json.JSONDecodeError as exc:
        json.dump({"error": f"invalid JSON request: {exc}"}, sys.stdout)
        return 2
    problem = _validate(request)
    if problem:
        json.dump({"error": problem}, sys.stdout)
        return 2
    response = run_case(request)
    json.dump(response, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
