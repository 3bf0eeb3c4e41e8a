"""Behavioral equivalence checks for ⟨original, simplified⟩ code pairs.

Static checks are cheap and conservative: they only claim equivalence when
the normalized trees are equal, and only claim inequivalence on parse
failures or names that no rule could have introduced. Everything else is
settled by differential testing through an external runner process speaking
a one-request-per-invocation JSON protocol:

  request (child stdin):  {"code": str, "tests": [str], "timeout_ms": int}
  response (child stdout): {"results": [{"test": str, "status": "pass"|
      "fail"|"error", "error_class": str|null}], "elapsed_ms": int}

Exit code 0 signals a well-formed response; anything else is a harness
failure and folds into an inconclusive verdict.
"""

from __future__ import annotations

import ast
import json
import os
import shlex
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .syntax import ParseError, normalize, parse, structurally_equal

__all__ = [
    "EquivalenceVerdict",
    "RunnerSpec",
    "check_static",
    "check_dynamic",
    "check_dynamic_many",
    "default_runner_command",
]

# Names a rewrite may legitimately introduce (R4's bool() coercion); method
# attributes like .get/.format are not Name nodes and need no allowance.
_RULE_INTRODUCED_NAMES = frozenset({"bool"})

EQUIVALENT = "equivalent"
INEQUIVALENT = "inequivalent"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EquivalenceVerdict:
    status: str
    detail: str = ""

    def __post_init__(self):
        if self.status == INEQUIVALENT and not self.detail:
            raise ValueError("inequivalent verdicts must name the diverging test")
        if self.status == INCONCLUSIVE and not self.detail:
            raise ValueError("inconclusive verdicts must carry a reason")


def default_runner_command() -> list[str]:
    configured = os.environ.get("SHORTCODER_RUNNER")
    if configured:
        return shlex.split(configured)
    return [sys.executable, "-m", "snippet_runner"]


@dataclass(frozen=True)
class RunnerSpec:
    command: tuple[str, ...] = field(default_factory=lambda: tuple(default_runner_command()))
    timeout_ms: int = 5000
    max_parallel: int = 4

    def __post_init__(self):
        if self.timeout_ms < 100:
            raise ValueError("timeout_ms must be >= 100")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


def check_static(original: str, simplified: str) -> EquivalenceVerdict:
    """Conservative structural comparison; never wrongly claims equivalence."""
    try:
        orig_tree = parse(original)
    except ParseError:
        orig_tree = None
    try:
        simp_tree = parse(simplified)
    except ParseError:
        simp_tree = None
    if orig_tree is None and simp_tree is None:
        return EquivalenceVerdict(INCONCLUSIVE, "neither side parses")
    if orig_tree is None or simp_tree is None:
        side = "original" if orig_tree is None else "simplified"
        return EquivalenceVerdict(INEQUIVALENT, f"parse failure in {side} code")

    new_names = _load_names(simp_tree.module) - _load_names(orig_tree.module)
    new_names -= _RULE_INTRODUCED_NAMES
    if new_names:
        return EquivalenceVerdict(
            INEQUIVALENT, f"simplified code introduces names: {sorted(new_names)}"
        )
    if structurally_equal(normalize(orig_tree), normalize(simp_tree)):
        return EquivalenceVerdict(EQUIVALENT, "normalized trees are equal")
    return EquivalenceVerdict(INCONCLUSIVE, "needs dynamic check")


def _load_names(module: ast.Module) -> set[str]:
    return {
        node.id
        for node in ast.walk(module)
        if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load)
    }


def _run_variant(code: str, tests: Sequence[str], runner: RunnerSpec):
    """Returns a results list, or an EquivalenceVerdict on harness trouble."""
    request = json.dumps(
        {"code": code, "tests": list(tests), "timeout_ms": runner.timeout_ms}
    )
    budget = (runner.timeout_ms * (len(tests) + 1)) / 1000.0 + 10.0
    try:
        proc = subprocess.run(
            list(runner.command),
            input=request,
            capture_output=True,
            text=True,
            timeout=budget,
        )
    except FileNotFoundError:
        return EquivalenceVerdict(INCONCLUSIVE, "runner unavailable")
    except subprocess.TimeoutExpired:
        return EquivalenceVerdict(INCONCLUSIVE, "runner timed out")
    if proc.returncode != 0:
        detail = proc.stderr.strip().splitlines()[-1:] or ["no diagnostics"]
        return EquivalenceVerdict(
            INCONCLUSIVE, f"runner exited {proc.returncode}: {detail[0]}"
        )
    try:
        response = json.loads(proc.stdout)
        results = response["results"]
    except (json.JSONDecodeError, KeyError, TypeError):
        return EquivalenceVerdict(INCONCLUSIVE, "malformed runner response")
    if len(results) != len(tests):
        return EquivalenceVerdict(INCONCLUSIVE, "runner response length mismatch")
    return results


def check_dynamic(
    original: str,
    simplified: str,
    tests: Sequence[str],
    runner: RunnerSpec = RunnerSpec(),
) -> EquivalenceVerdict:
    """Differential testing: same per-test outcome on both sides, and the
    original must itself pass every test."""
    if not tests:
        return EquivalenceVerdict(INCONCLUSIVE, "no tests")
    orig_results = _run_variant(original, tests, runner)
    if isinstance(orig_results, EquivalenceVerdict):
        return orig_results
    simp_results = _run_variant(simplified, tests, runner)
    if isinstance(simp_results, EquivalenceVerdict):
        return simp_results

    for test, orig, simp in zip(tests, orig_results, simp_results):
        if orig.get("error_class") == "Timeout" or simp.get("error_class") == "Timeout":
            return EquivalenceVerdict(INCONCLUSIVE, f"timeout: {test}")
        if orig["status"] != simp["status"]:
            return EquivalenceVerdict(INEQUIVALENT, test)
        if orig["status"] == "error" and orig.get("error_class") != simp.get("error_class"):
            return EquivalenceVerdict(INEQUIVALENT, test)
    failing = [t for t, r in zip(tests, orig_results) if r["status"] != "pass"]
    if failing:
        return EquivalenceVerdict(
            INCONCLUSIVE, f"original fails its own tests: {failing[0]}"
        )
    return EquivalenceVerdict(EQUIVALENT, "all tests agree")


def check_dynamic_many(
    pairs: Sequence[tuple[str, str, Sequence[str]]],
    runner: RunnerSpec = RunnerSpec(),
) -> list[EquivalenceVerdict]:
    """Run check_dynamic over many (original, simplified, tests) triples with
    up to max_parallel runner children in flight; order is preserved."""
    with ThreadPoolExecutor(max_workers=runner.max_parallel) as pool:
        futures = [
            pool.submit(check_dynamic, original, simplified, tests, runner)
            for original, simplified, tests in pairs
        ]
        return [f.result() for f in futures]
