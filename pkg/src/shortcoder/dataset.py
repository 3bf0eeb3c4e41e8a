"""Corpus ingestion and ⟨original_code, simplified_code⟩ pair construction.

Input corpora are MBPP-style JSONL ({"task_id", "text", "code", "test_list"})
or HumanEval-style JSONL ({"task_id", "prompt", "canonical_solution",
"test"}). Output is ShorterCodeBench JSONL, one CodePair per line with a
fixed field order, byte-deterministic for identical inputs.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import equivalence
from .metrics import LEXICAL, count_tokens
from .rules import RuleConfig, simplify_independent, simplify_joint
from .syntax import ParseError, parse, render

logger = logging.getLogger(__name__)

__all__ = [
    "ProblemRecord",
    "CodePair",
    "DatasetStats",
    "EmptyCorpusError",
    "ingest",
    "build_pairs",
    "emit",
    "load_pairs",
    "stats",
]

MODES = ("independent", "joint", "llm")

_PAIR_FIELDS = (
    "pair_id",
    "source_task_id",
    "mode",
    "rules_applied",
    "original_code",
    "simplified_code",
    "original_tokens",
    "simplified_tokens",
    "reduction_pct",
    "validated",
)


class EmptyCorpusError(ValueError):
    """A corpus file yielded zero valid records."""


@dataclass(frozen=True)
class ProblemRecord:
    task_id: str
    text: str
    code: str
    test_list: tuple[str, ...] = ()


@dataclass(frozen=True)
class CodePair:
    pair_id: str
    source_task_id: str
    mode: str
    rules_applied: tuple[str, ...]
    original_code: str
    simplified_code: str
    original_tokens: int
    simplified_tokens: int
    reduction_pct: float
    validated: str = "none"

    def to_json_dict(self) -> dict:
        out = {}
        for name in _PAIR_FIELDS:
            value = getattr(self, name)
            out[name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CodePair":
        return cls(
            pair_id=obj["pair_id"],
            source_task_id=obj["source_task_id"],
            mode=obj["mode"],
            rules_applied=tuple(obj["rules_applied"]),
            original_code=obj["original_code"],
            simplified_code=obj["simplified_code"],
            original_tokens=int(obj["original_tokens"]),
            simplified_tokens=int(obj["simplified_tokens"]),
            reduction_pct=float(obj["reduction_pct"]),
            validated=obj.get("validated", "none"),
        )


@dataclass
class DatasetStats:
    total: int = 0
    by_mode: dict[str, int] = field(default_factory=dict)
    by_rule: dict[str, int] = field(default_factory=dict)
    aggregate_reduction_pct: float = 0.0
    validation_pass_rate: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "by_mode": dict(sorted(self.by_mode.items())),
            "by_rule": dict(sorted(self.by_rule.items())),
            "aggregate_reduction_pct": self.aggregate_reduction_pct,
            "validation_pass_rate": self.validation_pass_rate,
        }


def _record_from_line(obj: dict, fmt: str) -> ProblemRecord:
    if fmt == "mbpp-jsonl":
        tests = obj.get("test_list", [])
        if not isinstance(tests, list) or not all(isinstance(t, str) for t in tests):
            raise KeyError("test_list")
        return ProblemRecord(
            task_id=str(obj["task_id"]),
            text=str(obj["text"]),
            code=str(obj["code"]),
            test_list=tuple(tests),
        )
    if fmt == "humaneval-jsonl":
        code = str(obj["prompt"]) + str(obj["canonical_solution"])
        test = obj.get("test", "")
        tests = tuple(test) if isinstance(test, list) else ((test,) if test else ())
        return ProblemRecord(
            task_id=str(obj["task_id"]),
            text=str(obj["prompt"]),
            code=code,
            test_list=tests,
        )
    raise ValueError(f"unknown corpus format: {fmt!r}")


def ingest(path: str, fmt: str = "mbpp-jsonl") -> list[ProblemRecord]:
    """Load a JSONL corpus; invalid lines are logged and skipped."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(_record_from_line(obj, fmt))
            except ValueError as exc:
                if "unknown corpus format" in str(exc):
                    raise
                logger.warning("%s:%d: skipping line: %s", path, lineno, exc)
            except KeyError as exc:
                logger.warning("%s:%d: skipping line, missing field %s", path, lineno, exc)
    if not records:
        raise EmptyCorpusError(f"no valid records in {path}")
    return records


def _make_pair(
    record: ProblemRecord,
    mode: str,
    rules: Sequence[str],
    original: str,
    simplified: str,
) -> Optional[CodePair]:
    if simplified == original:
        return None
    orig_tokens = count_tokens(original, LEXICAL).count
    simp_tokens = count_tokens(simplified, LEXICAL).count
    if mode in ("independent", "joint") and simp_tokens >= orig_tokens:
        logger.warning(
            "%s/%s: dropping non-reducing pair (%d -> %d tokens)",
            record.task_id,
            mode,
            orig_tokens,
            simp_tokens,
        )
        return None
    verdict = equivalence.check_static(original, simplified)
    if verdict.status == equivalence.INEQUIVALENT:
        logger.warning("%s/%s: dropping pair: %s", record.task_id, mode, verdict.detail)
        return None
    return CodePair(
        pair_id=f"{record.task_id}/{mode}/{'+'.join(rules)}",
        source_task_id=record.task_id,
        mode=mode,
        rules_applied=tuple(rules),
        original_code=original,
        simplified_code=simplified,
        original_tokens=orig_tokens,
        simplified_tokens=simp_tokens,
        reduction_pct=round(100.0 * (orig_tokens - simp_tokens) / orig_tokens, 4),
        validated="static",
    )


def build_pairs(
    records: Iterable[ProblemRecord],
    config: RuleConfig = RuleConfig(),
    modes: Sequence[str] = ("independent", "joint"),
    failures: Optional[list] = None,
) -> list[CodePair]:
    """Rule-based pair construction; deterministic record/mode/rule order."""
    unknown = set(modes) - {"independent", "joint"}
    if unknown:
        raise ValueError(f"unknown modes: {sorted(unknown)}")
    pairs = []
    for record in records:
        try:
            tree = parse(record.code)
        except ParseError as exc:
            logger.warning("%s: code does not parse: %s", record.task_id, exc)
            if failures is not None:
                failures.append((record.task_id, str(exc)))
            continue
        original = render(tree)
        if "independent" in modes:
            for rule_id, result in simplify_independent(tree, config):
                pair = _make_pair(
                    record, "independent", [rule_id], original, render(result.tree)
                )
                if pair:
                    pairs.append(pair)
        if "joint" in modes:
            result = simplify_joint(tree, config)
            rule_ids = sorted({rid for rid, _ in result.fired}, key=lambda r: int(r[1:]))
            if len(rule_ids) >= 2:  # single-rule joint duplicates the independent pair
                pair = _make_pair(
                    record, "joint", rule_ids, original, render(result.tree)
                )
                if pair:
                    pairs.append(pair)
    return pairs


def emit(pairs: Sequence[CodePair], path: str) -> int:
    """Write pairs as JSONL; byte-deterministic for identical inputs."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for pair in pairs:
            handle.write(json.dumps(pair.to_json_dict(), ensure_ascii=False))
            handle.write("\n")
    return len(pairs)


def load_pairs(path: str) -> list[CodePair]:
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                pairs.append(CodePair.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad pair line: {exc}") from None
    return pairs


def stats(pairs: Sequence[CodePair]) -> DatasetStats:
    by_mode: dict[str, int] = {}
    by_rule: dict[str, int] = {}
    orig_sum = simp_sum = 0
    validated = 0
    for pair in pairs:
        by_mode[pair.mode] = by_mode.get(pair.mode, 0) + 1
        for rule_id in pair.rules_applied:
            by_rule[rule_id] = by_rule.get(rule_id, 0) + 1
        orig_sum += pair.original_tokens
        simp_sum += pair.simplified_tokens
        if pair.validated in ("static", "dynamic"):
            validated += 1
    return DatasetStats(
        total=len(pairs),
        by_mode=by_mode,
        by_rule=by_rule,
        aggregate_reduction_pct=(
            100.0 * (orig_sum - simp_sum) / orig_sum if orig_sum else 0.0
        ),
        validation_pass_rate=(validated / len(pairs)) if pairs else 0.0,
    )
