"""Token accounting and efficiency metrics.

The reference counting scheme is lexical: tokens of the Python 3 tokenizer
grammar including NEWLINE/INDENT/DEDENT, excluding the encoding marker, the
end marker, blank-line NL tokens, and comments. A subword scheme backed by a
rank-ordered BPE merge table can be plugged in for model-style counts.

pass@k is the empirical indicator form (fraction of problems whose first k
samples contain at least one pass), not the unbiased combinatorial
estimator.
"""

from __future__ import annotations

import io
import json
import tokenize
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

__all__ = [
    "TokenScheme",
    "TokenCount",
    "SampleResult",
    "MetricsReport",
    "LEXICAL",
    "LexError",
    "VocabError",
    "InsufficientSamplesError",
    "count_tokens",
    "reduction",
    "pass_at_k",
    "total_tokens",
    "cost_per_problem",
    "load_results",
]


class LexError(ValueError):
    """Text cannot be lexed by the Python tokenizer."""


class VocabError(ValueError):
    """Subword merge table is missing or malformed."""


class InsufficientSamplesError(ValueError):
    """A problem lacks the first k sample indices required by pass@k."""


_SKIPPED_TOKEN_TYPES = frozenset(
    {tokenize.ENCODING, tokenize.ENDMARKER, tokenize.NL, tokenize.COMMENT}
)


@dataclass(frozen=True)
class TokenScheme:
    kind: str  # "lexical" | "subword"
    vocab: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("lexical", "subword"):
            raise ValueError(f"unknown token scheme kind: {self.kind!r}")
        if self.kind == "subword" and not self.vocab:
            raise VocabError("subword scheme requires a vocab file")


LEXICAL = TokenScheme("lexical")


@dataclass(frozen=True)
class TokenCount:
    scheme: str
    count: int


@dataclass(frozen=True)
class SampleResult:
    problem_id: str
    sample_index: int
    passed: bool


@dataclass
class MetricsReport:
    rule_fire_counts: dict[str, int] = field(default_factory=dict)
    mean_original_tokens: float = 0.0
    mean_simplified_tokens: float = 0.0
    reduction_pct: float = 0.0
    pass_at_k: Optional[dict[int, float]] = None
    total_tokens: Optional[float] = None
    cost_per_problem: Optional[float] = None

    def to_json_dict(self) -> dict:
        return {
            "rule_fire_counts": dict(sorted(self.rule_fire_counts.items())),
            "mean_original_tokens": self.mean_original_tokens,
            "mean_simplified_tokens": self.mean_simplified_tokens,
            "reduction_pct": self.reduction_pct,
            "pass_at_k": self.pass_at_k,
            "total_tokens": self.total_tokens,
            "cost_per_problem": self.cost_per_problem,
        }


def _count_lexical(source: str) -> int:
    count = 0
    try:
        for tok in tokenize.generate_tokens(io.StringIO(source).readline):
            if tok.type not in _SKIPPED_TOKEN_TYPES:
                count += 1
    except (tokenize.TokenError, IndentationError, SyntaxError) as exc:
        raise LexError(f"cannot lex text: {exc}") from None
    return count


def _load_merges(path: str) -> dict[tuple[str, str], int]:
    merges: dict[tuple[str, str], int] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise VocabError(f"cannot load vocab {path!r}: {exc}") from None
    for rank, line in enumerate(lines):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise VocabError(f"malformed merge line {rank + 1}: {line!r}")
        merges.setdefault((parts[0], parts[1]), rank)
    return merges


def _bpe_word(word: str, merges: dict[tuple[str, str], int]) -> list[str]:
    symbols = list(word)
    while len(symbols) > 1:
        ranked = [
            (merges[pair], idx)
            for idx, pair in enumerate(zip(symbols, symbols[1:]))
            if pair in merges
        ]
        if not ranked:
            break
        best_rank = min(rank for rank, _ in ranked)
        best_pair = None
        for idx, pair in enumerate(zip(symbols, symbols[1:])):
            if merges.get(pair) == best_rank:
                best_pair = pair
                break
        out = []
        i = 0
        while i < len(symbols):
            if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == best_pair:
                out.append(symbols[i] + symbols[i + 1])
                i += 2
            else:
                out.append(symbols[i])
                i += 1
        symbols = out
    return symbols


def _count_subword(source: str, vocab: str) -> int:
    merges = _load_merges(vocab)
    return sum(len(_bpe_word(word, merges)) for word in source.split())


def count_tokens(source: str, scheme: TokenScheme = LEXICAL) -> TokenCount:
    if scheme.kind == "lexical":
        return TokenCount(scheme="lexical", count=_count_lexical(source))
    return TokenCount(scheme="subword", count=_count_subword(source, scheme.vocab))


def reduction(original: str, simplified: str, scheme: TokenScheme = LEXICAL) -> float:
    """Percent token reduction; negative values flag a regression."""
    orig = count_tokens(original, scheme).count
    if orig == 0:
        raise ValueError("reduction undefined for empty original")
    simp = count_tokens(simplified, scheme).count
    return 100.0 * (orig - simp) / orig


def pass_at_k(results: Sequence[SampleResult], k: int) -> float:
    if k < 1:
        raise ValueError("k must be positive")
    by_problem: dict[str, dict[int, bool]] = {}
    for sample in results:
        slot = by_problem.setdefault(sample.problem_id, {})
        slot[sample.sample_index] = sample.passed
    if not by_problem:
        raise ValueError("no results")
    solved = 0
    for problem_id, samples in by_problem.items():
        missing = [j for j in range(k) if j not in samples]
        if missing:
            raise InsufficientSamplesError(
                f"problem {problem_id!r} lacks sample indices {missing} for k={k}"
            )
        if any(samples[j] for j in range(k)):
            solved += 1
    return solved / len(by_problem)


def total_tokens(input_tokens: float, generated_tokens: float) -> float:
    if input_tokens < 0 or generated_tokens < 0:
        raise ValueError("token counts must be non-negative")
    return input_tokens + generated_tokens


def cost_per_problem(total_time: float, n_problems: int) -> float:
    if n_problems < 1:
        raise ValueError("n_problems must be >= 1")
    return total_time / n_problems


def load_results(path: str) -> list[SampleResult]:
    """Load SampleResults from JSONL, one object per line."""
    results = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                results.append(
                    SampleResult(
                        problem_id=str(obj["problem_id"]),
                        sample_index=int(obj["sample_index"]),
                        passed=bool(obj["passed"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad results line {lineno}: {exc}") from None
    return results
