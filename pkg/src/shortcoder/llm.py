"""Prompted synthesis of simplification pairs via a chat-completion endpoint.

The prompt carries four delimiter-wrapped blocks in fixed order: system
role, task description (naming the rule the synthesized pair must
exercise), the full ten-rule catalog, and one worked ⟨original_code,
simplified_code⟩ example. Responses are accepted only if both code blocks
parse, differ, actually fire the target rule, and survive the static
equivalence check — the same gate rule-based pairs pass through.

A deterministic mock provider stands in for live endpoints; live calls go
through ``HttpProvider`` configured from SHORTCODER_LLM_ENDPOINT /
SHORTCODER_LLM_KEY.
"""

from __future__ import annotations

import os
import random
import re
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .dataset import CodePair
from .metrics import LEXICAL, count_tokens
from . import equivalence
from .rules import RULE_IDS, RULES, RuleConfig, apply_rule
from .syntax import ParseError, parse, render

__all__ = [
    "PromptTemplate",
    "ProviderConfig",
    "Provider",
    "MockProvider",
    "ScriptedProvider",
    "HttpProvider",
    "ResponseFormatError",
    "SynthesisError",
    "default_template",
    "build_prompt",
    "parse_response",
    "synthesize_pair",
]

_RULE_DESCRIPTIONS = {
    "R1": "collapse consecutive assignments of one identical immutable value into a chained assignment",
    "R2": "drop grouping parentheses around return values",
    "R3": "rewrite `x = x <op> y` as the compound assignment `x <op>= y`",
    "R4": "fold a two-branch if/else assignment into one conditional expression",
    "R5": "replace `else:` blocks holding a single `if` with `elif` chains",
    "R6": "turn accumulator loops into list or dictionary comprehensions",
    "R7": "merge consecutive single-target `del` statements into one",
    "R8": "replace key-presence if/else lookups with `dict.get(key, default)`",
    "R9": "replace string concatenation chains with one `str.format()` call",
    "R10": "wrap open()/close() file handling in a `with open()` block",
}

ENDPOINT_ENV = "SHORTCODER_LLM_ENDPOINT"
KEY_ENV = "SHORTCODER_LLM_KEY"


class ResponseFormatError(ValueError):
    """Response body does not contain exactly one pair of code blocks."""


class SynthesisError(RuntimeError):
    """No acceptable pair after exhausting retries."""

    def __init__(self, reason: str, attempts: int):
        super().__init__(f"synthesis failed after {attempts} attempt(s): {reason}")
        self.reason = reason
        self.attempts = attempts


@dataclass(frozen=True)
class PromptTemplate:
    system_role: str
    task_description: str
    rules_block: tuple[str, ...]
    example: tuple[str, str]  # (original_code, simplified_code)
    delimiter_open: str = "<"
    delimiter_close: str = ">"

    def wrap(self, tag: str, body: str) -> str:
        o, c = self.delimiter_open, self.delimiter_close
        return f"{o}{tag}{c}\n{body.rstrip()}\n{o}/{tag}{c}"


def default_template() -> PromptTemplate:
    rules = tuple(
        f"{rule_id} ({RULES[rule_id].name}): {_RULE_DESCRIPTIONS[rule_id]}"
        for rule_id in RULE_IDS
    )
    example_original = (
        "f = open('file.txt', 'r')\n"
        "data = f.read()\n"
        "f.close()\n"
    )
    example_simplified = (
        "with open('file.txt', 'r') as f:\n"
        "    data = f.read()\n"
    )
    return PromptTemplate(
        system_role=(
            "You are a Python code synthesis assistant. You produce pairs of "
            "an original snippet and its shorter, behaviorally identical form."
        ),
        task_description=(
            "Write one self-contained Python snippet on which simplification "
            "rule {rule} applies, then apply exactly that rule to it. Return "
            "the pair as an original_code block and a simplified_code block."
        ),
        rules_block=rules,
        example=(example_original, example_simplified),
    )


def build_prompt(template: PromptTemplate, target_rule: str) -> str:
    if target_rule not in RULE_IDS:
        raise ValueError(f"unknown rule id: {target_rule}")
    task = template.task_description.format(rule=target_rule)
    example_body = (
        template.wrap("original_code", template.example[0])
        + "\n"
        + template.wrap("simplified_code", template.example[1])
    )
    blocks = [
        template.wrap("system", template.system_role),
        template.wrap("task", task),
        template.wrap("rules", "\n".join(template.rules_block)),
        template.wrap("example", example_body),
    ]
    return "\n".join(blocks) + "\n"


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = ""
    auth_env: str = KEY_ENV
    model: str = "gpt-4"
    temperature: float = 0.0
    max_retries: int = 2

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


class Provider(Protocol):
    config: ProviderConfig

    def complete(self, prompt: str, seed: int) -> str: ...


def _block_re(tag: str) -> re.Pattern:
    return re.compile(rf"<{tag}>\n?(.*?)\n?</{tag}>", re.DOTALL)


def parse_response(text: str) -> tuple[str, str]:
    """Extract the (original, simplified) code blocks, tolerating prose."""
    pair = []
    for tag in ("original_code", "simplified_code"):
        blocks = _block_re(tag).findall(text)
        if not blocks:
            raise ResponseFormatError(f"missing {tag.split('_')[0]} block")
        if len(blocks) > 1:
            raise ResponseFormatError(f"duplicated {tag.split('_')[0]} block")
        body = blocks[0]
        pair.append(body + "\n" if body and not body.endswith("\n") else body)
    return pair[0], pair[1]


# ---------------------------------------------------------------------------
# providers
# ---------------------------------------------------------------------------

# Seedable per-rule snippet factories for the mock provider: each returns an
# original that the rule fires on. The simplified side is derived by really
# applying the rule, so mock pairs always pass the acceptance gate.
_MOCK_VARIABLES = ("value", "total", "result", "count", "acc")


def _mock_original(rule_id: str, rng: random.Random) -> str:
    v = rng.choice(_MOCK_VARIABLES)
    w = rng.choice([n for n in _MOCK_VARIABLES if n != v])
    n = rng.randint(2, 9)
    originals = {
        "R1": f"{v} = {n}\n{w} = {n}\n",
        "R2": f"def combine(a, b):\n    return (a + b * {n})\n",
        "R3": f"def bump({v}):\n    {v} = {v} + {n}\n    return {v}\n",
        "R4": f"def classify({v}):\n    if {v} > {n}:\n        {w} = 'big'\n    else:\n        {w} = 'small'\n    return {w}\n",
        "R5": f"def grade({v}):\n    if {v} > {n}:\n        {w} = 'high'\n    else:\n        if {v} > 0:\n            {w} = 'mid'\n        else:\n            {w} = 'low'\n    return {w}\n",
        "R6": f"def scale(items):\n    {v} = []\n    for item in items:\n        {v}.append(item * {n})\n    return {v}\n",
        "R7": f"{v} = 1\n{w} = 2\ndel {v}\ndel {w}\n",
        "R8": f"def pick(table, key):\n    if key in table:\n        {v} = table[key]\n    else:\n        {v} = {n}\n    return {v}\n",
        "R9": f"def label({v}, {w}):\n    return 'id-' + str({v}) + '/' + str({w}) + '-end'\n",
        "R10": f"def save(text):\n    handle = open('/tmp/mock_{rule_id.lower()}.txt', 'w')\n    handle.write(text)\n    handle.close()\n",
    }
    return originals[rule_id]


@dataclass
class MockProvider:
    """Deterministic provider: (seed, target rule in prompt) -> response."""

    config: ProviderConfig = field(default_factory=ProviderConfig)

    def complete(self, prompt: str, seed: int) -> str:
        match = re.search(r"rule (R\d+) applies", prompt)
        rule_id = match.group(1) if match else "R3"
        rng = random.Random(f"{seed}:{rule_id}")
        original = _mock_original(rule_id, rng)
        result = apply_rule(parse(original), rule_id, RuleConfig())
        simplified = render(result.tree)
        return (
            "Here is a pair exercising the requested rule.\n"
            f"<original_code>\n{original}</original_code>\n"
            f"<simplified_code>\n{simplified}</simplified_code>\n"
            "Both snippets behave identically.\n"
        )


@dataclass
class ScriptedProvider:
    """Replays canned responses in order; for exercising rejection paths."""

    responses: list[str]
    config: ProviderConfig = field(default_factory=ProviderConfig)
    calls: int = 0

    def complete(self, prompt: str, seed: int) -> str:
        if self.calls >= len(self.responses):
            raise RuntimeError("scripted provider exhausted")
        response = self.responses[self.calls]
        self.calls += 1
        return response


@dataclass
class HttpProvider:
    """Minimal chat-completion client; gated behind explicit configuration."""

    config: ProviderConfig

    def complete(self, prompt: str, seed: int) -> str:
        import requests

        endpoint = self.config.endpoint or os.environ.get(ENDPOINT_ENV, "")
        if not endpoint:
            raise RuntimeError(f"no endpoint configured (set {ENDPOINT_ENV})")
        headers = {}
        token = os.environ.get(self.config.auth_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        response = requests.post(endpoint, json=body, headers=headers, timeout=120)
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def _validate_candidate(
    original: str, simplified: str, target_rule: str
) -> Optional[str]:
    """Returns a rejection reason, or None when the candidate is acceptable."""
    try:
        original_tree = parse(original)
    except ParseError as exc:
        return f"parse error in original: {exc.message}"
    try:
        parse(simplified)
    except ParseError as exc:
        return f"parse error in simplified: {exc.message}"
    if original.strip() == simplified.strip():
        return "identical pair"
    fired = apply_rule(original_tree, target_rule, RuleConfig()).fired
    if not fired:
        return f"target rule {target_rule} does not fire on original"
    verdict = equivalence.check_static(original, simplified)
    if verdict.status == equivalence.INEQUIVALENT:
        return f"static check: {verdict.detail}"
    return None


def synthesize_pair(
    provider: Provider,
    target_rule: str,
    seed: int = 0,
    template: Optional[PromptTemplate] = None,
) -> CodePair:
    """Prompt the provider until an acceptable pair emerges or retries run out."""
    if target_rule not in RULE_IDS:
        raise ValueError(f"unknown rule id: {target_rule}")
    template = template or default_template()
    prompt = build_prompt(template, target_rule)
    attempts = provider.config.max_retries + 1
    reason = "no attempts made"
    for attempt in range(attempts):
        try:
            body = provider.complete(prompt, seed + attempt)
        except Exception as exc:  # transport failure
            reason = f"transport error: {exc}"
            continue
        try:
            original, simplified = parse_response(body)
        except ResponseFormatError as exc:
            reason = str(exc)
            continue
        reason = _validate_candidate(original, simplified, target_rule)
        if reason is None:
            orig_tokens = count_tokens(original, LEXICAL).count
            simp_tokens = count_tokens(simplified, LEXICAL).count
            return CodePair(
                pair_id=f"llm-{target_rule}-{seed}/llm/{target_rule}",
                source_task_id=f"llm-{target_rule}-{seed}",
                mode="llm",
                rules_applied=(target_rule,),
                original_code=original,
                simplified_code=simplified,
                original_tokens=orig_tokens,
                simplified_tokens=simp_tokens,
                reduction_pct=round(
                    100.0 * (orig_tokens - simp_tokens) / orig_tokens, 4
                )
                if orig_tokens
                else 0.0,
                validated="static",
            )
    raise SynthesisError(reason or "rejected", attempts)
