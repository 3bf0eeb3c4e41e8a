"""Operator-facing command line.

stdout carries data, stderr carries diagnostics, exit codes carry the
verdict: 0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import dataset, equivalence, llm, metrics
from .rules import RULE_IDS, RuleConfig, simplify_independent, simplify_joint
from .syntax import ParseError, parse, render

logger = logging.getLogger("shortcoder")


def _rule_set(raw: str | None) -> frozenset[str]:
    if not raw:
        return frozenset(RULE_IDS)
    ids = frozenset(part.strip() for part in raw.split(",") if part.strip())
    unknown = ids - set(RULE_IDS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown rule ids: {sorted(unknown)}")
    return ids


def _scheme(raw: str) -> metrics.TokenScheme:
    if raw == "lexical":
        return metrics.LEXICAL
    if raw.startswith("subword:"):
        return metrics.TokenScheme("subword", raw.split(":", 1)[1])
    raise argparse.ArgumentTypeError("tokenizer must be 'lexical' or 'subword:PATH'")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shortcoder",
        description="Token-reducing, semantics-preserving Python simplification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_simplify = sub.add_parser("simplify", help="simplify a Python source file or stdin")
    p_simplify.add_argument("input", nargs="?", help="source file (default stdin)")
    p_simplify.add_argument("--mode", choices=["joint", "independent"], default="joint")
    p_simplify.add_argument("--rules", type=_rule_set, default=frozenset(RULE_IDS))
    p_simplify.add_argument(
        "--strictness",
        choices=["strict", "paper-faithful"],
        default="paper-faithful",
    )
    p_simplify.add_argument("--metrics", action="store_true", help="token summary on stderr")
    p_simplify.add_argument("--check", choices=["none", "static", "dynamic"], default="none")
    p_simplify.add_argument("--runner", help="runner command for --check dynamic")
    p_simplify.add_argument("--tests", help="JSON list of assertion strings for --check dynamic")

    p_dataset = sub.add_parser("dataset", help="dataset operations")
    dataset_sub = p_dataset.add_subparsers(dest="dataset_command", required=True)
    p_build = dataset_sub.add_parser("build", help="build a pairs dataset from a corpus")
    p_build.add_argument("--input", required=True)
    p_build.add_argument(
        "--format", choices=["mbpp-jsonl", "humaneval-jsonl"], default="mbpp-jsonl"
    )
    p_build.add_argument("--output", required=True)
    p_build.add_argument("--mode", choices=["independent", "joint", "both"], default="both")
    p_build.add_argument(
        "--strictness", choices=["strict", "paper-faithful"], default="strict"
    )
    p_build.add_argument(
        "--llm",
        action="store_true",
        help="synthesize pairs for rules with zero rule-based coverage",
    )
    p_build.add_argument("--seed", type=int, default=0)

    p_validate = sub.add_parser("validate", help="differential-test a pairs file")
    p_validate.add_argument("--pairs", required=True)
    p_validate.add_argument(
        "--corpus", help="corpus JSONL supplying tests, joined by source_task_id"
    )
    p_validate.add_argument(
        "--corpus-format",
        choices=["mbpp-jsonl", "humaneval-jsonl"],
        default="mbpp-jsonl",
    )
    p_validate.add_argument("--runner", help="runner command (default: SHORTCODER_RUNNER)")
    p_validate.add_argument("--timeout-ms", type=int, default=5000)
    p_validate.add_argument("--max-parallel", type=int, default=4)

    p_report = sub.add_parser("report", help="efficiency report over a pairs file")
    p_report.add_argument("--pairs", required=True)
    p_report.add_argument("--tokenizer", type=_scheme, default=metrics.LEXICAL)

    p_passk = sub.add_parser("passk", help="pass@k over a results JSONL")
    p_passk.add_argument("--results", required=True)
    p_passk.add_argument("--k", required=True, help="comma-separated k values")

    return parser


def _cmd_simplify(args) -> int:
    if args.input:
        try:
            source = open(args.input, encoding="utf-8").read()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        source = sys.stdin.read()
    try:
        tree = parse(source)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config = RuleConfig(enabled=args.rules, strictness=args.strictness)
    original = render(tree)

    if args.mode == "independent":
        for rule_id, result in simplify_independent(tree, config):
            print(json.dumps({"rule": rule_id, "code": render(result.tree)}))
        return 0

    simplified = render(simplify_joint(tree, config).tree)
    if args.check != "none":
        verdict = equivalence.check_static(original, simplified)
        if args.check == "dynamic" and verdict.status != equivalence.EQUIVALENT:
            tests = json.loads(args.tests) if args.tests else []
            runner = _runner_spec(args.runner, 5000, 4)
            verdict = equivalence.check_dynamic(original, simplified, tests, runner)
        if verdict.status == equivalence.INEQUIVALENT:
            print(f"error: rewrite not equivalent: {verdict.detail}", file=sys.stderr)
            return 1
        if verdict.status == equivalence.INCONCLUSIVE:
            print(f"warning: equivalence inconclusive: {verdict.detail}", file=sys.stderr)
    sys.stdout.write(simplified)
    if args.metrics:
        orig_count = metrics.count_tokens(original).count
        simp_count = metrics.count_tokens(simplified).count
        pct = 100.0 * (orig_count - simp_count) / orig_count if orig_count else 0.0
        print(f"tokens: {orig_count} -> {simp_count} ({pct:.2f}% reduction)", file=sys.stderr)
    return 0


def _cmd_dataset_build(args) -> int:
    try:
        records = dataset.ingest(args.input, args.format)
    except (OSError, dataset.EmptyCorpusError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    modes = ("independent", "joint") if args.mode == "both" else (args.mode,)
    config = RuleConfig(strictness=args.strictness)
    pairs = dataset.build_pairs(records, config, modes)
    if not pairs:
        print("warning: no pairs produced from corpus", file=sys.stderr)

    if args.llm:
        covered = {rid for pair in pairs for rid in pair.rules_applied}
        provider = llm.MockProvider()
        for rule_id in RULE_IDS:
            if rule_id in covered:
                continue
            try:
                pairs.append(llm.synthesize_pair(provider, rule_id, seed=args.seed))
            except llm.SynthesisError as exc:
                print(f"warning: {rule_id}: {exc}", file=sys.stderr)

    dataset.emit(pairs, args.output)
    print(json.dumps(dataset.stats(pairs).to_json_dict()))
    return 0


def _runner_spec(command: str | None, timeout_ms: int, max_parallel: int) -> equivalence.RunnerSpec:
    if command:
        import shlex

        return equivalence.RunnerSpec(
            command=tuple(shlex.split(command)),
            timeout_ms=timeout_ms,
            max_parallel=max_parallel,
        )
    return equivalence.RunnerSpec(timeout_ms=timeout_ms, max_parallel=max_parallel)


def _cmd_validate(args) -> int:
    try:
        pairs = dataset.load_pairs(args.pairs)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    tests_by_task: dict[str, tuple[str, ...]] = {}
    if args.corpus:
        try:
            for record in dataset.ingest(args.corpus, args.corpus_format):
                tests_by_task[record.task_id] = record.test_list
        except (OSError, dataset.EmptyCorpusError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    runner = _runner_spec(args.runner, args.timeout_ms, args.max_parallel)
    triples = [
        (p.original_code, p.simplified_code, tests_by_task.get(p.source_task_id, ()))
        for p in pairs
    ]
    verdicts = equivalence.check_dynamic_many(triples, runner)

    counts = {"equivalent": 0, "inequivalent": 0, "inconclusive": 0}
    for pair, verdict in zip(pairs, verdicts):
        counts[verdict.status] += 1
        print(
            json.dumps(
                {"pair_id": pair.pair_id, "status": verdict.status, "detail": verdict.detail}
            )
        )
    print(
        f"validated {len(pairs)} pairs: {counts['equivalent']} equivalent, "
        f"{counts['inequivalent']} inequivalent, {counts['inconclusive']} inconclusive",
        file=sys.stderr,
    )
    if counts["inequivalent"]:
        return 1
    if counts["inconclusive"]:
        print("warning: some verdicts are inconclusive", file=sys.stderr)
    return 0


def _cmd_report(args) -> int:
    try:
        pairs = dataset.load_pairs(args.pairs)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = metrics.MetricsReport()
    if pairs:
        try:
            originals = [metrics.count_tokens(p.original_code, args.tokenizer).count for p in pairs]
            simplifieds = [
                metrics.count_tokens(p.simplified_code, args.tokenizer).count for p in pairs
            ]
        except (metrics.LexError, metrics.VocabError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        fires: dict[str, int] = {}
        for pair in pairs:
            for rule_id in pair.rules_applied:
                fires[rule_id] = fires.get(rule_id, 0) + 1
        orig_sum, simp_sum = sum(originals), sum(simplifieds)
        report = metrics.MetricsReport(
            rule_fire_counts=fires,
            mean_original_tokens=orig_sum / len(pairs),
            mean_simplified_tokens=simp_sum / len(pairs),
            reduction_pct=100.0 * (orig_sum - simp_sum) / orig_sum if orig_sum else 0.0,
        )
    print(f"{'rule':<6} {'pairs':>6}", file=sys.stderr)
    for rule_id, count in sorted(report.rule_fire_counts.items(), key=lambda kv: int(kv[0][1:])):
        print(f"{rule_id:<6} {count:>6}", file=sys.stderr)
    print(
        f"mean tokens {report.mean_original_tokens:.2f} -> "
        f"{report.mean_simplified_tokens:.2f} "
        f"({report.reduction_pct:.2f}% reduction)",
        file=sys.stderr,
    )
    print(json.dumps(report.to_json_dict()))
    return 0


def _cmd_passk(args) -> int:
    try:
        results = metrics.load_results(args.results)
        ks = [int(part) for part in args.k.split(",") if part.strip()]
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        for k in ks:
            print(f"pass@{k} {metrics.pass_at_k(results, k):.3f}")
    except (metrics.InsufficientSamplesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    if args.command == "simplify":
        return _cmd_simplify(args)
    if args.command == "dataset":
        return _cmd_dataset_build(args)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "report":
        return _cmd_report(args)
    if args.command == "passk":
        return _cmd_passk(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
