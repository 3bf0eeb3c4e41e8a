"""The ten token-reducing simplification rules and their application modes.

Each rule is a matcher+rewriter over statement runs (or, for R2/R9, over a
single statement's expressions). Rules are applied in one bottom-up pass:
nested bodies are rewritten before the enclosing statement is matched (so
a child rewrite that newly enables its parent still lands in the same
pass, keeping single-rule application idempotent), and sibling scanning
resumes after each replacement.

Two strictness dials exist:

- ``strict`` enables every semantic guard (R4 wraps the condition in
  ``bool()``, R8 requires effect-free receivers, R9 requires string-typed
  operands and a net token win).
- ``paper-faithful`` reproduces the canonical textbook rewrites verbatim,
  including their semantic caveats (``flag = condition`` for truthy
  non-bool conditions, ``.format()`` on arbitrary operands).
"""

from __future__ import annotations

import ast
import copy
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .syntax import SyntaxTree, structurally_equal

__all__ = [
    "RULE_IDS",
    "RULES",
    "Rule",
    "RuleConfig",
    "RewriteResult",
    "FixedPointBudgetError",
    "applicable_rules",
    "apply_rule",
    "simplify_joint",
    "simplify_independent",
]

RULE_IDS = ("R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9", "R10")

STRICT = "strict"
PAPER_FAITHFUL = "paper-faithful"

Span = tuple[int, int]


class FixedPointBudgetError(RuntimeError):
    """Joint simplification still fired at the iteration budget."""


@dataclass(frozen=True)
class RuleConfig:
    enabled: frozenset[str] = frozenset(RULE_IDS)
    strictness: str = STRICT
    max_iterations: int = 32

    def __post_init__(self):
        if not self.enabled:
            raise ValueError("enabled rule set must be non-empty")
        unknown = set(self.enabled) - set(RULE_IDS)
        if unknown:
            raise ValueError(f"unknown rule ids: {sorted(unknown)}")
        if self.strictness not in (STRICT, PAPER_FAITHFUL):
            raise ValueError(f"unknown strictness: {self.strictness!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class RewriteResult:
    tree: SyntaxTree
    fired: list[tuple[str, Span]]
    iterations: int = 1


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    safety: str  # "always-safe" | "guarded"
    # match(stmts, i, config) -> (consumed, replacement, span) or None
    matcher: Callable[[list[ast.stmt], int, RuleConfig], Optional[tuple]]
    # whether the engine should still recurse into a replacement's bodies
    recurse_after_fire: bool = False


def _span(node: ast.stmt, last: Optional[ast.stmt] = None) -> Span:
    start = getattr(node, "lineno", 0)
    end = getattr(last if last is not None else node, "end_lineno", start)
    return (start, end)


def _dump(node: ast.AST) -> str:
    return ast.dump(node)


def _store_free_dump(node: ast.expr) -> str:
    """Dump ignoring Load/Store context, for target-vs-use comparison."""
    clone = copy.deepcopy(node)
    for sub in ast.walk(clone):
        if "ctx" in getattr(sub, "_fields", ()):
            sub.ctx = ast.Load()
    return ast.dump(clone)


def _names(node: ast.AST) -> set[str]:
    return {n.id for n in ast.walk(node) if isinstance(n, ast.Name)}


def _is_immutable_literal(node: ast.expr) -> bool:
    if isinstance(node, ast.Constant):
        return isinstance(node.value, (int, float, complex, str, bytes, bool, type(None)))
    if isinstance(node, ast.Tuple):
        return all(_is_immutable_literal(e) for e in node.elts)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        return _is_immutable_literal(node.operand)
    return False


def _is_effect_free(node: ast.expr) -> bool:
    if isinstance(node, (ast.Name, ast.Constant)):
        return True
    if isinstance(node, ast.Attribute):
        return _is_effect_free(node.value)
    if isinstance(node, ast.Tuple):
        return all(_is_effect_free(e) for e in node.elts)
    return False


def _single_name_assign(stmt: ast.stmt) -> Optional[str]:
    if (
        isinstance(stmt, ast.Assign)
        and len(stmt.targets) == 1
        and isinstance(stmt.targets[0], ast.Name)
    ):
        return stmt.targets[0].id
    return None


def _locate(new: ast.AST, template: ast.AST) -> ast.AST:
    ast.copy_location(new, template)
    ast.fix_missing_locations(new)
    return new


# ---------------------------------------------------------------------------
# R1: collapse consecutive assignments of one immutable value
# ---------------------------------------------------------------------------


def _match_r1(stmts, i, config):
    first = stmts[i]
    if _single_name_assign(first) is None or not _is_immutable_literal(first.value):
        return None
    value_key = _dump(first.value)
    run = [first]
    j = i + 1
    while j < len(stmts):
        stmt = stmts[j]
        if _single_name_assign(stmt) is None or _dump(stmt.value) != value_key:
            break
        run.append(stmt)
        j += 1
    if len(run) < 2:
        return None
    merged = ast.Assign(targets=[s.targets[0] for s in run], value=first.value)
    _locate(merged, first)
    return (len(run), [merged], _span(first, run[-1]))


# ---------------------------------------------------------------------------
# R2: drop grouping parentheses around return values
# ---------------------------------------------------------------------------


def _match_r2(stmts, i, config):
    stmt = stmts[i]
    if not isinstance(stmt, ast.Return) or stmt.value is None:
        return None
    if getattr(stmt.value, "_group", 0) < 1:
        return None
    if isinstance(stmt.value, (ast.Yield, ast.YieldFrom)):
        return None  # `return yield x` does not parse without parens
    stmt.value._group = 0
    return (1, [stmt], _span(stmt))


# ---------------------------------------------------------------------------
# R3: x = x <op> y  ->  x <op>= y
# ---------------------------------------------------------------------------

_AUG_OPS = (
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.FloorDiv,
    ast.Mod,
    ast.Pow,
    ast.LShift,
    ast.RShift,
    ast.BitAnd,
    ast.BitOr,
    ast.BitXor,
)


def _match_r3(stmts, i, config):
    stmt = stmts[i]
    if not isinstance(stmt, ast.Assign) or len(stmt.targets) != 1:
        return None
    target = stmt.targets[0]
    value = stmt.value
    if not isinstance(value, ast.BinOp) or not isinstance(value.op, _AUG_OPS):
        return None
    if isinstance(target, ast.Name):
        pass
    elif config.strictness == PAPER_FAITHFUL and isinstance(
        target, (ast.Attribute, ast.Subscript)
    ):
        base = target.value
        while isinstance(base, (ast.Attribute, ast.Subscript)):
            base = base.value
        if not isinstance(base, ast.Name):
            return None
    else:
        return None
    if _store_free_dump(target) != _store_free_dump(value.left):
        return None
    if getattr(value.left, "_group", 0) or getattr(value, "_group", 0):
        return None
    if _names(target) & _names(value.right):
        return None
    aug = ast.AugAssign(target=target, op=value.op, value=value.right)
    _locate(aug, stmt)
    return (1, [aug], _span(stmt))


# ---------------------------------------------------------------------------
# R4: if/else assignment -> conditional expression
# ---------------------------------------------------------------------------


def _match_r4(stmts, i, config):
    stmt = stmts[i]
    if not isinstance(stmt, ast.If):
        return None
    if len(stmt.body) != 1 or len(stmt.orelse) != 1:
        return None
    then, other = stmt.body[0], stmt.orelse[0]
    then_name = _single_name_assign(then)
    other_name = _single_name_assign(other)
    if then_name is None or then_name != other_name:
        return None
    a, b = then.value, other.value
    if (
        isinstance(a, ast.Constant)
        and a.value is True
        and isinstance(b, ast.Constant)
        and b.value is False
    ):
        if config.strictness == STRICT:
            value = ast.Call(
                func=ast.Name(id="bool", ctx=ast.Load()), args=[stmt.test], keywords=[]
            )
        else:
            value = stmt.test
    else:
        value = ast.IfExp(test=stmt.test, body=a, orelse=b)
    assign = ast.Assign(targets=[then.targets[0]], value=value)
    _locate(assign, stmt)
    return (1, [assign], _span(stmt))


# ---------------------------------------------------------------------------
# R5: else-blocks that hold a single if -> elif chains
# ---------------------------------------------------------------------------


def _match_r5(stmts, i, config):
    stmt = stmts[i]
    if not isinstance(stmt, ast.If):
        return None
    flattened = False
    cursor = stmt
    while len(cursor.orelse) == 1 and isinstance(cursor.orelse[0], ast.If):
        inner = cursor.orelse[0]
        if getattr(inner, "_else_if", False):
            inner._else_if = False
            flattened = True
        cursor = inner
    if not flattened:
        return None
    return (1, [stmt], _span(stmt))


# ---------------------------------------------------------------------------
# R6: accumulator loop -> list/dict comprehension
# ---------------------------------------------------------------------------


def _loop_payload(loop: ast.For):
    """Return (append/setitem stmt, guard expr or None) if the body is one."""
    body = loop.body
    guard = None
    if len(body) == 1 and isinstance(body[0], ast.If) and not body[0].orelse:
        guard = body[0].test
        body = body[0].body
    if len(body) != 1:
        return None
    return body[0], guard


def _match_r6(stmts, i, config):
    init = stmts[i]
    name = _single_name_assign(init)
    if name is None or i + 1 >= len(stmts):
        return None
    loop = stmts[i + 1]
    if not isinstance(loop, ast.For) or loop.orelse:
        return None
    payload = _loop_payload(loop)
    if payload is None:
        return None
    stmt, guard = payload

    comp_value = None
    if isinstance(init.value, ast.List) and not init.value.elts:
        if not (
            isinstance(stmt, ast.Expr)
            and isinstance(stmt.value, ast.Call)
            and isinstance(stmt.value.func, ast.Attribute)
            and stmt.value.func.attr == "append"
            and isinstance(stmt.value.func.value, ast.Name)
            and stmt.value.func.value.id == name
            and len(stmt.value.args) == 1
            and not stmt.value.keywords
        ):
            return None
        element = stmt.value.args[0]
        checked = [element, loop.iter] + ([guard] if guard else [])
        comp_value = ast.ListComp(
            elt=element,
            generators=[
                ast.comprehension(
                    target=loop.target,
                    iter=loop.iter,
                    ifs=[guard] if guard else [],
                    is_async=0,
                )
            ],
        )
    elif isinstance(init.value, ast.Dict) and not init.value.keys:
        if not (
            isinstance(stmt, ast.Assign)
            and len(stmt.targets) == 1
            and isinstance(stmt.targets[0], ast.Subscript)
            and isinstance(stmt.targets[0].value, ast.Name)
            and stmt.targets[0].value.id == name
        ):
            return None
        key = stmt.targets[0].slice
        value = stmt.value
        checked = [key, value, loop.iter] + ([guard] if guard else [])
        comp_value = ast.DictComp(
            key=key,
            value=value,
            generators=[
                ast.comprehension(
                    target=loop.target,
                    iter=loop.iter,
                    ifs=[guard] if guard else [],
                    is_async=0,
                )
            ],
        )
    else:
        return None

    if any(name in _names(part) for part in checked):
        return None
    if name in _names(loop.target):
        return None
    for sub in ast.walk(loop):
        if isinstance(sub, (ast.Break, ast.Continue)):
            return None
    assign = ast.Assign(targets=[init.targets[0]], value=comp_value)
    _locate(assign, init)
    return (2, [assign], _span(init, loop))


# ---------------------------------------------------------------------------
# R7: consecutive single-target del statements -> one del
# ---------------------------------------------------------------------------


def _match_r7(stmts, i, config):
    run = []
    j = i
    while j < len(stmts) and isinstance(stmts[j], ast.Delete) and len(stmts[j].targets) == 1:
        run.append(stmts[j])
        j += 1
    if len(run) < 2:
        return None
    merged = ast.Delete(targets=[s.targets[0] for s in run])
    _locate(merged, run[0])
    return (len(run), [merged], _span(run[0], run[-1]))


# ---------------------------------------------------------------------------
# R8: key-presence if/else -> dict.get
# ---------------------------------------------------------------------------


def _match_r8(stmts, i, config):
    stmt = stmts[i]
    if not isinstance(stmt, ast.If) or len(stmt.body) != 1 or len(stmt.orelse) != 1:
        return None
    test = stmt.test
    if (
        not isinstance(test, ast.Compare)
        or len(test.ops) != 1
        or not isinstance(test.ops[0], (ast.In, ast.NotIn))
    ):
        return None
    key, mapping = test.left, test.comparators[0]
    if isinstance(test.ops[0], ast.In):
        lookup_stmt, default_stmt = stmt.body[0], stmt.orelse[0]
    else:
        lookup_stmt, default_stmt = stmt.orelse[0], stmt.body[0]
    lookup_name = _single_name_assign(lookup_stmt)
    default_name = _single_name_assign(default_stmt)
    if lookup_name is None or lookup_name != default_name:
        return None
    lookup = lookup_stmt.value
    if not (
        isinstance(lookup, ast.Subscript)
        and _dump(lookup.value) == _dump(mapping)
        and _dump(lookup.slice) == _dump(key)
    ):
        return None
    if config.strictness == STRICT and not (
        _is_effect_free(mapping) and _is_effect_free(key)
    ):
        return None
    call = ast.Call(
        func=ast.Attribute(value=mapping, attr="get", ctx=ast.Load()),
        args=[key, default_stmt.value],
        keywords=[],
    )
    assign = ast.Assign(targets=[lookup_stmt.targets[0]], value=call)
    _locate(assign, stmt)
    return (1, [assign], _span(stmt))


# ---------------------------------------------------------------------------
# R9: string concatenation chains -> str.format
# ---------------------------------------------------------------------------


def _flatten_add_chain(node: ast.expr) -> list[ast.expr]:
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add) and not getattr(
        node, "_group", 0
    ):
        return _flatten_add_chain(node.left) + _flatten_add_chain(node.right)
    return [node]


def _is_str_literal(node: ast.expr) -> bool:
    return isinstance(node, ast.Constant) and isinstance(node.value, str)


def _is_string_typed(node: ast.expr) -> bool:
    if _is_str_literal(node) or isinstance(node, ast.JoinedStr):
        return True
    return (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "str"
    )


def _r9_rewrite_expr(node: ast.expr, config: RuleConfig, hits: list) -> ast.expr:
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Add):
        operands = _flatten_add_chain(node)
        literals = [op for op in operands if _is_str_literal(op)]
        others = [op for op in operands if not _is_str_literal(op)]
        ok = len(operands) >= 2 and literals and others
        if ok and config.strictness == STRICT:
            # .format() costs 5 tokens and each merge of a literal saves 2;
            # below three literals the rewrite would grow the module.
            ok = len(literals) >= 3 and all(_is_string_typed(op) for op in others)
        if ok:
            template = []
            args = []
            for op in operands:
                if _is_str_literal(op):
                    template.append(op.value.replace("{", "{{").replace("}", "}}"))
                else:
                    template.append("{}")
                    args.append(_r9_descend(op, config, hits))
            fmt = ast.Constant(value="".join(template), kind=None)
            fmt._quote = getattr(literals[0], "_quote", None) or "'"
            call = ast.Call(
                func=ast.Attribute(value=fmt, attr="format", ctx=ast.Load()),
                args=args,
                keywords=[],
            )
            _locate(call, node)
            hits.append(_span_expr(node))
            return call
    return _r9_descend(node, config, hits)


def _span_expr(node: ast.expr) -> Span:
    start = getattr(node, "lineno", 0)
    return (start, getattr(node, "end_lineno", start))


def _r9_descend(node: ast.expr, config: RuleConfig, hits: list) -> ast.expr:
    for name, value in ast.iter_fields(node):
        if isinstance(value, ast.expr):
            setattr(node, name, _r9_rewrite_expr(value, config, hits))
        elif isinstance(value, list):
            for idx, item in enumerate(value):
                if isinstance(item, ast.expr):
                    value[idx] = _r9_rewrite_expr(item, config, hits)
    return node


def _match_r9(stmts, i, config):
    stmt = stmts[i]
    hits: list[Span] = []
    for name, value in ast.iter_fields(stmt):
        if isinstance(value, ast.expr):
            setattr(stmt, name, _r9_rewrite_expr(value, config, hits))
        elif isinstance(value, list) and not (value and isinstance(value[0], ast.stmt)):
            for idx, item in enumerate(value):
                if isinstance(item, ast.expr):
                    value[idx] = _r9_rewrite_expr(item, config, hits)
    if not hits:
        return None
    ast.fix_missing_locations(stmt)
    return (1, [stmt], hits[0])


# ---------------------------------------------------------------------------
# R10: open/.../close -> with open() as f
# ---------------------------------------------------------------------------


def _assigns_name(node: ast.AST, name: str) -> bool:
    for sub in ast.walk(node):
        if isinstance(sub, ast.Name) and sub.id == name and isinstance(sub.ctx, (ast.Store, ast.Del)):
            return True
    return False


def _match_r10(stmts, i, config):
    first = stmts[i]
    handle = _single_name_assign(first)
    if handle is None:
        return None
    call = first.value
    if not (
        isinstance(call, ast.Call)
        and isinstance(call.func, ast.Name)
        and call.func.id == "open"
    ):
        return None
    close_at = None
    for j in range(i + 1, len(stmts)):
        stmt = stmts[j]
        if (
            isinstance(stmt, ast.Expr)
            and isinstance(stmt.value, ast.Call)
            and isinstance(stmt.value.func, ast.Attribute)
            and stmt.value.func.attr == "close"
            and isinstance(stmt.value.func.value, ast.Name)
            and stmt.value.func.value.id == handle
            and not stmt.value.args
            and not stmt.value.keywords
        ):
            close_at = j
            break
    if close_at is None or close_at == i + 1:
        return None
    body = stmts[i + 1 : close_at]
    for stmt in body:
        if _assigns_name(stmt, handle):
            return None
        for sub in ast.walk(stmt):
            if isinstance(sub, (ast.Return, ast.Break, ast.Continue)):
                return None
    for stmt in stmts[close_at + 1 :]:
        if handle in _names(stmt):
            return None
    with_stmt = ast.With(
        items=[
            ast.withitem(
                context_expr=call,
                optional_vars=ast.Name(id=handle, ctx=ast.Store()),
            )
        ],
        body=body,
    )
    _locate(with_stmt, first)
    return (close_at - i + 1, [with_stmt], _span(first, stmts[close_at]))


# ---------------------------------------------------------------------------
# catalog and engine
# ---------------------------------------------------------------------------

RULES: dict[str, Rule] = {
    rule.id: rule
    for rule in (
        Rule("R1", "multi-assignment collapse", "guarded", _match_r1),
        Rule("R2", "return parentheses removal", "always-safe", _match_r2),
        Rule("R3", "augmented assignment", "guarded", _match_r3),
        Rule("R4", "conditional assignment", "guarded", _match_r4),
        Rule("R5", "elif flattening", "always-safe", _match_r5),
        Rule("R6", "loop-to-comprehension", "guarded", _match_r6),
        Rule("R7", "del merging", "always-safe", _match_r7),
        Rule("R8", "dict.get lookup", "guarded", _match_r8),
        Rule("R9", "str.format concatenation", "guarded", _match_r9),
        Rule("R10", "with-open file handling", "guarded", _match_r10, recurse_after_fire=True),
    )
}


def _iter_bodies(stmt: ast.stmt) -> Iterable[list[ast.stmt]]:
    for name, value in ast.iter_fields(stmt):
        if isinstance(value, list) and value and isinstance(value[0], ast.stmt):
            yield value
        elif isinstance(value, list) and value and isinstance(value[0], ast.excepthandler):
            for handler in value:
                yield handler.body
        elif isinstance(value, list) and value and type(value[0]).__name__ == "match_case":
            for case in value:
                yield case.body


def _transform_body(stmts: list[ast.stmt], rule: Rule, config: RuleConfig, fired: list) -> None:
    out: list[ast.stmt] = []
    i = 0
    while i < len(stmts):
        # bottom-up: rewrite nested bodies first, so a child rewrite that
        # newly enables the enclosing statement is picked up in this pass
        for body in _iter_bodies(stmts[i]):
            _transform_body(body, rule, config, fired)
        hit = rule.matcher(stmts, i, config)
        if hit is not None:
            consumed, replacement, span = hit
            fired.append((rule.id, span))
            if rule.recurse_after_fire:
                # the replacement absorbed statements past i whose nested
                # bodies have not been visited yet
                for stmt in replacement:
                    for body in _iter_bodies(stmt):
                        _transform_body(body, rule, config, fired)
            out.extend(replacement)
            i += consumed
        else:
            out.append(stmts[i])
            i += 1
    stmts[:] = out


def _apply_inplace(module: ast.Module, rule_id: str, config: RuleConfig, fired: list) -> None:
    _transform_body(module.body, RULES[rule_id], config, fired)


def _ordered(ids: Iterable[str]) -> list[str]:
    return sorted(ids, key=lambda rid: int(rid[1:]))


def apply_rule(tree: SyntaxTree, rule_id: str, config: RuleConfig = RuleConfig()) -> RewriteResult:
    """Rewrite every matching site of one rule in a single top-down pass."""
    if rule_id not in config.enabled:
        raise ValueError(f"rule {rule_id} is not enabled in this config")
    work = tree.copy()
    fired: list[tuple[str, Span]] = []
    _apply_inplace(work.module, rule_id, config, fired)
    if fired:
        work.source = None
    return RewriteResult(tree=work, fired=fired, iterations=1)


def applicable_rules(tree: SyntaxTree, config: RuleConfig = RuleConfig()) -> set[str]:
    """Ids of enabled rules whose matcher accepts at least one site."""
    found = set()
    for rule_id in _ordered(config.enabled):
        if apply_rule(tree, rule_id, config).fired:
            found.add(rule_id)
    return found


def simplify_joint(tree: SyntaxTree, config: RuleConfig = RuleConfig()) -> RewriteResult:
    """Sweep all enabled rules in id order until a full sweep fires nothing."""
    work = tree.copy()
    fired: list[tuple[str, Span]] = []
    order = _ordered(config.enabled)
    for iteration in range(1, config.max_iterations + 1):
        sweep: list[tuple[str, Span]] = []
        for rule_id in order:
            _apply_inplace(work.module, rule_id, config, sweep)
        if not sweep:
            if fired:
                work.source = None
            return RewriteResult(tree=work, fired=fired, iterations=iteration)
        fired.extend(sweep)
    raise FixedPointBudgetError(
        f"joint simplification still firing after {config.max_iterations} sweeps"
    )


def simplify_independent(
    tree: SyntaxTree, config: RuleConfig = RuleConfig()
) -> list[tuple[str, RewriteResult]]:
    """One (rule id, result) entry per rule that changes the original tree."""
    variants = []
    for rule_id in _ordered(config.enabled):
        result = apply_rule(tree, rule_id, config)
        if result.fired and not structurally_equal(result.tree, tree):
            variants.append((rule_id, result))
    return variants
