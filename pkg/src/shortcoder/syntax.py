"""Concrete-syntax-aware parsing and canonical rendering of Python modules.

The tree is a thin wrapper around the stdlib ``ast`` module, annotated with
the concrete-syntax facts the simplifier cares about and that ``ast`` throws
away:

- ``_group`` on expression nodes: the number of redundant (purely grouping)
  parenthesis layers that surrounded the expression in the source.
- ``_else_if`` on ``ast.If`` nodes appearing as the sole statement of an
  ``else:`` block, distinguishing ``else: if ...`` from ``elif ...`` (the
  two parse to identical ASTs).
- ``_quote`` on string constants: the quote character used in the source,
  so rendering does not flip between ``'`` and ``"``.
- ``_src`` on f-strings: the verbatim source segment, re-emitted as-is.
- ``_leading_comments`` / ``_trailing_comment`` on statements.

Rendering is canonical (4-space indents, single spaces around operators,
one statement per line) rather than byte-preserving; the retained
annotations are the only concrete-syntax facts that survive.
"""

from __future__ import annotations

import ast
import copy
import io
import tokenize
from dataclasses import dataclass, field
from typing import Optional

__all__ = [
    "ParseError",
    "SyntaxTree",
    "parse",
    "render",
    "normalize",
    "structurally_equal",
]

_WHITESPACE = " \t\r\n\\"

_LOCATION_FIELDS = ("lineno", "col_offset", "end_lineno", "end_col_offset")

_TRIVIA_ATTRS = (
    "_leading_comments",
    "_trailing_comment",
    "_tail_comments",
    "_quote",
    "_src",
)

_COMPOUND_STMT = (
    ast.If,
    ast.For,
    ast.AsyncFor,
    ast.While,
    ast.With,
    ast.AsyncWith,
    ast.FunctionDef,
    ast.AsyncFunctionDef,
    ast.ClassDef,
    ast.Try,
    ast.Match,
)


class ParseError(ValueError):
    """Input is not a syntactically valid Python 3 module."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.message = message
        self.line = line
        self.column = column


@dataclass(eq=False)
class SyntaxTree:
    """A parsed Python module plus the annotations described above.

    ``source`` is the text the tree was parsed from, or ``None`` for trees
    produced by rewriting (their spans are no longer meaningful).
    """

    module: ast.Module
    source: Optional[str] = field(default=None, repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SyntaxTree):
            return NotImplemented
        return structurally_equal(self, other)

    def copy(self) -> "SyntaxTree":
        return SyntaxTree(module=copy.deepcopy(self.module), source=self.source)


def _structure_key(module: ast.Module):
    parts = [ast.dump(module)]
    for node in ast.walk(module):
        group = getattr(node, "_group", 0)
        else_if = getattr(node, "_else_if", False)
        if group or else_if:
            parts.append((type(node).__name__, group, else_if))
    return tuple(parts)


def structurally_equal(a: SyntaxTree, b: SyntaxTree) -> bool:
    """Equality ignoring spans and trivia but honoring grouping/elif shape."""
    return _structure_key(a.module) == _structure_key(b.module)


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------


def parse(source: str) -> SyntaxTree:
    """Parse ``source`` into a SyntaxTree, or raise ParseError."""
    try:
        module = ast.parse(source)
        # grammar-valid but non-compilable modules (e.g. module-level
        # `return`) are rejected here as well
        compile(module, "<shortcoder>", "exec")
    except SyntaxError as exc:
        line = exc.lineno if exc.lineno is not None else 1
        column = (exc.offset - 1) if exc.offset else 0
        raise ParseError(exc.msg or "invalid syntax", line, column) from None
    _annotate_groups(module, source)
    _annotate_strings(module, source)
    _annotate_else_if(module)
    _attach_comments(module, source)
    return SyntaxTree(module=module, source=source)


def _line_offsets(source: str) -> list[int]:
    offsets = [0]
    for line in source.splitlines(keepends=True):
        offsets.append(offsets[-1] + len(line))
    return offsets


def _annotate_groups(module: ast.Module, source: str) -> None:
    """Mark redundant grouping parentheses with ``_group`` layer counts.

    A paren pair immediately enclosing an expression's span is a grouping
    pair iff blanking it out re-parses to a structurally identical module.
    """
    offsets = _line_offsets(source)

    def abs_pos(line: int, col: int) -> int:
        return offsets[line - 1] + col

    reference = ast.dump(module)
    work = source
    for node in ast.walk(module):
        if not isinstance(node, ast.expr) or not hasattr(node, "lineno"):
            continue
        start = abs_pos(node.lineno, node.col_offset)
        end = abs_pos(node.end_lineno, node.end_col_offset)
        layers = 0
        while True:
            i = start - 1
            while i >= 0 and work[i] in _WHITESPACE:
                i -= 1
            j = end
            while j < len(work) and work[j] in _WHITESPACE:
                j += 1
            if i < 0 or j >= len(work) or work[i] != "(" or work[j] != ")":
                break
            candidate = work[:i] + " " + work[i + 1 : j] + " " + work[j + 1 :]
            try:
                reparsed = ast.parse(candidate)
            except SyntaxError:
                break
            if ast.dump(reparsed) != reference:
                break
            layers += 1
            work = candidate
            start, end = i, j + 1
        if layers:
            node._group = layers


def _annotate_strings(module: ast.Module, source: str) -> None:
    for node in ast.walk(module):
        if isinstance(node, ast.Constant) and isinstance(node.value, str):
            segment = ast.get_source_segment(source, node)
            if not segment:
                continue
            k = 0
            while k < len(segment) and segment[k] not in "'\"":
                k += 1
            prefix = segment[:k].lower()
            if "r" in prefix or "b" in prefix or "f" in prefix:
                continue
            if segment[k : k + 3] in ("'''", '"""'):
                continue  # triple-quoted strings render canonically
            if k < len(segment):
                node._quote = segment[k]
        elif isinstance(node, ast.JoinedStr):
            segment = ast.get_source_segment(source, node)
            if segment is not None and "\n" not in segment:
                node._src = segment


def _annotate_else_if(module: ast.Module) -> None:
    for node in ast.walk(module):
        if isinstance(node, ast.If) and len(node.orelse) == 1:
            inner = node.orelse[0]
            if isinstance(inner, ast.If) and inner.col_offset > node.col_offset:
                inner._else_if = True


def is_simple_stmt(node: ast.stmt) -> bool:
    return not isinstance(node, _COMPOUND_STMT)


def _attach_comments(module: ast.Module, source: str) -> None:
    try:
        tokens = list(tokenize.generate_tokens(io.StringIO(source).readline))
    except tokenize.TokenError:
        return
    comments = [tok for tok in tokens if tok.type == tokenize.COMMENT]
    if not comments:
        return
    statements = [n for n in ast.walk(module) if isinstance(n, ast.stmt)]
    for tok in comments:
        line = tok.start[0]
        text = tok.string.rstrip()
        on_line = [s for s in statements if s.lineno == line]
        if on_line:
            target = max(on_line, key=lambda s: s.col_offset)
            if is_simple_stmt(target):
                target._trailing_comment = text
            else:
                _leading(target).append(text)
            continue
        following = [s for s in statements if s.lineno > line]
        if following:
            first_line = min(s.lineno for s in following)
            target = min(
                (s for s in following if s.lineno == first_line),
                key=lambda s: s.col_offset,
            )
            _leading(target).append(text)
        else:
            tail = getattr(module, "_tail_comments", None)
            if tail is None:
                tail = module._tail_comments = []
            tail.append(text)


def _leading(node: ast.stmt) -> list[str]:
    existing = getattr(node, "_leading_comments", None)
    if existing is None:
        existing = node._leading_comments = []
    return existing


# ---------------------------------------------------------------------------
# render
# ---------------------------------------------------------------------------


def _escape_str(value: str, quote: str) -> str:
    out = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == quote:
            out.append("\\" + quote)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 32 or ord(ch) == 127:
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    return quote + "".join(out) + quote


class _Renderer(ast._Unparser):
    """Canonical unparser honoring group/elif/quote/comment annotations."""

    def traverse(self, node):
        if isinstance(node, list):
            super().traverse(node)
            return
        if isinstance(node, ast.stmt):
            for comment in getattr(node, "_leading_comments", ()):
                self.fill(comment)
            super().traverse(node)
            trailing = getattr(node, "_trailing_comment", None)
            if trailing and is_simple_stmt(node):
                self.write("  " + trailing)
            return
        if isinstance(node, ast.expr):
            layers = getattr(node, "_group", 0)
            if layers:
                self.write("(" * layers)
            super().traverse(node)
            if layers:
                self.write(")" * layers)
            return
        super().traverse(node)

    def visit_If(self, node):
        self.fill("if ")
        self.traverse(node.test)
        with self.block():
            self.traverse(node.body)
        while (
            node.orelse
            and len(node.orelse) == 1
            and isinstance(node.orelse[0], ast.If)
            and not getattr(node.orelse[0], "_else_if", False)
        ):
            node = node.orelse[0]
            for comment in getattr(node, "_leading_comments", ()):
                self.fill(comment)
            self.fill("elif ")
            self.traverse(node.test)
            with self.block():
                self.traverse(node.body)
        if node.orelse:
            self.fill("else")
            with self.block():
                self.traverse(node.orelse)

    # The running interpreter's _Unparser parenthesizes every tuple; emit
    # bare tuples where the grammar allows so added parens never read as a
    # removable group on re-parse.
    def visit_Tuple(self, node):
        parens = len(node.elts) == 0 or self.get_precedence(node) > ast._Precedence.TUPLE
        with self.delimit_if("(", ")", parens):
            self.items_view(self.traverse, node.elts)

    def visit_Assign(self, node):
        self.fill()
        for target in node.targets:
            self.set_precedence(ast._Precedence.TUPLE, target)
            self.traverse(target)
            self.write(" = ")
        self.set_precedence(ast._Precedence.TUPLE, node.value)
        self.traverse(node.value)
        if type_comment := self.get_type_comment(node):
            self.write(type_comment)

    def visit_Return(self, node):
        self.fill("return")
        if node.value:
            self.write(" ")
            self.set_precedence(ast._Precedence.TUPLE, node.value)
            self.traverse(node.value)

    def _for_helper(self, fill, node):
        self.fill(fill)
        self.set_precedence(ast._Precedence.TUPLE, node.target)
        self.traverse(node.target)
        self.write(" in ")
        self.traverse(node.iter)
        with self.block(extra=self.get_type_comment(node)):
            self.traverse(node.body)
        if node.orelse:
            self.fill("else")
            with self.block():
                self.traverse(node.orelse)

    def visit_Constant(self, node):
        quote = getattr(node, "_quote", None)
        if quote and isinstance(node.value, str) and getattr(node, "kind", None) != "u":
            self.write(_escape_str(node.value, quote))
            return
        super().visit_Constant(node)

    def visit_JoinedStr(self, node):
        src = getattr(node, "_src", None)
        if src is not None:
            self.write(src)
            return
        super().visit_JoinedStr(node)


def render(tree: SyntaxTree) -> str:
    """Render a tree to canonical source text.

    The output ends with a newline unless the module is empty; comments are
    re-emitted on their attached statement's line or on their own line.
    """
    text = _Renderer().visit(tree.module)
    tail = getattr(tree.module, "_tail_comments", None)
    if tail:
        lines = [text] if text else []
        lines.extend(tail)
        text = "\n".join(lines)
    return text + "\n" if text else ""


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------


def normalize(tree: SyntaxTree) -> SyntaxTree:
    """Copy with grouping erased, trivia stripped, and spans zeroed."""
    module = copy.deepcopy(tree.module)
    for node in ast.walk(module):
        for attr in _TRIVIA_ATTRS + ("_group", "_else_if"):
            if hasattr(node, attr):
                delattr(node, attr)
        for attr in _LOCATION_FIELDS:
            if hasattr(node, attr):
                setattr(node, attr, 0)
    if hasattr(module, "_tail_comments"):
        del module._tail_comments
    return SyntaxTree(module=module, source=None)
