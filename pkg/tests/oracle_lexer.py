"""Independent recount oracle: a hand-rolled lexer for corpus-shaped code.

Deliberately does not import tokenize or anything from the package, so
aggregate token counts can be cross-checked against an implementation that
shares no code with the one under test. Supports only what the bundled
corpus and its rewrites use: one statement per physical line, no
continuations, no triple-quoted strings, no f-strings.
"""

import re

_STRING = r"[rRbBuU]{0,2}(?:'(?:\\.|[^'\\\n])*'|\"(?:\\.|[^\"\\\n])*\")"
_NUMBER = r"\d+\.\d*(?:[eE][+-]?\d+)?[jJ]?|\.\d+|\d+(?:[eE][+-]?\d+)?[jJ]?"
_NAME = r"[A-Za-z_]\w*"
_OP = (
    r"\*\*=|//=|<<=|>>=|!=|<=|>=|==|->|:=|\+=|-=|\*=|/=|%=|&=|\|=|\^=|"
    r"\*\*|//|<<|>>|\.\.\.|[-+*/%@&|^~<>()\[\]{},:.;=]"
)
_TOKEN = re.compile(f"(?:{_STRING})|(?:{_NUMBER})|(?:{_NAME})|(?:{_OP})")


def lex_count(source: str) -> int:
    """Token count under the same scheme as the package's lexical counter:
    names, numbers, strings, operators, plus NEWLINE/INDENT/DEDENT;
    comments, blank lines, and the end marker excluded."""
    count = 0
    indents = [0]
    for line in source.split("\n"):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        width = len(line) - len(line.lstrip(" "))
        if width > indents[-1]:
            indents.append(width)
            count += 1  # INDENT
        while width < indents[-1]:
            indents.pop()
            count += 1  # DEDENT
        pos = len(line) - len(line.lstrip(" "))
        line_tokens = 0
        while pos < len(line):
            if line[pos] in " \t":
                pos += 1
                continue
            if line[pos] == "#":
                break
            match = _TOKEN.match(line, pos)
            if match is None:
                raise ValueError(f"oracle cannot lex {line[pos:]!r}")
            line_tokens += 1
            pos = match.end()
        count += line_tokens
        if line_tokens:
            count += 1  # NEWLINE
    count += len(indents) - 1  # closing DEDENTs
    return count
