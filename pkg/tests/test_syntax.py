import pytest
from hypothesis import given, settings, strategies as st

from shortcoder.syntax import ParseError, normalize, parse, render, structurally_equal


def roundtrip(source: str) -> str:
    return render(parse(source))


class TestRoundTrip:
    @pytest.mark.parametrize(
        "source",
        [
            "x = 1\n",
            "def f(a, b):\n    return a + b\n",
            "x = (1 + 2)\n",
            "return_value = ((x))\n",
            "if a:\n    pass\nelif b:\n    pass\nelse:\n    pass\n",
            "if a:\n    pass\nelse:\n    if b:\n        pass\n",
            "s = 'single'\n",
            's = "double"\n',
            "while True:\n    break\n",
            "for i in range(3):\n    print(i)\n",
            "class C:\n\n    def m(self):\n        return 1\n",
            "try:\n    pass\nexcept ValueError as exc:\n    raise\n",
            "with open('f') as g:\n    g.read()\n",
            "x = [i * i for i in xs if i]\n",
            "d = {k: v for k, v in pairs}\n",
            "del a, b\n",
            "x, y = y, x\n",
            "lambda_result = (lambda v: v + 1)(2)\n",
        ],
    )
    def test_exact(self, source):
        assert roundtrip(source) == source

    def test_fstring_verbatim(self):
        source = "msg = f'{x:>10}!'\n"
        assert roundtrip(source) == source

    def test_empty_module(self):
        assert roundtrip("") == ""

    def test_output_ends_with_newline(self):
        assert roundtrip("x = 1") == "x = 1\n"

    def test_idempotent(self):
        source = "def f(x):\n    # local note\n    return (x + 1)  # trailing\n"
        once = roundtrip(source)
        assert roundtrip(once) == once


class TestComments:
    def test_leading_comment_preserved(self):
        source = "# setup\nx = 1\n"
        assert roundtrip(source) == source

    def test_trailing_comment_preserved(self):
        source = "x = 1  # unit: meters\n"
        assert roundtrip(source) == source

    def test_tail_comment_preserved(self):
        source = "x = 1\n# done\n"
        assert roundtrip(source) == source

    def test_comment_inside_function(self):
        source = "def f():\n    # guard against zero\n    return 1\n"
        assert roundtrip(source) == source


class TestGroups:
    def test_redundant_parens_survive(self):
        assert roundtrip("y = (x)\n") == "y = (x)\n"

    def test_double_parens_survive(self):
        assert roundtrip("y = ((x))\n") == "y = ((x))\n"

    def test_call_parens_not_groups(self):
        assert roundtrip("y = f(x)\n") == "y = f(x)\n"

    def test_group_distinguishes_trees(self):
        assert not structurally_equal(parse("y = (x)\n"), parse("y = x\n"))
        assert structurally_equal(parse("y = (x)\n"), parse("y = (x)\n"))


class TestElifAnnotation:
    def test_elif_vs_else_if_render_differently(self):
        flat = "if a:\n    pass\nelif b:\n    pass\n"
        nested = "if a:\n    pass\nelse:\n    if b:\n        pass\n"
        assert roundtrip(flat) == flat
        assert roundtrip(nested) == nested

    def test_elif_vs_else_if_structurally_distinct(self):
        flat = parse("if a:\n    x = 1\nelif b:\n    x = 2\n")
        nested = parse("if a:\n    x = 1\nelse:\n    if b:\n        x = 2\n")
        assert not structurally_equal(flat, nested)


class TestQuotes:
    def test_single_quotes_kept(self):
        assert roundtrip("s = 'hi'\n") == "s = 'hi'\n"

    def test_double_quotes_kept(self):
        assert roundtrip('s = "hi"\n') == 's = "hi"\n'

    def test_mixed_quotes_kept(self):
        source = "a = 'x'\nb = \"y\"\n"
        assert roundtrip(source) == source


class TestParseError:
    def test_raises(self):
        with pytest.raises(ParseError):
            parse("def f(:\n")

    def test_location(self):
        try:
            parse("x = 1\ny = (\n")
        except ParseError as exc:
            assert exc.line == 2
            assert exc.column >= 0
        else:
            pytest.fail("expected ParseError")

    def test_is_value_error(self):
        assert issubclass(ParseError, ValueError)

    def test_return_outside_function(self):
        with pytest.raises(ParseError):
            parse("return (x + y)\n")


class TestNormalize:
    def test_quote_choice_ignored(self):
        assert normalize(parse("s = 'a'\n")) == normalize(parse('s = "a"\n'))

    def test_groups_ignored(self):
        assert normalize(parse("y = (x)\n")) == normalize(parse("y = x\n"))

    def test_comments_ignored(self):
        assert normalize(parse("# c\nx = 1\n")) == normalize(parse("x = 1\n"))

    def test_real_difference_kept(self):
        assert normalize(parse("x = 1\n")) != normalize(parse("x = 2\n"))


_names = st.sampled_from(["x", "y", "acc", "total", "value_1"])
_numbers = st.integers(min_value=0, max_value=99).map(str)
_exprs = st.one_of(
    _names,
    _numbers,
    st.tuples(_names, st.sampled_from(["+", "-", "*", "//"]), _numbers).map(
        lambda t: f"{t[0]} {t[1]} {t[2]}"
    ),
)
_stmts = st.one_of(
    st.tuples(_names, _exprs).map(lambda t: f"{t[0]} = {t[1]}"),
    st.tuples(_names, _exprs).map(lambda t: f"{t[0]} = ({t[1]})"),
    _exprs.map(lambda e: f"print({e})"),
)


@st.composite
def _modules(draw):
    lines = draw(st.lists(_stmts, min_size=1, max_size=6))
    if draw(st.booleans()):
        body = "".join(f"    {line}\n" for line in lines)
        return f"def generated(x, y):\n{body}    return x\n"
    return "".join(f"{line}\n" for line in lines)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(_modules())
    def test_roundtrip_stable(self, source):
        once = roundtrip(source)
        assert roundtrip(once) == once

    @settings(max_examples=150, deadline=None)
    @given(_modules())
    def test_roundtrip_preserves_structure(self, source):
        assert structurally_equal(parse(source), parse(roundtrip(source)))
