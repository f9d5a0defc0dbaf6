"""
Test the regular expression lexer
"""


import pytest

from locapart.parsing import lex
from locapart.parsing.token import EndToken, IntegerToken, NameToken, Token


class WordLexer(lex.RegexLexer):
    """Integers and words; a backslash switches to words only."""

    @lex.action(IntegerToken)
    def integer(self, text):
        return int(text)

    @lex.action(NameToken)
    def name(self, text):
        return text

    RULES = {
        "root": [
            (r"[ \t\n]+", lex.skip),
            (r"\d+", integer),
            (r"[a-z]+", name),
            (r"\\", lex.skip, "words"),
        ],
        "words": [
            (r"[ \t\n]+", lex.skip),
            (r"[a-z0-9]+", name),
        ],
    }


def test_tokens():
    toks = list(WordLexer("ab 12\n  cd"))
    assert [type(t) for t in toks] == [NameToken, IntegerToken, NameToken, EndToken]
    assert [t.value for t in toks[:3]] == ["ab", 12, "cd"]
    assert (toks[1].lineno, toks[1].offset) == (1, 4)
    assert (toks[2].lineno, toks[2].offset) == (2, 3)
    assert isinstance(toks[0], Token)


def test_states():
    toks = list(WordLexer("12 \\ 34"))
    assert [type(t) for t in toks] == [IntegerToken, NameToken, EndToken]
    assert toks[1].value == "34"


def test_peek():
    lexer = iter(WordLexer("a 1"))
    assert lexer.peek_token().value == "a"
    assert next(lexer).value == "a"
    tok = next(lexer)
    lexer.unpop_token(tok)
    assert next(lexer) is tok
    assert isinstance(next(lexer), EndToken)


def test_run_error():
    with pytest.raises(lex.RunError) as exc:
        list(WordLexer("ab\n cd ?"))
    assert exc.value.lineno == 2
    assert exc.value.offset == 5
    assert exc.value.text == "?"
    assert isinstance(exc.value, lex.Error)


def test_compile_error():
    class Grouped(lex.RegexLexer):
        RULES = {"root": [(r"(a)b", lex.skip)]}

    class Short(lex.RegexLexer):
        RULES = {"root": [(r"a", )]}

    class Broken(lex.RegexLexer):
        RULES = {"root": [(r"[a", lex.skip)]}

    for cls in (Grouped, Short, Broken):
        with pytest.raises(lex.CompileError):
            cls("a")


def test_empty_match():
    class Optional(lex.RegexLexer):
        RULES = {"root": [(r"a*", lex.skip)]}

    with pytest.raises(lex.RunError) as exc:
        list(Optional("aab"))
    assert exc.value.offset == 3
    assert exc.value.text == "b"

    with pytest.raises(lex.RunError):
        list(Optional(""))
